//! Oracles and generators shared by the integration tests and the acceptance harness.
#![allow(dead_code, clippy::needless_range_loop)]

use lfne::model::{HierarchicalGame, LeaderBlock, QuadForm};
use lfne::solver::qp::{solve_qp, LinearRows, QpError, QpOptions, QpProblem};
use lfne::solver::MiqpProblem;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Leader 1's optimistic value found by enumerating which complementarity pairs are active.
///
/// For every subset of follower constraint rows (private rows of each follower, then the
/// shared rows with one common multiplier) the active rows hold with equality, the inactive
/// ones keep zero multipliers, and the leader's cost is minimised over the resulting KKT
/// polyhedron in `(x, y, λ, δ)` with multipliers capped at `cap`. Requires a single leader
/// and a convex leader objective. Returns `None` when every pattern is infeasible.
pub fn kkt_pattern_oracle(g: &HierarchicalGame, cap: f64) -> Option<f64> {
    assert_eq!(g.num_leaders(), 1, "oracle handles one leader");
    let l = &g.leaders[0];
    let n = l.n;
    let p: usize = l.follower_dim();
    let y_off = l.y_offsets();
    let rows: Vec<usize> = l.followers.iter().map(|f| f.constraints.rows()).collect();
    let r_total: usize = rows.iter().sum();
    let d = l.shared.rows();
    let nv = n + p + r_total + d;
    let (yo, lo_, dof) = (n, n + p, n + p + r_total);
    let mut lam_off = Vec::new();
    let mut acc = lo_;
    for &r in &rows {
        lam_off.push(acc);
        acc += r;
    }

    // objective F(x, y) = g(x) + h(x, y)
    let mut h = DMatrix::zeros(nv, nv);
    let mut c = DVector::zeros(nv);
    for a in 0..n {
        c[a] += l.cost_g.linear[a];
        for b in 0..n {
            h[(a, b)] += l.cost_g.hessian[(a, b)];
        }
    }
    for a in 0..n + p {
        c[a] += l.cost_h.linear[a];
        for b in 0..n + p {
            h[(a, b)] += l.cost_h.hessian[(a, b)];
        }
    }
    let constant = l.cost_g.constant + l.cost_h.constant;

    // stationarity rows: Q y_ν + R x + Σ S y_μ + q − D_νᵀ λ_ν − E_νᵀ δ = 0
    let mut eq_base: Vec<(Vec<f64>, f64)> = Vec::new();
    for (nu, f) in l.followers.iter().enumerate() {
        for j in 0..f.dim {
            let mut row = vec![0.0; nv];
            for k in 0..f.dim {
                row[yo + y_off[nu] + k] += f.cost.q_mat[(j, k)];
            }
            for a in 0..n {
                row[a] += f.cost.r[(j, a)];
            }
            for (mu, s) in f.cost.coupling.iter().enumerate() {
                if let (Some(s), true) = (s, mu != nu) {
                    for k in 0..l.followers[mu].dim {
                        row[yo + y_off[mu] + k] += s[(j, k)];
                    }
                }
            }
            for r in 0..rows[nu] {
                row[lam_off[nu] + r] -= f.constraints.d_own[(r, j)];
            }
            for s in 0..d {
                row[dof + s] -= l.shared.e[nu][(s, j)];
            }
            eq_base.push((row, -f.cost.q[j]));
        }
    }

    // primal rows as (coefficients, rhs) meaning coef·v ≥ rhs, in pair order
    let mut primal: Vec<(Vec<f64>, f64, usize)> = Vec::new();
    for (nu, f) in l.followers.iter().enumerate() {
        let con = &f.constraints;
        for r in 0..rows[nu] {
            let mut row = vec![0.0; nv];
            for j in 0..f.dim {
                row[yo + y_off[nu] + j] += con.d_own[(r, j)];
            }
            for (mu, dm) in con.d_cross.iter().enumerate() {
                if let (Some(dm), true) = (dm, mu != nu) {
                    for j in 0..l.followers[mu].dim {
                        row[yo + y_off[mu] + j] += dm[(r, j)];
                    }
                }
            }
            for a in 0..n {
                row[a] += con.a[(r, a)];
            }
            primal.push((row, con.e[r], lam_off[nu] + r));
        }
    }
    for s in 0..d {
        let mut row = vec![0.0; nv];
        for a in 0..n {
            row[a] += l.shared.b[(s, a)];
        }
        for (mu, em) in l.shared.e.iter().enumerate() {
            for j in 0..l.followers[mu].dim {
                row[yo + y_off[mu] + j] += em[(s, j)];
            }
        }
        primal.push((row, l.shared.c[s], dof + s));
    }
    let g_rows: Vec<(Vec<f64>, f64)> = (0..l.g_rows.len())
        .map(|k| {
            let mut row = vec![0.0; nv];
            for a in 0..n {
                row[a] = l.g_rows.matrix[(k, a)];
            }
            (row, -l.g_rows.offset[k])
        })
        .collect();

    let pairs = primal.len();
    assert!(pairs <= 16, "too many pairs for exhaustive patterns");
    let mut best: Option<f64> = None;
    for pattern in 0u32..(1u32 << pairs) {
        let mut eq = eq_base.clone();
        let mut ge = g_rows.clone();
        let mut lower = vec![f64::NEG_INFINITY; nv];
        let mut upper = vec![f64::INFINITY; nv];
        lower[..n].copy_from_slice(&l.x_bounds.lower);
        upper[..n].copy_from_slice(&l.x_bounds.upper);
        for (k, (row, rhs, mult)) in primal.iter().enumerate() {
            if pattern >> k & 1 == 1 {
                eq.push((row.clone(), *rhs));
                lower[*mult] = 0.0;
                upper[*mult] = cap;
            } else {
                ge.push((row.clone(), *rhs));
                lower[*mult] = 0.0;
                upper[*mult] = 0.0;
            }
        }
        let eq = LinearRows::from_rows(nv, eq);
        let ge = LinearRows::from_rows(nv, ge);
        let prob = QpProblem {
            hessian: &h,
            linear: &c,
            eq: &eq,
            ge: &ge,
            lower: &lower,
            upper: &upper,
        };
        match solve_qp(&prob, None, &QpOptions::default()) {
            Ok(sol) => {
                let v = 0.5 * sol.x.dot(&(&h * &sol.x)) + c.dot(&sol.x) + constant;
                if best.is_none_or(|b| v < b) {
                    best = Some(v);
                }
            }
            Err(QpError::Infeasible(_)) => {}
            Err(e) => panic!("pattern {pattern:#b}: {e}"),
        }
    }
    best
}

/// Random mixed-binary QP with a box, a few feasible `≥` rows and an optionally indefinite
/// Hessian.
pub fn random_miqp(seed: u64, convex: bool) -> MiqpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=6);
    let nb = rng.gen_range(1..=n.min(4));
    let l = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let mut hess = &l * l.transpose() * 0.5;
    if !convex {
        let k = rng.gen_range(nb..n.max(nb + 1)).min(n - 1);
        hess[(k, k)] -= rng.gen_range(1.0..3.0);
    }
    let hess = (&hess + hess.transpose()) * 0.5;
    let linear = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
    let lower: Vec<f64> = (0..n).map(|j| if j < nb { 0.0 } else { rng.gen_range(-2.0..-0.5) }).collect();
    let upper: Vec<f64> = (0..n).map(|j| if j < nb { 1.0 } else { rng.gen_range(0.5..2.0) }).collect();
    // rows hold at a random integral-feasible point
    let anchor: Vec<f64> = (0..n)
        .map(|j| if j < nb { f64::from(rng.gen_range(0..=1u8)) } else { rng.gen_range(lower[j]..upper[j]) })
        .collect();
    let m = rng.gen_range(0..=3);
    let rows = (0..m)
        .map(|_| {
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let act: f64 = a.iter().zip(&anchor).map(|(x, y)| x * y).sum();
            let rhs = act - rng.gen_range(0.0..0.5);
            (a, rhs)
        })
        .collect();
    MiqpProblem {
        objective: QuadForm {
            hessian: hess,
            linear,
            constant: rng.gen_range(-1.0..1.0),
        },
        eq: LinearRows::empty(n),
        ge: LinearRows::from_rows(n, rows),
        lower,
        upper,
        binaries: (0..nb).collect(),
    }
}

/// A state with leader decisions uniform in their boxes and follower decisions uniform in
/// `[0, y_max]`; multipliers and binaries zero.
pub fn random_state(g: &HierarchicalGame, rng: &mut ChaCha8Rng, y_max: f64) -> Vec<LeaderBlock> {
    g.leaders
        .iter()
        .map(|l| {
            let mut b = LeaderBlock::zeros(l, g.mode);
            for a in 0..l.n {
                let (lo, hi) = (l.x_bounds.lower[a], l.x_bounds.upper[a]);
                b.x[a] = if lo < hi { rng.gen_range(lo..=hi) } else { lo };
            }
            for y in b.y.iter_mut() {
                for v in y.iter_mut() {
                    *v = rng.gen_range(0.0..=y_max);
                }
            }
            b
        })
        .collect()
}
