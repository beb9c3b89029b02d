//! Dense primal active-set QP for convex (possibly singular) Hessians.
//!
//! Solves `min ½ v'Hv + c'v` subject to `E v = f`, `A v ≥ b`, `l ≤ v ≤ u`.
//! Feasibility is obtained first by a phase-1 LP over artificials attached only to
//! the rows violated at the starting point; both phases share the same iteration,
//! which steps along Newton directions on the working-set null space when the
//! reduced Hessian is positive definite and along zero-curvature rays otherwise.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{serde_dense, PivotedQr};

/// Linear rows `matrix · v (sense) rhs`; the sense is fixed by where the rows are used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearRows {
    #[serde(with = "serde_dense::mat")]
    pub matrix: DMatrix<f64>,
    #[serde(with = "serde_dense::vector")]
    pub rhs: DVector<f64>,
}

impl LinearRows {
    pub fn empty(ncols: usize) -> Self {
        LinearRows {
            matrix: DMatrix::zeros(0, ncols),
            rhs: DVector::zeros(0),
        }
    }

    pub fn from_rows(ncols: usize, rows: Vec<(Vec<f64>, f64)>) -> Self {
        let m = rows.len();
        let mut matrix = DMatrix::zeros(m, ncols);
        let mut rhs = DVector::zeros(m);
        for (i, (coefs, b)) in rows.into_iter().enumerate() {
            debug_assert_eq!(coefs.len(), ncols);
            for (j, a) in coefs.into_iter().enumerate() {
                matrix[(i, j)] = a;
            }
            rhs[i] = b;
        }
        LinearRows { matrix, rhs }
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Stack two row sets with the same column count.
    pub fn stacked(&self, other: &LinearRows) -> LinearRows {
        let n = self.ncols();
        let (m1, m2) = (self.len(), other.len());
        let mut matrix = DMatrix::zeros(m1 + m2, n);
        matrix.rows_mut(0, m1).copy_from(&self.matrix);
        matrix.rows_mut(m1, m2).copy_from(&other.matrix);
        let mut rhs = DVector::zeros(m1 + m2);
        rhs.rows_mut(0, m1).copy_from(&self.rhs);
        rhs.rows_mut(m1, m2).copy_from(&other.rhs);
        LinearRows { matrix, rhs }
    }

    /// Rows padded with zero columns up to `ncols`.
    pub fn widened(&self, ncols: usize) -> LinearRows {
        let mut matrix = DMatrix::zeros(self.len(), ncols);
        matrix.columns_mut(0, self.ncols()).copy_from(&self.matrix);
        LinearRows {
            matrix,
            rhs: self.rhs.clone(),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QpError {
    #[error("QP infeasible (phase-1 residual {0:.3e})")]
    Infeasible(f64),
    #[error("QP unbounded below")]
    Unbounded,
    #[error("QP iteration limit reached")]
    IterationLimit,
    #[error("QP reduced Hessian has negative curvature {0:.3e}")]
    Nonconvex(f64),
    #[error("QP dimension mismatch: {0}")]
    Dimension(String),
}

#[derive(Clone, Copy, Debug)]
pub struct QpOptions {
    /// Absolute phase-1 residual tolerated as feasible (scaled by `1 + |rhs|∞`).
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for QpOptions {
    fn default() -> Self {
        QpOptions {
            feas_tol: 1e-9,
            max_iter: 5000,
        }
    }
}

#[derive(Clone, Copy)]
pub struct QpProblem<'a> {
    pub hessian: &'a DMatrix<f64>,
    pub linear: &'a DVector<f64>,
    pub eq: &'a LinearRows,
    pub ge: &'a LinearRows,
    pub lower: &'a [f64],
    pub upper: &'a [f64],
}

#[derive(Clone, Debug)]
pub struct QpSolution {
    pub x: DVector<f64>,
    pub value: f64,
    /// Multipliers with stationarity `Hx + c = E'μ_eq + A'μ_ge + ν`.
    pub eq_mult: DVector<f64>,
    pub ge_mult: DVector<f64>,
    /// Positive at active lower bounds, negative at active upper bounds.
    pub bound_mult: DVector<f64>,
    pub iterations: usize,
}

impl QpSolution {
    /// Max-norm KKT residual of the solution (stationarity, primal, dual, complementarity).
    pub fn kkt_residual(&self, p: &QpProblem) -> f64 {
        let x = &self.x;
        let g = p.hessian * x + p.linear;
        let stat = g
            - p.eq.matrix.transpose() * &self.eq_mult
            - p.ge.matrix.transpose() * &self.ge_mult
            - &self.bound_mult;
        let mut r = stat.amax();
        if !p.eq.is_empty() {
            r = r.max((&p.eq.matrix * x - &p.eq.rhs).amax());
        }
        if !p.ge.is_empty() {
            let slack = &p.ge.matrix * x - &p.ge.rhs;
            for k in 0..slack.len() {
                r = r.max((-slack[k]).max(0.0));
                r = r.max((-self.ge_mult[k]).max(0.0));
                r = r.max((slack[k] * self.ge_mult[k]).abs());
            }
        }
        for j in 0..x.len() {
            let nu = self.bound_mult[j];
            r = r.max((p.lower[j] - x[j]).max(0.0)).max((x[j] - p.upper[j]).max(0.0));
            if nu > 0.0 {
                r = r.max(nu * (x[j] - p.lower[j]).abs());
            } else if nu < 0.0 {
                r = r.max(-nu * (p.upper[j] - x[j]).abs());
            }
        }
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum BoundState {
    Free,
    Lower,
    Upper,
    /// `l == u`; never released.
    Pinned,
}

struct ActiveSetResult {
    x: DVector<f64>,
    eq_mult: DVector<f64>,
    ge_mult: DVector<f64>,
    bound_mult: DVector<f64>,
    iterations: usize,
}

pub fn objective_value(h: &DMatrix<f64>, c: &DVector<f64>, x: &DVector<f64>) -> f64 {
    0.5 * x.dot(&(h * x)) + c.dot(x)
}

/// Solve a convex QP. `start` only seeds phase 1.
pub fn solve_qp(
    p: &QpProblem,
    start: Option<&DVector<f64>>,
    opts: &QpOptions,
) -> Result<QpSolution, QpError> {
    let n = p.linear.len();
    check_dims(p, n)?;
    for j in 0..n {
        if p.lower[j] > p.upper[j] + opts.feas_tol {
            return Err(QpError::Infeasible(p.lower[j] - p.upper[j]));
        }
    }
    let lower: Vec<f64> = p.lower.to_vec();
    let upper: Vec<f64> = (0..n).map(|j| p.upper[j].max(p.lower[j])).collect();

    let mut v0 = match start {
        Some(s) if s.len() == n => s.clone(),
        _ => DVector::zeros(n),
    };
    for j in 0..n {
        v0[j] = v0[j].clamp(lower[j], upper[j]);
        if !v0[j].is_finite() {
            v0[j] = if lower[j].is_finite() { lower[j] } else { upper[j].min(0.0) };
        }
    }

    let feasible = phase_one(p, &lower, &upper, v0, opts)?;
    let res = active_set(
        p.hessian, p.linear, p.eq, p.ge, &lower, &upper, feasible, opts.max_iter, false,
    )?;
    let mut x = res.x;
    for j in 0..n {
        x[j] = x[j].clamp(lower[j], upper[j]);
    }
    let value = objective_value(p.hessian, p.linear, &x);
    Ok(QpSolution {
        x,
        value,
        eq_mult: res.eq_mult,
        ge_mult: res.ge_mult,
        bound_mult: res.bound_mult,
        iterations: res.iterations,
    })
}

fn check_dims(p: &QpProblem, n: usize) -> Result<(), QpError> {
    let bad = p.hessian.nrows() != n
        || p.hessian.ncols() != n
        || p.eq.ncols() != n
        || p.ge.ncols() != n
        || p.eq.rhs.len() != p.eq.len()
        || p.ge.rhs.len() != p.ge.len()
        || p.lower.len() != n
        || p.upper.len() != n;
    if bad {
        Err(QpError::Dimension(format!(
            "n={n}, H {}x{}, eq {}x{}, ge {}x{}, bounds {}/{}",
            p.hessian.nrows(),
            p.hessian.ncols(),
            p.eq.len(),
            p.eq.ncols(),
            p.ge.len(),
            p.ge.ncols(),
            p.lower.len(),
            p.upper.len()
        )))
    } else {
        Ok(())
    }
}

/// Phase 1: minimise the sum of artificials attached to rows violated at `v0`.
fn phase_one(
    p: &QpProblem,
    lower: &[f64],
    upper: &[f64],
    v0: DVector<f64>,
    opts: &QpOptions,
) -> Result<DVector<f64>, QpError> {
    let n = v0.len();
    let rhs_scale = 1.0 + p.eq.rhs.amax().max(p.ge.rhs.amax()).max(v0.amax());
    let exact = 1e-13 * rhs_scale;

    let eq_res = if p.eq.is_empty() {
        DVector::zeros(0)
    } else {
        &p.eq.rhs - &p.eq.matrix * &v0
    };
    let ge_res = if p.ge.is_empty() {
        DVector::zeros(0)
    } else {
        &p.ge.rhs - &p.ge.matrix * &v0
    };
    let mut art_eq: Vec<(usize, f64)> = Vec::new();
    for (k, &r) in eq_res.iter().enumerate() {
        if r.abs() > exact {
            art_eq.push((k, r));
        }
    }
    let mut art_ge: Vec<(usize, f64)> = Vec::new();
    for (k, &r) in ge_res.iter().enumerate() {
        if r > exact {
            art_ge.push((k, r));
        }
    }
    let k_art = art_eq.len() + art_ge.len();
    if k_art == 0 {
        return Ok(v0);
    }

    let nn = n + k_art;
    let mut eq = p.eq.widened(nn);
    let mut ge = p.ge.widened(nn);
    let mut start = DVector::zeros(nn);
    start.rows_mut(0, n).copy_from(&v0);
    let mut col = n;
    for &(k, r) in &art_eq {
        eq.matrix[(k, col)] = r.signum();
        start[col] = r.abs();
        col += 1;
    }
    for &(k, r) in &art_ge {
        ge.matrix[(k, col)] = 1.0;
        start[col] = r;
        col += 1;
    }
    let h = DMatrix::zeros(nn, nn);
    let mut c = DVector::zeros(nn);
    for j in n..nn {
        c[j] = 1.0;
    }
    let mut lo = lower.to_vec();
    let mut hi = upper.to_vec();
    lo.extend(std::iter::repeat_n(0.0, k_art));
    hi.extend(std::iter::repeat_n(f64::INFINITY, k_art));

    let res = active_set(&h, &c, &eq, &ge, &lo, &hi, start, opts.max_iter, true)?;
    let resid: f64 = res.x.rows(n, k_art).iter().map(|a| a.max(0.0)).sum();
    if resid > opts.feas_tol * rhs_scale {
        return Err(QpError::Infeasible(resid));
    }
    Ok(res.x.rows(0, n).into_owned())
}

#[allow(clippy::too_many_arguments)]
fn active_set(
    h: &DMatrix<f64>,
    c: &DVector<f64>,
    eq: &LinearRows,
    ge: &LinearRows,
    lower: &[f64],
    upper: &[f64],
    mut v: DVector<f64>,
    max_iter: usize,
    linear_only: bool,
) -> Result<ActiveSetResult, QpError> {
    let n = v.len();
    let m_eq = eq.len();
    let m_ge = ge.len();
    let h_scale = h.amax().max(1.0);

    let mut state: Vec<BoundState> = (0..n)
        .map(|j| {
            if lower[j] == upper[j] {
                BoundState::Pinned
            } else if v[j] <= lower[j] {
                BoundState::Lower
            } else if v[j] >= upper[j] {
                BoundState::Upper
            } else {
                BoundState::Free
            }
        })
        .collect();
    for j in 0..n {
        match state[j] {
            BoundState::Pinned | BoundState::Lower => v[j] = lower[j],
            BoundState::Upper => v[j] = upper[j],
            BoundState::Free => {}
        }
    }
    let mut working: Vec<usize> = Vec::new();
    let mut in_working = vec![false; m_ge];
    let mut degenerate_run = 0usize;

    for iter in 0..max_iter {
        let free: Vec<usize> = (0..n).filter(|&j| state[j] == BoundState::Free).collect();
        let nf = free.len();
        let m_w = m_eq + working.len();
        let g = h * &v + c;
        let g_scale = 1.0 + g.amax();

        // working rows restricted to free columns, transposed: nf x m_w
        let mut ct = DMatrix::zeros(nf, m_w);
        for (a, &j) in free.iter().enumerate() {
            for k in 0..m_eq {
                ct[(a, k)] = eq.matrix[(k, j)];
            }
            for (b, &k) in working.iter().enumerate() {
                ct[(a, m_eq + b)] = ge.matrix[(k, j)];
            }
        }
        let g_free = DVector::from_iterator(nf, free.iter().map(|&j| g[j]));

        let qr = if nf > 0 { Some(PivotedQr::new(&ct, 1e-11)) } else { None };
        let z = match &qr {
            Some(q) => q.null_complement(),
            None => DMatrix::zeros(0, 0),
        };
        let kdim = z.ncols();

        let mut step = DVector::<f64>::zeros(n);
        let mut ray = false;
        if kdim > 0 {
            let gr = z.transpose() * &g_free;
            let d = if linear_only {
                ray = gr.amax() > 1e-12 * g_scale;
                -&gr
            } else {
                let h_ff = DMatrix::from_fn(nf, nf, |a, b| h[(free[a], free[b])]);
                let hr = z.transpose() * &h_ff * &z;
                reduced_step(&hr, &gr, h_scale, g_scale, &mut ray)?
            };
            let pf = &z * d;
            for (a, &j) in free.iter().enumerate() {
                step[j] = pf[a];
            }
        }

        let stationary = !ray && step.amax() <= 1e-11 * (1.0 + v.amax());
        if stationary {
            // multipliers on the working set
            let mu = match &qr {
                Some(q) if m_w > 0 => q.solve_least_squares(&g_free),
                _ => DVector::zeros(m_w),
            };
            let mut resid = g.clone();
            for k in 0..m_eq {
                resid.axpy(-mu[k], &eq.matrix.row(k).transpose(), 1.0);
            }
            for (b, &k) in working.iter().enumerate() {
                resid.axpy(-mu[m_eq + b], &ge.matrix.row(k).transpose(), 1.0);
            }
            let tol = 1e-9 * g_scale;
            // (violation, is_row, index)
            let mut worst: Option<(f64, bool, usize)> = None;
            for (b, &k) in working.iter().enumerate() {
                let norm = ge.matrix.row(k).norm().max(1e-300);
                let viol = -mu[m_eq + b] * norm;
                if mu[m_eq + b] < -tol / norm && worst.is_none_or(|w| viol > w.0) {
                    worst = Some((viol, true, b));
                }
            }
            for j in 0..n {
                let viol = match state[j] {
                    BoundState::Lower => -resid[j],
                    BoundState::Upper => resid[j],
                    _ => continue,
                };
                if viol > tol && worst.is_none_or(|w| viol > w.0) {
                    worst = Some((viol, false, j));
                }
            }
            match worst {
                None => {
                    let mut eq_mult = DVector::zeros(m_eq);
                    for k in 0..m_eq {
                        eq_mult[k] = mu[k];
                    }
                    let mut ge_mult = DVector::zeros(m_ge);
                    for (b, &k) in working.iter().enumerate() {
                        ge_mult[k] = mu[m_eq + b];
                    }
                    let mut bound_mult = DVector::zeros(n);
                    for j in 0..n {
                        if state[j] != BoundState::Free {
                            bound_mult[j] = resid[j];
                        }
                    }
                    return Ok(ActiveSetResult {
                        x: v,
                        eq_mult,
                        ge_mult,
                        bound_mult,
                        iterations: iter,
                    });
                }
                Some((_, true, b)) => {
                    let k = working.remove(b);
                    in_working[k] = false;
                }
                Some((_, false, j)) => {
                    state[j] = BoundState::Free;
                }
            }
            continue;
        }

        // ratio test
        let mut alpha = if ray { f64::INFINITY } else { 1.0 };
        let mut blocking: Option<(bool, usize)> = None;
        let pnorm = step.amax();
        if m_ge > 0 {
            let ap = &ge.matrix * &step;
            let av = &ge.matrix * &v;
            for k in 0..m_ge {
                if in_working[k] {
                    continue;
                }
                let rn = ge.matrix.row(k).amax();
                if ap[k] < -1e-13 * rn * pnorm {
                    let slack = (av[k] - ge.rhs[k]).max(0.0);
                    let a = slack / -ap[k];
                    if a < alpha {
                        alpha = a;
                        blocking = Some((true, k));
                    }
                }
            }
        }
        for j in 0..n {
            if state[j] != BoundState::Free {
                continue;
            }
            let pj = step[j];
            if pj < -1e-14 * pnorm && lower[j].is_finite() {
                let a = ((v[j] - lower[j]).max(0.0)) / -pj;
                if a < alpha {
                    alpha = a;
                    blocking = Some((false, j));
                }
            } else if pj > 1e-14 * pnorm && upper[j].is_finite() {
                let a = ((upper[j] - v[j]).max(0.0)) / pj;
                if a < alpha {
                    alpha = a;
                    blocking = Some((false, j));
                }
            }
        }
        if !alpha.is_finite() {
            return Err(QpError::Unbounded);
        }
        if alpha == 0.0 {
            degenerate_run += 1;
            if degenerate_run > 4 * (n + m_ge) + 50 {
                return Err(QpError::IterationLimit);
            }
        } else {
            degenerate_run = 0;
        }
        v.axpy(alpha, &step, 1.0);
        match blocking {
            Some((true, k)) => {
                working.push(k);
                in_working[k] = true;
            }
            Some((false, j)) => {
                if step[j] < 0.0 {
                    state[j] = BoundState::Lower;
                    v[j] = lower[j];
                } else {
                    state[j] = BoundState::Upper;
                    v[j] = upper[j];
                }
            }
            None => {}
        }
    }
    Err(QpError::IterationLimit)
}

/// Step on the reduced space: Newton when the reduced Hessian is positive definite on
/// the gradient's support, otherwise a zero-curvature descent ray.
fn reduced_step(
    hr: &DMatrix<f64>,
    gr: &DVector<f64>,
    h_scale: f64,
    g_scale: f64,
    ray: &mut bool,
) -> Result<DVector<f64>, QpError> {
    let curv_tol = 1e-10 * h_scale;
    if let Some(chol) = Cholesky::new(hr.clone()) {
        let l = chol.l_dirty();
        let min_piv = (0..l.nrows()).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
        if min_piv > curv_tol {
            *ray = false;
            return Ok(-chol.solve(gr));
        }
    }
    let sym = (hr + hr.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let u = eig.eigenvectors.transpose() * gr;
    let mut min_eig = f64::INFINITY;
    for &l in eig.eigenvalues.iter() {
        min_eig = min_eig.min(l);
    }
    if min_eig < -1e-7 * h_scale {
        return Err(QpError::Nonconvex(min_eig));
    }
    let k = hr.nrows();
    let gtol = 1e-12 * g_scale;
    let mut d = DVector::zeros(k);
    let mut has_ray = false;
    for j in 0..k {
        if eig.eigenvalues[j] <= curv_tol && u[j].abs() > gtol {
            has_ray = true;
        }
    }
    if has_ray {
        for j in 0..k {
            if eig.eigenvalues[j] <= curv_tol {
                d -= eig.eigenvectors.column(j) * u[j];
            }
        }
    } else {
        for j in 0..k {
            let l = eig.eigenvalues[j];
            if l > curv_tol {
                d -= eig.eigenvectors.column(j) * (u[j] / l);
            }
        }
    }
    *ray = has_ray;
    Ok(d)
}

/// Euclidean projection of `point` onto `{E v = f, A v ≥ b, l ≤ v ≤ u}`.
pub fn project_polyhedron(
    eq: &LinearRows,
    ge: &LinearRows,
    lower: &[f64],
    upper: &[f64],
    point: &DVector<f64>,
) -> Result<QpSolution, QpError> {
    let n = point.len();
    let h = DMatrix::identity(n, n);
    let c = -point;
    let p = QpProblem {
        hessian: &h,
        linear: &c,
        eq,
        ge,
        lower,
        upper,
    };
    let mut sol = solve_qp(&p, Some(point), &QpOptions::default())?;
    sol.value += 0.5 * point.norm_squared();
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inf(n: usize) -> (Vec<f64>, Vec<f64>) {
        (vec![f64::NEG_INFINITY; n], vec![f64::INFINITY; n])
    }

    #[test]
    fn projection_onto_interval() {
        let eq = LinearRows::empty(1);
        let ge = LinearRows::empty(1);
        let sol = project_polyhedron(&eq, &ge, &[0.0], &[1.0], &DVector::from_vec(vec![2.0])).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_onto_halfspace_orthant() {
        let eq = LinearRows::empty(2);
        let ge = LinearRows::from_rows(2, vec![(vec![1.0, 1.0], 1.0)]);
        let (_, hi) = inf(2);
        let p = DVector::from_vec(vec![0.0, 0.0]);
        let sol = project_polyhedron(&eq, &ge, &[0.0, 0.0], &hi, &p).unwrap();
        assert!((sol.x[0] - 0.5).abs() < 1e-12 && (sol.x[1] - 0.5).abs() < 1e-12);
        let h = DMatrix::identity(2, 2);
        let c = -&p;
        let prob = QpProblem { hessian: &h, linear: &c, eq: &eq, ge: &ge, lower: &[0.0, 0.0], upper: &hi };
        assert!(sol.kkt_residual(&prob) < 1e-8);
    }

    #[test]
    fn projection_of_interior_point_is_identity() {
        let eq = LinearRows::empty(2);
        let ge = LinearRows::from_rows(2, vec![(vec![1.0, 1.0], 1.0)]);
        let (_, hi) = inf(2);
        let p = DVector::from_vec(vec![0.7, 0.9]);
        let sol = project_polyhedron(&eq, &ge, &[0.0, 0.0], &hi, &p).unwrap();
        assert!((sol.x - p).amax() < 1e-12);
    }

    #[test]
    fn infeasible_rows_are_reported() {
        // x >= 1 and -x >= 0
        let eq = LinearRows::empty(1);
        let ge = LinearRows::from_rows(1, vec![(vec![1.0], 1.0), (vec![-1.0], 0.0)]);
        let (lo, hi) = inf(1);
        let h = DMatrix::identity(1, 1);
        let c = DVector::zeros(1);
        let p = QpProblem { hessian: &h, linear: &c, eq: &eq, ge: &ge, lower: &lo, upper: &hi };
        assert!(matches!(solve_qp(&p, None, &QpOptions::default()), Err(QpError::Infeasible(_))));
    }

    #[test]
    fn linear_program_via_zero_hessian() {
        // min -x - 2y s.t. x + y <= 4, x <= 3, x,y >= 0, y <= 3
        let eq = LinearRows::empty(2);
        let ge = LinearRows::from_rows(2, vec![(vec![-1.0, -1.0], -4.0)]);
        let h = DMatrix::zeros(2, 2);
        let c = DVector::from_vec(vec![-1.0, -2.0]);
        let lo = [0.0, 0.0];
        let hi = [3.0, 3.0];
        let p = QpProblem { hessian: &h, linear: &c, eq: &eq, ge: &ge, lower: &lo, upper: &hi };
        let sol = solve_qp(&p, None, &QpOptions::default()).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-10 && (sol.x[1] - 3.0).abs() < 1e-10);
        assert!((sol.value + 7.0).abs() < 1e-10);
        assert!(sol.kkt_residual(&p) < 1e-9);
    }

    #[test]
    fn unbounded_ray_detected() {
        let eq = LinearRows::empty(1);
        let ge = LinearRows::empty(1);
        let (lo, hi) = inf(1);
        let h = DMatrix::zeros(1, 1);
        let c = DVector::from_vec(vec![1.0]);
        let p = QpProblem { hessian: &h, linear: &c, eq: &eq, ge: &ge, lower: &lo, upper: &hi };
        assert_eq!(solve_qp(&p, None, &QpOptions::default()).unwrap_err(), QpError::Unbounded);
    }

    #[test]
    fn equality_constrained_semidefinite() {
        // min (x - 1)^2 + 0*y s.t. x + y = 3, y in [0, 5]
        let eq = LinearRows::from_rows(2, vec![(vec![1.0, 1.0], 3.0)]);
        let ge = LinearRows::empty(2);
        let h = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let c = DVector::from_vec(vec![-2.0, 0.0]);
        let lo = [f64::NEG_INFINITY, 0.0];
        let hi = [f64::INFINITY, 5.0];
        let p = QpProblem { hessian: &h, linear: &c, eq: &eq, ge: &ge, lower: &lo, upper: &hi };
        let sol = solve_qp(&p, None, &QpOptions::default()).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-10 && (sol.x[1] - 2.0).abs() < 1e-10);
        assert!(sol.kkt_residual(&p) < 1e-9);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let eq = LinearRows::from_rows(2, vec![(vec![1.0, 1.0], 1.0), (vec![2.0, 2.0], 2.0)]);
        let ge = LinearRows::empty(2);
        let h = DMatrix::identity(2, 2);
        let c = DVector::zeros(2);
        let (lo, hi) = inf(2);
        let p = QpProblem { hessian: &h, linear: &c, eq: &eq, ge: &ge, lower: &lo, upper: &hi };
        let sol = solve_qp(&p, None, &QpOptions::default()).unwrap();
        assert!((sol.x[0] - 0.5).abs() < 1e-10 && (sol.x[1] - 0.5).abs() < 1e-10);
    }
}
