//! Small hand-checkable games.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn scalar(v: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, v)
}

/// One leader with `x ∈ [0, 2]` and two scalar followers.
///
/// Followers minimise `½y_ν² − x y_ν` subject to `y_ν ≥ 0` and the shared row `y_1 + y_2 ≥ 1`;
/// the leader minimises `(x − 1)² + (y_1 − 1)²`. For fixed `x` the variational equilibrium is
/// `y = (x, x)` with `δ = 0` when `x ≥ ½`, and `y = (½, ½)` with `δ = ½ − x` otherwise.
pub fn toy_t1() -> HierarchicalGame {
    let follower = Follower {
        dim: 1,
        cost: FollowerCost {
            q_mat: scalar(1.0),
            q: DVector::zeros(1),
            r: scalar(-1.0),
            coupling: vec![None, None],
            c0: 0.0,
        },
        constraints: FollowerConstraints {
            d_own: scalar(1.0),
            d_cross: vec![None, None],
            a: scalar(0.0),
            e: DVector::zeros(1),
        },
    };
    let cost_g = QuadForm {
        hessian: scalar(2.0),
        linear: DVector::from_element(1, -2.0),
        constant: 1.0,
    };
    let cost_h = QuadForm {
        hessian: DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 2.0, 0.0])),
        linear: DVector::from_vec(vec![0.0, -2.0, 0.0]),
        constant: 1.0,
    };
    let leader = LeaderSpec {
        n: 1,
        g_rows: AffineRows {
            matrix: DMatrix::from_column_slice(2, 1, &[1.0, -1.0]),
            offset: DVector::from_vec(vec![0.0, 2.0]),
        },
        x_bounds: BoxBounds::new(vec![0.0], vec![2.0]),
        cost_g: cost_g.clone(),
        cost_h,
        followers: vec![follower.clone(), follower],
        shared: SharedRows {
            b: scalar(0.0),
            e: vec![scalar(1.0), scalar(1.0)],
            c: DVector::from_element(1, 1.0),
        },
    };
    HierarchicalGame {
        version: SCHEMA_VERSION,
        instance_id: "toy-t1".into(),
        seed: None,
        mode: EquilibriumMode::Variational,
        leaders: vec![leader],
        potential_w: Some(cost_g),
    }
}

/// T1's variational equilibrium of the followers at a fixed leader decision: `(y, δ)`.
pub fn toy_t1_equilibrium(x: f64) -> ([f64; 2], f64) {
    if x >= 0.5 {
        ([x, x], 0.0)
    } else {
        ([0.5, 0.5], 0.5 - x)
    }
}

/// Shape of a randomly generated game.
#[derive(Clone, Debug)]
pub struct RandomShape {
    pub leaders: usize,
    pub leader_dim: usize,
    pub max_followers: usize,
    pub max_follower_dim: usize,
    /// Cap on complementarity pairs (private plus shared rows) per leader.
    pub max_binaries: usize,
    /// Follower-to-follower cost coupling `S`.
    pub follower_coupling: bool,
    /// Add `x_0 · y` products to `h^i` so the leader objective is indefinite; only applied
    /// when every follower coordinate has both bound rows.
    pub bilinear: bool,
}

impl RandomShape {
    /// One leader, at most three followers of dimension at most two, at most 12 binaries.
    pub fn tiny() -> Self {
        RandomShape {
            leaders: 1,
            leader_dim: 1,
            max_followers: 3,
            max_follower_dim: 2,
            max_binaries: 12,
            follower_coupling: true,
            bilinear: false,
        }
    }
}

fn uniform_mat(rng: &mut ChaCha8Rng, r: usize, c: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen_range(lo..hi))
}

fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(lo..hi))
}

/// `L Lᵀ / n + shift · I` with `L` uniform in `[−1, 1]`.
fn random_pd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> DMatrix<f64> {
    let l = uniform_mat(rng, n, n, -1.0, 1.0);
    let m = &l * l.transpose() / n.max(1) as f64 + DMatrix::identity(n, n) * shift;
    (&m + m.transpose()) * 0.5
}

/// A feasible random game with an exact potential: every leader's `g^i` equals a shared
/// convex `W`, and follower boxes `l − a·x ≤ y ≤ u − a·x` keep every `Ω^i(x)` nonempty.
pub fn random_game(seed: u64, shape: &RandomShape) -> HierarchicalGame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = shape.leader_dim;
    let n_total = shape.leaders * n;
    let w = QuadForm {
        hessian: random_pd(&mut rng, n_total, 0.5),
        linear: uniform_vec(&mut rng, n_total, -1.0, 1.0),
        constant: 0.0,
    };
    let mut leaders = Vec::with_capacity(shape.leaders);
    for _ in 0..shape.leaders {
        let lower: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..-0.2)).collect();
        let upper: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
        let g_rows = if rng.gen_bool(0.5) {
            AffineRows {
                matrix: uniform_mat(&mut rng, 1, n, -1.0, 1.0),
                offset: DVector::from_element(1, rng.gen_range(0.2..1.0)),
            }
        } else {
            AffineRows::empty(n)
        };
        let m = rng.gen_range(1..=shape.max_followers);
        let dims: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=shape.max_follower_dim)).collect();
        let mut budget = shape.max_binaries;
        let shared_rows = usize::from(budget > 0 && rng.gen_bool(0.7));
        budget -= shared_rows;
        let mut followers = Vec::with_capacity(m);
        let mut has_upper = Vec::new();
        for &p in &dims {
            let coupling = (0..m)
                .map(|mu| {
                    let take = shape.follower_coupling && mu != followers.len() && rng.gen_bool(0.5);
                    take.then(|| uniform_mat(&mut rng, p, dims[mu], -0.3, 0.3))
                })
                .collect();
            let cost = FollowerCost {
                q_mat: random_pd(&mut rng, p, 0.5),
                q: uniform_vec(&mut rng, p, -1.0, 1.0),
                r: uniform_mat(&mut rng, p, n, -1.0, 1.0),
                coupling,
                c0: 0.0,
            };
            let mut d_rows: Vec<Vec<f64>> = Vec::new();
            let mut a_rows: Vec<Vec<f64>> = Vec::new();
            let mut e = Vec::new();
            let mut up = vec![false; p];
            for j in 0..p {
                let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.3..0.3) / n as f64).collect();
                let mut unit = vec![0.0; p];
                if budget > 0 {
                    budget -= 1;
                    unit[j] = 1.0;
                    d_rows.push(unit.clone());
                    a_rows.push(a.clone());
                    e.push(rng.gen_range(-1.0..0.0));
                }
                if budget > 0 && rng.gen_bool(0.6) {
                    budget -= 1;
                    unit[j] = -1.0;
                    d_rows.push(unit);
                    a_rows.push(a.iter().map(|v| -v).collect());
                    e.push(-rng.gen_range(0.5..2.0));
                    up[j] = true;
                }
            }
            let r = d_rows.len();
            let d_own = DMatrix::from_fn(r, p, |k, j| d_rows[k][j]);
            let a = DMatrix::from_fn(r, n, |k, j| a_rows[k][j]);
            has_upper.push(up);
            followers.push(Follower {
                dim: p,
                cost,
                constraints: FollowerConstraints {
                    d_own,
                    d_cross: Vec::new(),
                    a,
                    e: DVector::from_vec(e),
                },
            });
        }
        // the upper corner of every follower box gives positive row activity, so c ≤ 0 is reachable
        let shared = SharedRows {
            b: DMatrix::zeros(shared_rows, n),
            e: dims.iter().map(|&p| uniform_mat(&mut rng, shared_rows, p, 0.2, 1.0)).collect(),
            c: uniform_vec(&mut rng, shared_rows, -1.0, 0.0),
        };
        let p_total: usize = dims.iter().sum();
        let mut cost_h = QuadForm {
            hessian: random_pd(&mut rng, n + p_total, 0.1),
            linear: uniform_vec(&mut rng, n + p_total, -1.0, 1.0),
            constant: 0.0,
        };
        // McCormick relaxations need every product partner boxed
        if shape.bilinear && has_upper.iter().flatten().all(|&b| b) {
            let mut off = n;
            for up in &has_upper {
                for (j, &bounded) in up.iter().enumerate() {
                    if bounded {
                        cost_h.add_product(0, off + j, rng.gen_range(-2.0..2.0));
                    }
                }
                off += up.len();
            }
        }
        leaders.push(LeaderSpec {
            n,
            g_rows,
            x_bounds: BoxBounds::new(lower, upper),
            cost_g: w.clone(),
            cost_h,
            followers,
            shared,
        });
    }
    HierarchicalGame {
        version: SCHEMA_VERSION,
        instance_id: format!("random-{seed}"),
        seed: Some(seed),
        mode: EquilibriumMode::Variational,
        leaders,
        potential_w: Some(w),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_games_are_valid_and_within_budget() {
        for seed in 0..40 {
            let g = random_game(seed, &RandomShape::tiny());
            let rep = validate_game(&g);
            assert!(rep.is_valid(), "seed {seed}: {:?}", rep.issues);
            let l = &g.leaders[0];
            let pairs: usize = l.followers.iter().map(|f| f.constraints.rows()).sum::<usize>() + l.shared.rows();
            assert!(pairs <= 12);
            assert!(l.num_followers() <= 3 && l.followers.iter().all(|f| f.dim <= 2));
        }
        let shape = RandomShape {
            leaders: 3,
            bilinear: true,
            ..RandomShape::tiny()
        };
        for seed in 0..10 {
            assert!(validate_game(&random_game(seed, &shape)).is_valid());
        }
    }

    #[test]
    fn random_game_is_deterministic() {
        assert_eq!(random_game(9, &RandomShape::tiny()), random_game(9, &RandomShape::tiny()));
    }
}
