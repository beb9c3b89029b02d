//! Two-layer extra-gradient baseline.
//!
//! Each outer iteration runs `inner_iters` extra-gradient steps on the leaders' game with
//! followers frozen, then `inner_iters` steps on every leader's followers' game with leaders
//! frozen. Nothing couples the two layers, which is why the scheme can oscillate.

use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{joint_cost, leader_gradient, pseudogradient, HierarchicalGame, LeaderBlock, LeaderSpec, PopulationState};
use crate::pgs::{cost_to_move, potential_or_nan, Icrf, RunStatus, SweepRecord, Trajectory};
use crate::solver::qp::{LinearRows, QpError};
use crate::solver::project_polyhedron;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EgConfig {
    pub alpha: f64,
    pub inner_iters: usize,
    pub outer_iters: usize,
    pub stop_eps: f64,
    /// Measure used for the cost-to-move column, so trajectories compare with pgs.
    pub icrf: Icrf,
}

impl Default for EgConfig {
    fn default() -> Self {
        EgConfig {
            alpha: 0.01,
            inner_iters: 200,
            outer_iters: 100,
            stop_eps: 1e-6,
            icrf: Icrf::SquaredEuclidean,
        }
    }
}

fn projection_error(what: String, e: QpError) -> Error {
    match e {
        QpError::Infeasible(v) => Error::Infeasible(format!("{what}: projection target set is empty (violation {v:.3e})")),
        other => Error::Solver(format!("{what}: projection failed: {other}")),
    }
}

fn project_leader(l: &LeaderSpec, i: usize, v: &DVector<f64>) -> Result<DVector<f64>> {
    let ge = l.g_rows.as_ge_rows();
    project_polyhedron(&LinearRows::empty(l.n), &ge, &l.x_bounds.lower, &l.x_bounds.upper, v)
        .map(|s| s.x)
        .map_err(|e| projection_error(format!("leader {} decision set", i + 1), e))
}

fn project_followers(l: &LeaderSpec, i: usize, x: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    let p = l.follower_dim();
    let ge = l.follower_polyhedron(x);
    let lo = vec![f64::NEG_INFINITY; p];
    let hi = vec![f64::INFINITY; p];
    project_polyhedron(&LinearRows::empty(p), &ge, &lo, &hi, v)
        .map(|s| s.x)
        .map_err(|e| projection_error(format!("followers of leader {}", i + 1), e))
}

fn split(l: &LeaderSpec, y: &DVector<f64>) -> Vec<DVector<f64>> {
    l.y_offsets()
        .iter()
        .zip(&l.followers)
        .map(|(&o, f)| y.rows(o, f.dim).into_owned())
        .collect()
}

fn leaders_operator(g: &HierarchicalGame, x_all: &[DVector<f64>], y_frozen: &[Vec<DVector<f64>>]) -> Result<Vec<DVector<f64>>> {
    (0..x_all.len()).map(|i| leader_gradient(g, i, x_all, &y_frozen[i])).collect()
}

/// One extra-gradient step on the leaders' pseudogradient with followers frozen.
pub fn leaders_eg_step(
    g: &HierarchicalGame,
    x_all: &[DVector<f64>],
    y_frozen: &[Vec<DVector<f64>>],
    alpha: f64,
) -> Result<Vec<DVector<f64>>> {
    if x_all.len() != g.num_leaders() || y_frozen.len() != g.num_leaders() {
        return Err(Error::Dimension("leader decisions do not match the game".into()));
    }
    let v = leaders_operator(g, x_all, y_frozen)?;
    let predictor = g
        .leaders
        .iter()
        .enumerate()
        .map(|(i, l)| project_leader(l, i, &(&x_all[i] - &v[i] * alpha)))
        .collect::<Result<Vec<_>>>()?;
    let vp = leaders_operator(g, &predictor, y_frozen)?;
    g.leaders
        .iter()
        .enumerate()
        .map(|(i, l)| project_leader(l, i, &(&x_all[i] - &vp[i] * alpha)))
        .collect()
}

/// One extra-gradient step on leader `i`'s followers, projected jointly onto `Ω^i(x)`.
pub fn followers_eg_step(
    g: &HierarchicalGame,
    i: usize,
    x_frozen: &DVector<f64>,
    y_all: &[DVector<f64>],
    alpha: f64,
) -> Result<Vec<DVector<f64>>> {
    let l = g.leader(i)?;
    let y: DVector<f64> = DVector::from_iterator(l.follower_dim(), y_all.iter().flat_map(|v| v.iter().copied()));
    let v = pseudogradient(g, i, x_frozen, y_all)?;
    let predictor = project_followers(l, i, x_frozen, &(&y - &v * alpha))?;
    let vp = pseudogradient(g, i, x_frozen, &split(l, &predictor))?;
    let next = project_followers(l, i, x_frozen, &(&y - &vp * alpha))?;
    Ok(split(l, &next))
}

#[derive(Clone, Debug)]
pub struct EgOutcome {
    pub state: PopulationState,
    pub trajectory: Trajectory,
    pub status: RunStatus,
}

impl EgOutcome {
    pub fn converged(&self) -> bool {
        self.status == RunStatus::Converged
    }

    /// Whether the cost-to-move sequence ever increases.
    pub fn oscillates(&self) -> bool {
        self.trajectory
            .records
            .windows(2)
            .any(|w| w[1].cost_to_move > w[0].cost_to_move)
    }
}

/// Initial state: leader decisions at box midpoints (clamped into finite bounds), followers at
/// the projection of zero onto their feasible set.
pub fn initial_state(g: &HierarchicalGame) -> Result<PopulationState> {
    let mut z = Vec::with_capacity(g.num_leaders());
    for (i, l) in g.leaders.iter().enumerate() {
        let mid = DVector::from_fn(l.n, |a, _| {
            let (lo, hi) = (l.x_bounds.lower[a], l.x_bounds.upper[a]);
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (true, false) => lo,
                (false, true) => hi,
                (false, false) => 0.0,
            }
        });
        let x = project_leader(l, i, &mid)?;
        let y = project_followers(l, i, &x, &DVector::zeros(l.follower_dim()))?;
        let mut b = LeaderBlock::zeros(l, g.mode);
        b.y = split(l, &y);
        b.x = x;
        z.push(b);
    }
    Ok(z)
}

/// Alternate the two inner loops until the cost-to-move drops to `stop_eps` or the outer
/// budget runs out. Only `x` and `y` are updated; multipliers and binaries stay zero.
pub fn run_baseline(g: &HierarchicalGame, cfg: &EgConfig) -> Result<EgOutcome> {
    if !(cfg.alpha > 0.0) {
        return Err(Error::InvalidInput(format!("step must be positive, got {}", cfg.alpha)));
    }
    crate::model::validate_game(g).into_result()?;
    let mut z = initial_state(g)?;
    let n_lead = g.num_leaders();
    let costs = |z: &[LeaderBlock]| (0..n_lead).map(|i| joint_cost(g, i, z)).collect::<Result<Vec<_>>>();
    let mut trajectory = Trajectory {
        initial_potential: potential_or_nan(g, &z)?,
        initial_costs: costs(&z)?,
        initial_tau: cfg.alpha,
        ..Trajectory::default()
    };
    let mut status = RunStatus::SweepLimit;
    for k in 0..cfg.outer_iters {
        let clock = Instant::now();
        let prev = z.clone();
        let ys: Vec<Vec<DVector<f64>>> = z.iter().map(|b| b.y.clone()).collect();
        let mut xs: Vec<DVector<f64>> = z.iter().map(|b| b.x.clone()).collect();
        let t0 = Instant::now();
        for _ in 0..cfg.inner_iters {
            xs = leaders_eg_step(g, &xs, &ys, cfg.alpha)?;
        }
        let lead_time = t0.elapsed().as_secs_f64();
        let mut br_times = Vec::with_capacity(n_lead);
        for (i, b) in z.iter_mut().enumerate() {
            let t0 = Instant::now();
            b.x = xs[i].clone();
            let mut y = b.y.clone();
            for _ in 0..cfg.inner_iters {
                y = followers_eg_step(g, i, &b.x, &y, cfg.alpha)?;
            }
            b.y = y;
            br_times.push(t0.elapsed().as_secs_f64() + lead_time / n_lead as f64);
        }
        let d = cost_to_move(&z, &prev, cfg.icrf)?;
        trajectory.records.push(SweepRecord {
            sweep: k + 1,
            potential: potential_or_nan(g, &z)?,
            cost_to_move: d,
            tau: cfg.alpha,
            costs: costs(&z)?,
            br_times,
            time_s: clock.elapsed().as_secs_f64(),
        });
        if d <= cfg.stop_eps {
            status = RunStatus::Converged;
            break;
        }
    }
    trajectory.final_potential = potential_or_nan(g, &z)?;
    trajectory.final_tau = cfg.alpha;
    Ok(EgOutcome {
        state: z,
        trajectory,
        status,
    })
}
