//! Proximal Gauss–Seidel best-response dynamics over the leaders' mixed-integer game.
//!
//! Each sweep visits leaders in index order; leader `i` replaces its block by a global
//! minimiser of `J^i(·, ẑ^{−i}) + τ ρ(· − z^i)` over its big-M encoding, where `ẑ` already
//! holds the blocks updated earlier in the sweep. `τ` follows
//! `τ(k+1) = max{ωτ(k), min{τ(k), d}}` with `d` the cost-to-move of the sweep.

use std::io::Write;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{joint_cost, potential, HierarchicalGame, LeaderBlock, PopulationState, QuadForm};
use crate::reformulate::{
    audit_big_m, build_encoding, extract_block, kkt_residual, AuditReport, BigMPolicy, KktResidual,
    MIEncoding,
};
use crate::solver::{solve_encoding, SolveReport, SolveStatus, SolverConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Icrf {
    /// `ρ(v) = ‖v‖²`.
    #[default]
    SquaredEuclidean,
    /// `ρ(v) = ‖v‖`, solved as `‖v‖² / max(‖v_prev‖, floor)` with `v_prev` the leader's last step.
    EuclideanApprox,
}

impl std::str::FromStr for Icrf {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "squared-euclidean" => Ok(Icrf::SquaredEuclidean),
            "euclidean-approx" => Ok(Icrf::EuclideanApprox),
            other => Err(format!("unknown ICRF '{other}' (expected squared-euclidean or euclidean-approx)")),
        }
    }
}

/// Smallest step length used to scale the approximate Euclidean proximal term.
pub const APPROX_STEP_FLOOR: f64 = 1e-2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitStrategy {
    /// Each leader's unregularised best response against all-zero opponents.
    #[default]
    BestResponse,
    /// Leader decisions drawn uniformly in their boxes, followers at equilibrium for them.
    RandomFeasible,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PgsConfig {
    pub tau0: f64,
    pub omega: f64,
    pub icrf: Icrf,
    pub stop_eps: f64,
    pub max_sweeps: usize,
    pub seed: u64,
    pub init: InitStrategy,
    pub big_m: f64,
    /// Largest cap reached by doubling when a solve is infeasible or flagged.
    pub max_big_m: f64,
    pub solver: SolverConfig,
    /// A sweep with cost-to-move at most `stop_eps` only ends the run once an ordered round of
    /// exact best responses finds no leader improving by more than this. Without the check a
    /// run can stall while τ still outweighs a binary flip. `None` stops on the cost-to-move alone.
    #[serde(default = "default_confirm_tol")]
    pub confirm_tol: Option<f64>,
}

fn default_confirm_tol() -> Option<f64> {
    Some(1e-5)
}

impl Default for PgsConfig {
    fn default() -> Self {
        PgsConfig {
            tau0: 1.0,
            omega: 0.1,
            icrf: Icrf::SquaredEuclidean,
            stop_eps: 1e-6,
            max_sweeps: 100,
            seed: 0,
            init: InitStrategy::BestResponse,
            big_m: 200.0,
            max_big_m: 3200.0,
            solver: SolverConfig::default(),
            confirm_tol: default_confirm_tol(),
        }
    }
}

impl PgsConfig {
    fn check(&self) -> Result<()> {
        if !(self.tau0 > 0.0) {
            return Err(Error::InvalidInput(format!("tau0 must be positive, got {}", self.tau0)));
        }
        if !(self.omega > 0.0 && self.omega < 1.0) {
            return Err(Error::InvalidInput(format!("omega must lie in (0, 1), got {}", self.omega)));
        }
        if !(self.stop_eps >= 0.0) {
            return Err(Error::InvalidInput("stop_eps must be nonnegative".into()));
        }
        if !(self.big_m > 0.0) || self.max_big_m < self.big_m {
            return Err(Error::InvalidInput("big-M must be positive and not above max_big_m".into()));
        }
        if self.confirm_tol.is_some_and(|t| !(t >= 0.0)) {
            return Err(Error::InvalidInput("confirm_tol must be nonnegative".into()));
        }
        Ok(())
    }
}

pub fn icrf_eval(kind: Icrf, dz: &DVector<f64>) -> f64 {
    match kind {
        Icrf::SquaredEuclidean => dz.norm_squared(),
        Icrf::EuclideanApprox => dz.norm(),
    }
}

/// `max_i ρ(z_next^i − z_prev^i)`.
pub fn cost_to_move(z_next: &[LeaderBlock], z_prev: &[LeaderBlock], kind: Icrf) -> Result<f64> {
    if z_next.len() != z_prev.len() {
        return Err(Error::Dimension("states have different numbers of leaders".into()));
    }
    let mut d: f64 = 0.0;
    for (a, b) in z_next.iter().zip(z_prev) {
        let (fa, fb) = (a.flatten(), b.flatten());
        if fa.len() != fb.len() {
            return Err(Error::Dimension("leader blocks have different shapes".into()));
        }
        d = d.max(icrf_eval(kind, &(fa - fb)));
    }
    Ok(d)
}

pub fn tau_update(tau: f64, omega: f64, d: f64) -> f64 {
    (omega * tau).max(tau.min(d))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    /// 1-based sweep index `k + 1`.
    pub sweep: usize,
    /// `P(z(k+1))`.
    pub potential: f64,
    /// `d_ρ(z(k+1), z(k))`.
    pub cost_to_move: f64,
    /// `τ(k)`, the value used during the sweep.
    pub tau: f64,
    /// `J^i(z(k+1))`.
    pub costs: Vec<f64>,
    /// Wall time of each leader's best response.
    pub br_times: Vec<f64>,
    pub time_s: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial_potential: f64,
    pub initial_costs: Vec<f64>,
    pub initial_tau: f64,
    pub records: Vec<SweepRecord>,
    pub final_potential: f64,
    pub final_tau: f64,
}

impl Trajectory {
    /// CSV with columns `sweep,potential,cost_to_move,tau,J_1..J_N,time_s`; row 0 is the initial state.
    pub fn write_csv<W: Write>(&self, mut w: W, header_comment: Option<&str>) -> std::io::Result<()> {
        if let Some(c) = header_comment {
            writeln!(w, "# {c}")?;
        }
        let n = self.initial_costs.len();
        let js: Vec<String> = (1..=n).map(|i| format!("J_{i}")).collect();
        writeln!(w, "sweep,potential,cost_to_move,tau,{},time_s", js.join(","))?;
        let costs = |c: &[f64]| c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        writeln!(
            w,
            "0,{},,{},{},0",
            self.initial_potential,
            self.initial_tau,
            costs(&self.initial_costs)
        )?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.sweep,
                r.potential,
                r.cost_to_move,
                r.tau,
                costs(&r.costs),
                r.time_s
            )?;
        }
        Ok(())
    }

    /// Largest potential increase between consecutive states.
    pub fn max_potential_increase(&self) -> f64 {
        let mut prev = self.initial_potential;
        let mut worst = f64::NEG_INFINITY;
        for r in &self.records {
            worst = worst.max(r.potential - prev);
            prev = r.potential;
        }
        worst
    }

    /// Checks `P(z(k+1)) ≤ P(z(k)) + slack` and `ωτ(k) ≤ τ(k+1) ≤ τ(k)` at every sweep.
    pub fn validate(&self, omega: f64, slack: f64) -> std::result::Result<(), String> {
        let mut prev_p = self.initial_potential;
        let taus: Vec<f64> = self
            .records
            .iter()
            .map(|r| r.tau)
            .chain(std::iter::once(self.final_tau))
            .collect();
        for r in &self.records {
            if r.potential > prev_p + slack {
                return Err(format!(
                    "sweep {}: potential rose from {prev_p} to {} (slack {slack})",
                    r.sweep, r.potential
                ));
            }
            prev_p = r.potential;
        }
        for (k, w) in taus.windows(2).enumerate() {
            let (t0, t1) = (w[0], w[1]);
            if t1 > t0 * (1.0 + 1e-15) || t1 < omega * t0 * (1.0 - 1e-15) {
                return Err(format!("sweep {}: tau moved from {t0} to {t1}", k + 1));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    SweepLimit,
}

/// Big-M bookkeeping across a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BigMStats {
    pub solves: usize,
    /// Solves whose first attempt was infeasible or flagged by the audit.
    pub flagged: usize,
    pub escalations: usize,
    /// Final cap per leader.
    pub caps: Vec<f64>,
}

impl BigMStats {
    pub fn flag_rate(&self) -> f64 {
        if self.solves == 0 {
            0.0
        } else {
            self.flagged as f64 / self.solves as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct PgsOutcome {
    pub state: PopulationState,
    pub trajectory: Trajectory,
    pub status: RunStatus,
    pub big_m: BigMStats,
    pub nodes: usize,
}

impl PgsOutcome {
    pub fn converged(&self) -> bool {
        self.status == RunStatus::Converged
    }

    pub fn final_cost_to_move(&self) -> Option<f64> {
        self.trajectory.records.last().map(|r| r.cost_to_move)
    }
}

/// `objective + τ·scale·‖v − center‖²`.
fn proximal_objective(base: &QuadForm, center: &DVector<f64>, weight: f64) -> QuadForm {
    let n = center.len();
    let mut obj = base.clone();
    if weight > 0.0 {
        obj.hessian += DMatrix::identity(n, n) * (2.0 * weight);
        obj.linear -= center * (2.0 * weight);
        obj.constant += weight * center.norm_squared();
    }
    obj
}

struct BestResponse {
    block: LeaderBlock,
    report: SolveReport,
    flagged: bool,
    escalations: usize,
}

/// Solve leader `i`'s subproblem, doubling its big-M cap while the solve is infeasible or
/// the audit flags the solution.
#[allow(clippy::too_many_arguments)]
fn best_response(
    g: &HierarchicalGame,
    i: usize,
    x_all: &[DVector<f64>],
    objective: impl Fn(&MIEncoding) -> QuadForm,
    warm: Option<&LeaderBlock>,
    cap: &mut f64,
    max_cap: f64,
    solver: &SolverConfig,
) -> Result<BestResponse> {
    let mut flagged = false;
    let mut escalations = 0;
    loop {
        let enc = build_encoding(g, i, x_all, &BigMPolicy::uniform(*cap)).map_err(|e| e.for_leader(i))?;
        let mut cfg = solver.clone();
        cfg.warm_start = warm.map(|b| b.flatten()).filter(|v| v.len() == enc.num_vars());
        let rep = solve_encoding(&enc, objective(&enc), &cfg).map_err(|e| e.for_leader(i))?;
        let clean = match &rep.incumbent {
            Some(v) => audit_big_m(&enc, v).is_clean(),
            None => false,
        };
        if clean || *cap * 2.0 > max_cap {
            let Some(v) = rep.incumbent.as_ref() else {
                let msg = if rep.status == SolveStatus::Infeasible {
                    format!("best-response subproblem is infeasible even with big-M {cap}")
                } else {
                    format!("best-response solve stopped with status {:?} and no incumbent", rep.status)
                };
                return Err(Error::Infeasible(msg).for_leader(i));
            };
            let block = extract_block(&enc, v)?;
            return Ok(BestResponse {
                block,
                report: rep,
                flagged,
                escalations,
            });
        }
        flagged = true;
        escalations += 1;
        *cap *= 2.0;
    }
}

/// `P(z)`, or NaN when the game carries no potential.
pub fn potential_or_nan(g: &HierarchicalGame, z: &[LeaderBlock]) -> Result<f64> {
    match potential(g, z) {
        Err(Error::MissingPotential) => Ok(f64::NAN),
        other => other,
    }
}

fn leader_xs(z: &[LeaderBlock]) -> Vec<DVector<f64>> {
    z.iter().map(|b| b.x.clone()).collect()
}

fn costs(g: &HierarchicalGame, z: &[LeaderBlock]) -> Result<Vec<f64>> {
    (0..z.len()).map(|i| joint_cost(g, i, z)).collect()
}

/// Initial feasible state per `cfg.init`.
pub fn initial_state(g: &HierarchicalGame, cfg: &PgsConfig, caps: &mut [f64], stats: &mut BigMStats) -> Result<PopulationState> {
    let zeros: Vec<DVector<f64>> = g.leaders.iter().map(|l| DVector::zeros(l.n)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut z = Vec::with_capacity(g.num_leaders());
    for (i, l) in g.leaders.iter().enumerate() {
        let br = match cfg.init {
            InitStrategy::BestResponse => best_response(
                g,
                i,
                &zeros,
                |enc| enc.objective.clone(),
                None,
                &mut caps[i],
                cfg.max_big_m,
                &cfg.solver,
            )?,
            InitStrategy::RandomFeasible => {
                let target: Vec<f64> = (0..l.n)
                    .map(|a| {
                        let (lo, hi) = (l.x_bounds.lower[a], l.x_bounds.upper[a]);
                        match (lo.is_finite(), hi.is_finite()) {
                            (true, true) => rng.gen_range(lo..=hi),
                            (true, false) => lo + rng.gen_range(0.0..1.0),
                            (false, true) => hi - rng.gen_range(0.0..1.0),
                            (false, false) => rng.gen_range(-1.0..1.0),
                        }
                    })
                    .collect();
                best_response(
                    g,
                    i,
                    &zeros,
                    |enc| {
                        let mut q = QuadForm::zeros(enc.num_vars());
                        for (a, j) in enc.var_map.x.clone().enumerate() {
                            q.hessian[(j, j)] = 2.0;
                            q.linear[j] = -2.0 * target[a];
                            q.constant += target[a] * target[a];
                        }
                        q
                    },
                    None,
                    &mut caps[i],
                    cfg.max_big_m,
                    &cfg.solver,
                )?
            }
        };
        stats.solves += 1;
        stats.flagged += br.flagged as usize;
        stats.escalations += br.escalations;
        z.push(br.block);
    }
    Ok(z)
}

/// Run the proximal Gauss–Seidel loop from the configured initial state.
pub fn run(g: &HierarchicalGame, cfg: &PgsConfig) -> Result<PgsOutcome> {
    cfg.check()?;
    let report = crate::model::validate_game(g);
    report.into_result()?;
    let n_lead = g.num_leaders();
    let mut caps = vec![cfg.big_m; n_lead];
    let mut stats = BigMStats::default();
    let z = initial_state(g, cfg, &mut caps, &mut stats)?;
    run_from(g, cfg, z, caps, stats)
}

/// Run from a given feasible state.
pub fn run_from(
    g: &HierarchicalGame,
    cfg: &PgsConfig,
    mut z: PopulationState,
    mut caps: Vec<f64>,
    mut stats: BigMStats,
) -> Result<PgsOutcome> {
    cfg.check()?;
    let n_lead = g.num_leaders();
    if z.len() != n_lead || caps.len() != n_lead {
        return Err(Error::Dimension("initial state does not match the number of leaders".into()));
    }
    let mut tau = cfg.tau0;
    let mut trajectory = Trajectory {
        initial_potential: potential_or_nan(g, &z)?,
        initial_costs: costs(g, &z)?,
        initial_tau: tau,
        ..Trajectory::default()
    };
    let mut status = RunStatus::SweepLimit;
    let mut nodes = 0;
    let mut last_step = vec![0.0f64; n_lead];
    let mut have_step = vec![false; n_lead];

    for k in 0..cfg.max_sweeps {
        let clock = Instant::now();
        // ẑ^1(k) = z(k)
        let z_prev = z.clone();
        let mut br_times = Vec::with_capacity(n_lead);
        for i in 0..n_lead {
            let t0 = Instant::now();
            let x_all = leader_xs(&z);
            let center = z[i].flatten();
            let weight = match cfg.icrf {
                Icrf::SquaredEuclidean => tau,
                Icrf::EuclideanApprox if have_step[i] => tau / last_step[i].max(APPROX_STEP_FLOOR),
                Icrf::EuclideanApprox => tau,
            };
            let br = best_response(
                g,
                i,
                &x_all,
                |enc| proximal_objective(&enc.objective, &center, weight),
                Some(&z[i]),
                &mut caps[i],
                cfg.max_big_m,
                &cfg.solver,
            )?;
            stats.solves += 1;
            stats.flagged += br.flagged as usize;
            stats.escalations += br.escalations;
            nodes += br.report.nodes;
            last_step[i] = (br.block.flatten() - &center).norm();
            have_step[i] = true;
            // ẑ^{i+1}(k) = (z^i(k+1), ẑ^{−i}(k))
            z[i] = br.block;
            br_times.push(t0.elapsed().as_secs_f64());
        }
        // ẑ^{N+1}(k) = z(k+1)
        let d = cost_to_move(&z, &z_prev, cfg.icrf)?;
        trajectory.records.push(SweepRecord {
            sweep: k + 1,
            potential: potential_or_nan(g, &z)?,
            cost_to_move: d,
            tau,
            costs: costs(g, &z)?,
            br_times,
            time_s: clock.elapsed().as_secs_f64(),
        });
        tau = tau_update(tau, cfg.omega, d);
        if (d <= cfg.stop_eps || z == z_prev) && fixed_point_confirmed(g, cfg, &z)? {
            status = RunStatus::Converged;
            break;
        }
    }
    trajectory.final_potential = potential_or_nan(g, &z)?;
    trajectory.final_tau = tau;
    stats.caps = caps;
    Ok(PgsOutcome {
        state: z,
        trajectory,
        status,
        big_m: stats,
        nodes,
    })
}

fn fixed_point_confirmed(g: &HierarchicalGame, cfg: &PgsConfig, z: &[LeaderBlock]) -> Result<bool> {
    let Some(tol) = cfg.confirm_tol else {
        return Ok(true);
    };
    let vcfg = VerifyConfig {
        tol,
        big_m: cfg.big_m,
        max_big_m: cfg.max_big_m,
        solver: cfg.solver.clone(),
        ..VerifyConfig::default()
    };
    let rep = verify_equilibrium(g, z, &vcfg)?;
    Ok(rep.leaders.iter().all(|l| l.improvement <= tol))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub tol: f64,
    pub kkt_tol: f64,
    pub big_m: f64,
    pub max_big_m: f64,
    pub solver: SolverConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            tol: 1e-5,
            kkt_tol: 1e-6,
            big_m: 200.0,
            max_big_m: 3200.0,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeaderCheck {
    pub leader: usize,
    pub cost: f64,
    pub best_response_cost: f64,
    /// `J^i(z) − J^i(best response)`.
    pub improvement: f64,
    pub solver_status: SolveStatus,
    /// Largest violation of the leader's own box and `G` rows.
    pub leader_infeasibility: f64,
    pub kkt: KktResidual,
    /// Big-M cap the best-response solve ended with; the audit uses the same cap.
    pub big_m: f64,
    pub audit: AuditReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub certified: bool,
    pub tol: f64,
    pub leaders: Vec<LeaderCheck>,
}

impl VerifyReport {
    pub fn max_improvement(&self) -> f64 {
        self.leaders.iter().map(|l| l.improvement).fold(f64::NEG_INFINITY, f64::max)
    }

    /// 1-based indices of leaders that fail certification.
    pub fn violators(&self, kkt_tol: f64) -> Vec<usize> {
        self.leaders
            .iter()
            .filter(|l| {
                l.improvement > self.tol
                    || l.kkt.max() > kkt_tol
                    || l.leader_infeasibility > kkt_tol
                    || l.solver_status != SolveStatus::Optimal
            })
            .map(|l| l.leader)
            .collect()
    }
}

/// Largest violation of `lower ≤ x ≤ upper` and `G(x) ≥ 0`.
pub fn leader_infeasibility(l: &crate::model::LeaderSpec, x: &DVector<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, v) in x.iter().enumerate() {
        worst = worst.max(l.x_bounds.lower[a] - v).max(v - l.x_bounds.upper[a]);
    }
    if !l.g_rows.is_empty() {
        let r = &l.g_rows.matrix * x + &l.g_rows.offset;
        worst = worst.max(-r.min());
    }
    worst
}

/// One ordered round of unregularised best responses.
///
/// A leader whose best response improves by more than `tol` is replaced before the next
/// leader is checked, as in a literal sweep. The state is certified when no leader improves
/// by more than `tol`, every best response is solved to optimality, and every block satisfies
/// its own constraints and its followers' KKT system within `kkt_tol`.
pub fn verify_equilibrium(g: &HierarchicalGame, z: &[LeaderBlock], cfg: &VerifyConfig) -> Result<VerifyReport> {
    if z.len() != g.num_leaders() {
        return Err(Error::Dimension("state does not match the number of leaders".into()));
    }
    let mut state = z.to_vec();
    let mut leaders = Vec::with_capacity(z.len());
    for i in 0..z.len() {
        let x_all = leader_xs(&state);
        let cost = joint_cost(g, i, &state)?;
        let kkt = kkt_residual(g, i, &state[i])?;
        let mut cap = cfg.big_m;
        let br = best_response(
            g,
            i,
            &x_all,
            |enc| enc.objective.clone(),
            Some(&state[i]),
            &mut cap,
            cfg.max_big_m,
            &cfg.solver,
        )?;
        // audit the candidate at the cap its best response needed, so a run escalated for a
        // large multiplier is not flagged against the base cap
        let enc = build_encoding(g, i, &x_all, &BigMPolicy::uniform(cap)).map_err(|e| e.for_leader(i))?;
        let audit = audit_big_m(&enc, &state[i].flatten());
        let mut trial = state.clone();
        trial[i] = br.block;
        let best = joint_cost(g, i, &trial)?;
        let improvement = cost - best;
        if improvement > cfg.tol {
            state = trial;
        }
        leaders.push(LeaderCheck {
            leader: i + 1,
            cost,
            best_response_cost: best,
            improvement,
            solver_status: br.report.status,
            leader_infeasibility: leader_infeasibility(&g.leaders[i], &z[i].x),
            kkt,
            big_m: cap,
            audit,
        });
    }
    let mut rep = VerifyReport {
        certified: false,
        tol: cfg.tol,
        leaders,
    };
    rep.certified = rep.violators(cfg.kkt_tol).is_empty();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::toy_t1;
    use crate::reformulate::build_encoding;
    use crate::solver::{solve_by_enumeration, MiqpProblem};

    fn t1_block(x: f64, y: [f64; 2], delta: f64, t: f64) -> LeaderBlock {
        let g = toy_t1();
        let mut b = LeaderBlock::zeros(&g.leaders[0], g.mode);
        b.x[0] = x;
        b.y = vec![DVector::from_element(1, y[0]), DVector::from_element(1, y[1])];
        b.delta[0][0] = delta;
        b.t[0][0] = t;
        b
    }

    #[test]
    fn tau_update_examples() {
        assert!((tau_update(1.0, 0.1, 0.05) - 0.1).abs() < 1e-15);
        assert!((tau_update(0.1, 0.1, 0.5) - 0.1).abs() < 1e-15);
        assert!((tau_update(1.0, 0.1, 0.0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn cost_to_move_examples() {
        let g = toy_t1();
        let z = vec![LeaderBlock::zeros(&g.leaders[0], g.mode)];
        assert_eq!(cost_to_move(&z, &z, Icrf::SquaredEuclidean).unwrap(), 0.0);
        let mut z2 = z.clone();
        z2[0].x[0] = 1.0;
        assert_eq!(cost_to_move(&z2, &z, Icrf::SquaredEuclidean).unwrap(), 1.0);
        let two = vec![z[0].clone(), z[0].clone()];
        let mut moved = two.clone();
        moved[0].x[0] = 0.2f64.sqrt();
        moved[1].x[0] = 0.7f64.sqrt();
        assert!((cost_to_move(&moved, &two, Icrf::SquaredEuclidean).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn icrf_is_positive_definite() {
        let v = DVector::from_vec(vec![3.0, 4.0]);
        assert_eq!(icrf_eval(Icrf::SquaredEuclidean, &v), 25.0);
        assert_eq!(icrf_eval(Icrf::EuclideanApprox, &v), 5.0);
        assert_eq!(icrf_eval(Icrf::EuclideanApprox, &DVector::zeros(2)), 0.0);
    }

    #[test]
    fn t1_converges_in_one_sweep() {
        let g = toy_t1();
        let out = run(&g, &PgsConfig::default()).unwrap();
        assert!(out.converged());
        assert_eq!(out.trajectory.records.len(), 1);
        assert_eq!(out.trajectory.records[0].cost_to_move, 0.0);
        let b = &out.state[0];
        assert!((b.x[0] - 1.0).abs() < 1e-7);
        assert!(out.trajectory.final_potential.abs() < 1e-9);
        out.trajectory.validate(0.1, 1e-6).unwrap();
    }

    #[test]
    fn t1_from_random_start_reaches_optimum() {
        let g = toy_t1();
        let cfg = PgsConfig {
            init: InitStrategy::RandomFeasible,
            seed: 3,
            ..PgsConfig::default()
        };
        let out = run(&g, &cfg).unwrap();
        assert!(out.converged());
        assert!(out.trajectory.final_potential.abs() < 1e-6);
        out.trajectory.validate(cfg.omega, 1e-6).unwrap();
    }

    #[test]
    fn zero_sweeps_returns_initial_state() {
        let g = toy_t1();
        let cfg = PgsConfig {
            max_sweeps: 0,
            ..PgsConfig::default()
        };
        let out = run(&g, &cfg).unwrap();
        assert_eq!(out.status, RunStatus::SweepLimit);
        assert!(out.trajectory.records.is_empty());
    }

    fn prox_value(center: &LeaderBlock, tau: f64) -> (f64, f64) {
        let g = toy_t1();
        let enc = build_encoding(&g, 0, std::slice::from_ref(&center.x), &BigMPolicy::default()).unwrap();
        let obj = proximal_objective(&enc.objective, &center.flatten(), tau);
        let p = MiqpProblem::from_encoding(&enc, obj.clone());
        let cfg = SolverConfig::default();
        let a = crate::solver::solve(&p, &cfg).unwrap();
        let b = solve_by_enumeration(&p, &cfg).unwrap();
        assert!((a.value - b.value).abs() < 1e-6);
        (a.value, obj.eval(&center.flatten()))
    }

    #[test]
    fn proximal_best_response_interpolates() {
        let center = t1_block(0.0, [0.5, 0.5], 0.5, 1.0);
        let (v0, _) = prox_value(&center, 0.0);
        assert!(v0.abs() < 1e-9);
        let (v1, at_center) = prox_value(&center, 1.0);
        assert!((at_center - 1.25).abs() < 1e-12);
        assert!(v1 > v0 + 1e-6 && v1 < at_center - 1e-6, "{v1}");
    }

    #[test]
    fn large_tau_keeps_the_center() {
        let g = toy_t1();
        let center = t1_block(0.0, [0.5, 0.5], 0.5, 1.0);
        let mut caps = [200.0];
        let br = best_response(
            &g,
            0,
            std::slice::from_ref(&center.x),
            |enc| proximal_objective(&enc.objective, &center.flatten(), 1e6),
            Some(&center),
            &mut caps[0],
            3200.0,
            &SolverConfig::default(),
        )
        .unwrap();
        assert!((br.block.flatten() - center.flatten()).amax() < 1e-3);
    }

    #[test]
    fn verify_examples() {
        let g = toy_t1();
        let opt = t1_block(1.0, [1.0, 1.0], 0.0, 0.0);
        let rep = verify_equilibrium(&g, &[opt], &VerifyConfig::default()).unwrap();
        assert!(rep.certified);
        assert!(rep.leaders[0].improvement.abs() < 1e-9);
        let off = t1_block(0.0, [0.5, 0.5], 0.5, 1.0);
        let rep = verify_equilibrium(&g, &[off], &VerifyConfig::default()).unwrap();
        assert!(!rep.certified);
        assert!((rep.leaders[0].improvement - 1.25).abs() < 1e-7);
        assert_eq!(rep.violators(1e-6), vec![1]);
        let outside = t1_block(2.5, [2.5, 2.5], 0.0, 0.0);
        let rep = verify_equilibrium(&g, &[outside], &VerifyConfig::default()).unwrap();
        assert!((rep.leaders[0].leader_infeasibility - 0.5).abs() < 1e-12);
        assert!(!rep.certified);
    }

    #[test]
    fn trajectory_validator_catches_violations() {
        let mut t = Trajectory {
            initial_potential: 1.0,
            initial_costs: vec![1.0],
            initial_tau: 1.0,
            records: vec![SweepRecord {
                sweep: 1,
                potential: 0.5,
                cost_to_move: 0.05,
                tau: 1.0,
                costs: vec![0.5],
                br_times: vec![0.0],
                time_s: 0.0,
            }],
            final_potential: 0.5,
            final_tau: 0.1,
        };
        t.validate(0.1, 0.0).unwrap();
        t.final_tau = 0.05;
        assert!(t.validate(0.1, 0.0).is_err());
        t.final_tau = 0.1;
        t.records[0].potential = 1.1;
        assert!(t.validate(0.1, 0.0).is_err());
        let mut buf = Vec::new();
        t.write_csv(&mut buf, Some("manifest_digest=abc")).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("# manifest_digest=abc\nsweep,potential,cost_to_move,tau,J_1,time_s\n0,1,,1,1,0\n"));
    }
}
