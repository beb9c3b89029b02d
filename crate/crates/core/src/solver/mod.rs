//! Global solver for mixed-binary quadratic programs at desk scale.
//!
//! `solve` runs best-bound branch and bound over the binaries; nonconvex objectives are
//! relaxed with McCormick envelopes (off-diagonal products) and secants (concave squares)
//! and refined by spatial branching. `solve_by_enumeration` is the exhaustive reference.

mod bnb;
mod enumerate;
mod local;
pub mod mccormick;
pub mod qp;

use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::QuadForm;
use crate::reformulate::MIEncoding;
use qp::LinearRows;

pub use bnb::solve;
pub use enumerate::{solve_by_enumeration, MAX_ENUMERATION_BINARIES, MULTISTARTS};
pub use local::local_descent;
pub use qp::project_polyhedron;

/// `min objective(v)` s.t. `eq·v = rhs`, `ge·v ≥ rhs`, `lower ≤ v ≤ upper`, `v_j ∈ {0,1}` for `j ∈ binaries`.
#[derive(Clone, Debug)]
pub struct MiqpProblem {
    pub objective: QuadForm,
    pub eq: LinearRows,
    pub ge: LinearRows,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub binaries: Vec<usize>,
}

impl MiqpProblem {
    /// The encoding's rows with a caller-supplied objective over the same flat vector.
    pub fn from_encoding(enc: &MIEncoding, objective: QuadForm) -> Self {
        MiqpProblem {
            objective,
            eq: enc.eq_rows.clone(),
            ge: enc.ge_rows.clone(),
            lower: enc.lower.clone(),
            upper: enc.upper.clone(),
            binaries: enc.binary_idx.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    fn check(&self) -> Result<()> {
        let n = self.dim();
        let ok = self.upper.len() == n
            && self.objective.dim() == n
            && self.objective.hessian.shape() == (n, n)
            && self.eq.ncols() == n
            && self.ge.ncols() == n
            && self.binaries.iter().all(|&j| j < n);
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension("MIQP data have inconsistent dimensions".into()))
        }
    }

    /// Largest row or bound violation at `v`, including binary integrality.
    pub fn max_violation(&self, v: &DVector<f64>) -> f64 {
        let mut r: f64 = 0.0;
        if !self.eq.is_empty() {
            r = r.max((&self.eq.matrix * v - &self.eq.rhs).amax());
        }
        if !self.ge.is_empty() {
            let sl = &self.ge.matrix * v - &self.ge.rhs;
            r = r.max(sl.iter().fold(0.0, |m, &s| m.max(-s)));
        }
        for j in 0..v.len() {
            r = r.max(self.lower[j] - v[j]).max(v[j] - self.upper[j]);
        }
        for &j in &self.binaries {
            r = r.max(v[j].min(1.0 - v[j]).max(0.0));
        }
        r
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    pub feas_tol: f64,
    /// Absolute optimality gap on the objective.
    pub gap_tol: f64,
    pub int_tol: f64,
    pub node_limit: usize,
    #[serde(skip)]
    pub warm_start: Option<DVector<f64>>,
    pub log_nodes: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            feas_tol: 1e-7,
            gap_tol: 1e-6,
            int_tol: 1e-6,
            node_limit: 200_000,
            warm_start: None,
            log_nodes: false,
        }
    }
}

impl SolverConfig {
    fn check(&self) -> Result<()> {
        if self.feas_tol > 0.0 && self.gap_tol > 0.0 && self.int_tol > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidInput("solver tolerances must be positive".into()))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    /// Search finished but spatial branching could not close the gap below `gap_tol`.
    GapLimit,
    NodeLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeLogEntry {
    pub node: usize,
    pub bound: f64,
    pub incumbent: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    #[serde(skip)]
    pub incumbent: Option<DVector<f64>>,
    /// Objective at the incumbent (`+inf` without one).
    pub value: f64,
    /// Best proven lower bound.
    pub bound: f64,
    /// `value − bound`, absolute.
    pub gap: f64,
    pub nodes: usize,
    pub wall_time: f64,
    /// Some leaf was solved by local multistart rather than exactly.
    pub heuristic_leaf: bool,
    #[serde(skip)]
    pub node_log: Vec<NodeLogEntry>,
}

impl SolveReport {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Node log as CSV text (`node,bound,incumbent`).
    pub fn write_node_log<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "node,bound,incumbent")?;
        for e in &self.node_log {
            writeln!(w, "{},{},{}", e.node, e.bound, e.incumbent)?;
        }
        Ok(())
    }
}

/// Solve the encoding's program with the given objective.
pub fn solve_encoding(enc: &MIEncoding, objective: QuadForm, cfg: &SolverConfig) -> Result<SolveReport> {
    solve(&MiqpProblem::from_encoding(enc, objective), cfg)
}

#[cfg(test)]
mod tests;
