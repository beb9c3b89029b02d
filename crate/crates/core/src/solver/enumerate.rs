use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::local::local_descent;
use super::mccormick::{fbbt, Tightening};
use super::qp::{solve_qp, QpError, QpOptions, QpProblem};
use super::{MiqpProblem, SolveReport, SolveStatus, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::is_psd;

pub const MAX_ENUMERATION_BINARIES: usize = 20;
pub const MULTISTARTS: usize = 64;

/// Exhaustive reference solver: every binary pattern is fixed and its continuous leaf solved.
///
/// Convex leaves are solved exactly. Indefinite leaves get `MULTISTARTS` seeded local descents
/// and the report is marked `heuristic_leaf`.
pub fn solve_by_enumeration(p: &MiqpProblem, cfg: &SolverConfig) -> Result<SolveReport> {
    let clock = Instant::now();
    p.check()?;
    let nb = p.binaries.len();
    if nb > MAX_ENUMERATION_BINARIES {
        return Err(Error::TooManyBinaries(nb, MAX_ENUMERATION_BINARIES));
    }
    let convex = is_psd(&p.objective.hessian, 1e-10);
    let opts = QpOptions::default();
    let mut best: Option<(DVector<f64>, f64)> = None;
    for pattern in 0u64..(1u64 << nb) {
        let mut lo = p.lower.clone();
        let mut hi = p.upper.clone();
        let mut ok = true;
        for (k, &j) in p.binaries.iter().enumerate() {
            let b = ((pattern >> k) & 1) as f64;
            if b < lo[j] - cfg.int_tol || b > hi[j] + cfg.int_tol {
                ok = false;
            }
            lo[j] = b;
            hi[j] = b;
        }
        if !ok {
            continue;
        }
        let leaf = if convex {
            let obj = &p.objective;
            let prob = QpProblem {
                hessian: &obj.hessian,
                linear: &obj.linear,
                eq: &p.eq,
                ge: &p.ge,
                lower: &lo,
                upper: &hi,
            };
            match solve_qp(&prob, None, &opts) {
                Ok(s) => Some(s.x),
                Err(QpError::Infeasible(_)) => None,
                Err(QpError::Unbounded) => {
                    return Err(Error::Unbounded(format!("leaf {pattern:#b} is unbounded below")))
                }
                Err(e) => return Err(Error::Solver(e.to_string())),
            }
        } else {
            multistart(p, lo, hi, pattern)
        };
        if let Some(v) = leaf {
            let f = p.objective.eval(&v);
            if best.as_ref().is_none_or(|(_, b)| f < *b) {
                best = Some((v, f));
            }
        }
    }
    let mut report = SolveReport {
        status: SolveStatus::Infeasible,
        incumbent: None,
        value: f64::INFINITY,
        bound: f64::INFINITY,
        gap: 0.0,
        nodes: 1usize << nb,
        wall_time: 0.0,
        heuristic_leaf: !convex,
        node_log: Vec::new(),
    };
    if let Some((v, f)) = best {
        report.status = SolveStatus::Optimal;
        report.value = f;
        report.bound = f;
        report.incumbent = Some(v);
    }
    report.wall_time = clock.elapsed().as_secs_f64();
    Ok(report)
}

fn multistart(p: &MiqpProblem, mut lo: Vec<f64>, mut hi: Vec<f64>, pattern: u64) -> Option<DVector<f64>> {
    if fbbt(&p.ge, &p.eq, &mut lo, &mut hi, 20) == Tightening::Infeasible {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(pattern);
    let mut best: Option<(DVector<f64>, f64)> = None;
    for _ in 0..MULTISTARTS {
        let start = DVector::from_fn(lo.len(), |j, _| match (lo[j].is_finite(), hi[j].is_finite()) {
            (true, true) if hi[j] > lo[j] => rng.gen_range(lo[j]..=hi[j]),
            (true, true) => lo[j],
            (true, false) => lo[j] + rng.gen_range(0.0..10.0),
            (false, true) => hi[j] - rng.gen_range(0.0..10.0),
            (false, false) => rng.gen_range(-10.0..10.0),
        });
        match local_descent(p, &lo, &hi, &start) {
            Some((v, f)) => {
                if best.as_ref().is_none_or(|(_, b)| f < *b) {
                    best = Some((v, f));
                }
            }
            // the leaf's polyhedron is empty; no start will do better
            None if best.is_none() => return None,
            None => {}
        }
    }
    best.map(|(v, _)| v)
}
