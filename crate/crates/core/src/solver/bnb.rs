use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use super::local::local_descent;
use super::mccormick::{envelope_rows, fbbt, Interval, Tightening};
use super::qp::{solve_qp, LinearRows, QpError, QpOptions, QpProblem};
use super::{MiqpProblem, NodeLogEntry, SolveReport, SolveStatus, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::is_psd;

const FBBT_PASSES: usize = 8;

struct Node {
    id: usize,
    depth: usize,
    bound: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    start: Option<DVector<f64>>,
}

// Best bound first; ties go to the deeper node, then to the newer one.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

/// Convex relaxation data for an indefinite objective.
struct Relaxation {
    /// `(a, b, H_ab)` for every nonzero off-diagonal entry with `a < b`.
    pairs: Vec<(usize, usize, f64)>,
    /// `(a, H_aa)` for negative diagonal entries.
    concave: Vec<(usize, f64)>,
    hessian: DMatrix<f64>,
    eq: LinearRows,
    ge: LinearRows,
}

impl Relaxation {
    fn new(p: &MiqpProblem) -> Self {
        let h = &p.objective.hessian;
        let n = h.nrows();
        let scale = h.amax().max(1.0);
        let mut pairs = Vec::new();
        let mut concave = Vec::new();
        for a in 0..n {
            if h[(a, a)] < -1e-14 * scale {
                concave.push((a, h[(a, a)]));
            }
            for b in a + 1..n {
                let hab = 0.5 * (h[(a, b)] + h[(b, a)]);
                if hab != 0.0 {
                    pairs.push((a, b, hab));
                }
            }
        }
        let m = pairs.len();
        let mut hessian = DMatrix::zeros(n + m, n + m);
        for a in 0..n {
            hessian[(a, a)] = h[(a, a)].max(0.0);
        }
        Relaxation {
            eq: p.eq.widened(n + m),
            ge: p.ge.widened(n + m),
            pairs,
            concave,
            hessian,
        }
    }

    fn involved(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .pairs
            .iter()
            .flat_map(|&(a, b, _)| [a, b])
            .chain(self.concave.iter().map(|&(a, _)| a))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

struct Search<'a> {
    p: &'a MiqpProblem,
    cfg: &'a SolverConfig,
    relax: Option<Relaxation>,
    qp_opts: QpOptions,
    incumbent: Option<(DVector<f64>, f64)>,
}

enum NodeSolve {
    Infeasible,
    Solved { x: DVector<f64>, value: f64 },
}

impl<'a> Search<'a> {
    fn inc_value(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, |(_, f)| *f)
    }

    fn offer(&mut self, v: DVector<f64>) {
        if self.p.max_violation(&v) > self.cfg.feas_tol {
            return;
        }
        let f = self.p.objective.eval(&v);
        if f < self.inc_value() {
            self.incumbent = Some((v, f));
        }
    }

    fn solve_relaxation(&self, lo: &[f64], hi: &[f64], start: Option<&DVector<f64>>) -> Result<NodeSolve> {
        let p = self.p;
        let obj = &p.objective;
        let res = match &self.relax {
            None => {
                let prob = QpProblem {
                    hessian: &obj.hessian,
                    linear: &obj.linear,
                    eq: &p.eq,
                    ge: &p.ge,
                    lower: lo,
                    upper: hi,
                };
                solve_qp(&prob, start, &self.qp_opts).map(|s| (s.x, s.value + obj.constant))
            }
            Some(r) => {
                let n = p.dim();
                let m = r.pairs.len();
                let mut lin = DVector::zeros(n + m);
                lin.rows_mut(0, n).copy_from(&obj.linear);
                let mut constant = obj.constant;
                for &(a, haa) in &r.concave {
                    // ½H_aa v² ≥ ½H_aa((lo+hi)v − lo·hi)
                    lin[a] += 0.5 * haa * (lo[a] + hi[a]);
                    constant -= 0.5 * haa * lo[a] * hi[a];
                }
                let mut rows = Vec::with_capacity(4 * m);
                let mut wlo = Vec::with_capacity(n + m);
                let mut whi = Vec::with_capacity(n + m);
                wlo.extend_from_slice(lo);
                whi.extend_from_slice(hi);
                for (k, &(a, b, hab)) in r.pairs.iter().enumerate() {
                    lin[n + k] = hab;
                    let (ia, ib) = (Interval::new(lo[a], hi[a]), Interval::new(lo[b], hi[b]));
                    for (ca, cb, cw, rhs) in envelope_rows(ia, ib) {
                        let mut row = vec![0.0; n + m];
                        row[a] += ca;
                        row[b] += cb;
                        row[n + k] = cw;
                        rows.push((row, rhs));
                    }
                    let corners = [lo[a] * lo[b], lo[a] * hi[b], hi[a] * lo[b], hi[a] * hi[b]];
                    wlo.push(corners.iter().copied().fold(f64::INFINITY, f64::min));
                    whi.push(corners.iter().copied().fold(f64::NEG_INFINITY, f64::max));
                }
                let ge = r.ge.stacked(&LinearRows::from_rows(n + m, rows));
                let prob = QpProblem {
                    hessian: &r.hessian,
                    linear: &lin,
                    eq: &r.eq,
                    ge: &ge,
                    lower: &wlo,
                    upper: &whi,
                };
                let st = start.filter(|s| s.len() == n + m);
                solve_qp(&prob, st, &self.qp_opts).map(|s| (s.x, s.value + constant))
            }
        };
        match res {
            Ok((x, value)) => Ok(NodeSolve::Solved { x, value }),
            Err(QpError::Infeasible(_)) => Ok(NodeSolve::Infeasible),
            Err(QpError::Unbounded) => Err(Error::Unbounded("MIQP relaxation is unbounded below".into())),
            Err(e) => Err(Error::Solver(e.to_string())),
        }
    }

    /// Solve with every binary pinned by `lo == hi`: exactly when convex, locally otherwise.
    fn leaf(&mut self, lo: &[f64], hi: &[f64], start: &DVector<f64>) {
        if self.relax.is_none() {
            let obj = &self.p.objective;
            let prob = QpProblem {
                hessian: &obj.hessian,
                linear: &obj.linear,
                eq: &self.p.eq,
                ge: &self.p.ge,
                lower: lo,
                upper: hi,
            };
            if let Ok(s) = solve_qp(&prob, Some(start), &self.qp_opts) {
                self.offer(s.x);
            }
        } else if let Some((v, _)) = local_descent(self.p, lo, hi, start) {
            self.offer(v);
        }
    }

    fn pinned_box(&self, v: &DVector<f64>, lo: &[f64], hi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut lo = lo.to_vec();
        let mut hi = hi.to_vec();
        for &j in &self.p.binaries {
            let r = v[j].round().clamp(lo[j], hi[j]);
            lo[j] = r;
            hi[j] = r;
        }
        (lo, hi)
    }

    /// Tighten a child box; `false` if it is empty.
    fn tighten(&self, lo: &mut [f64], hi: &mut [f64]) -> bool {
        if self.relax.is_some()
            && fbbt(&self.p.ge, &self.p.eq, lo, hi, FBBT_PASSES) == Tightening::Infeasible
        {
            return false;
        }
        let tol = self.cfg.int_tol;
        for &j in &self.p.binaries {
            lo[j] = (lo[j] - tol).ceil().max(0.0);
            hi[j] = (hi[j] + tol).floor().min(1.0);
            if lo[j] > hi[j] {
                return false;
            }
        }
        true
    }
}

/// Best-bound branch and bound; see the module docs.
pub fn solve(p: &MiqpProblem, cfg: &SolverConfig) -> Result<SolveReport> {
    let clock = Instant::now();
    p.check()?;
    cfg.check()?;
    let n = p.dim();
    let convex = is_psd(&p.objective.hessian, 1e-10);
    let mut search = Search {
        p,
        cfg,
        relax: (!convex).then(|| Relaxation::new(p)),
        qp_opts: QpOptions {
            feas_tol: (cfg.feas_tol * 1e-2).min(1e-9),
            ..QpOptions::default()
        },
        incumbent: None,
    };
    let mut report = SolveReport {
        status: SolveStatus::Infeasible,
        incumbent: None,
        value: f64::INFINITY,
        bound: f64::INFINITY,
        gap: 0.0,
        nodes: 0,
        wall_time: 0.0,
        heuristic_leaf: false,
        node_log: Vec::new(),
    };

    let mut lower = p.lower.clone();
    let mut upper = p.upper.clone();
    let root_ok = search.tighten(&mut lower, &mut upper);
    if let Some(r) = &search.relax {
        if root_ok {
            if let Some(&j) = r
                .involved()
                .iter()
                .find(|&&j| !(lower[j].is_finite() && upper[j].is_finite()))
            {
                return Err(Error::UnboundedBilinear(j));
            }
        }
    }
    if !root_ok {
        report.wall_time = clock.elapsed().as_secs_f64();
        return Ok(report);
    }

    if let Some(ws) = cfg.warm_start.as_ref().filter(|w| w.len() == n) {
        if p.max_violation(ws) <= cfg.feas_tol {
            search.offer(ws.clone());
        } else {
            let (lo, hi) = search.pinned_box(ws, &lower, &upper);
            search.leaf(&lo, &hi, ws);
        }
    }

    let mut heap = BinaryHeap::new();
    let mut next_id = 0;
    heap.push(Node {
        id: next_id,
        depth: 0,
        bound: f64::NEG_INFINITY,
        lower: lower.clone(),
        upper: upper.clone(),
        start: None,
    });
    next_id += 1;
    let mut pruned_min = f64::INFINITY;
    let mut unresolved_min = f64::INFINITY;
    let mut hit_limit = false;

    while let Some(node) = heap.pop() {
        if node.bound >= search.inc_value() - cfg.gap_tol {
            pruned_min = pruned_min.min(node.bound);
            break;
        }
        if report.nodes >= cfg.node_limit {
            hit_limit = true;
            heap.push(node);
            break;
        }
        report.nodes += 1;
        let (x, value) = match search.solve_relaxation(&node.lower, &node.upper, node.start.as_ref())? {
            NodeSolve::Infeasible => continue,
            NodeSolve::Solved { x, value } => (x, value),
        };
        let bound = value.max(node.bound);
        if cfg.log_nodes {
            report.node_log.push(NodeLogEntry {
                node: node.id,
                bound,
                incumbent: search.inc_value(),
            });
        }
        let v = x.rows(0, n).into_owned();
        if node.id == 0 && !p.binaries.is_empty() {
            let (lo, hi) = search.pinned_box(&v, &lower, &upper);
            search.leaf(&lo, &hi, &v);
        }
        if bound >= search.inc_value() - cfg.gap_tol {
            pruned_min = pruned_min.min(bound);
            continue;
        }

        let mut child = |lo: Vec<f64>, hi: Vec<f64>, heap: &mut BinaryHeap<Node>, search: &Search| {
            let (mut lo, mut hi) = (lo, hi);
            if search.tighten(&mut lo, &mut hi) {
                heap.push(Node {
                    id: next_id,
                    depth: node.depth + 1,
                    bound,
                    lower: lo,
                    upper: hi,
                    start: Some(x.clone()),
                });
                next_id += 1;
            }
        };

        // most fractional binary, lowest index on ties
        let mut branch: Option<(usize, f64)> = None;
        for &j in &p.binaries {
            let frac = v[j].min(1.0 - v[j]);
            if frac > cfg.int_tol && branch.is_none_or(|(_, f)| frac > f) {
                branch = Some((j, frac));
            }
        }
        if let Some((j, _)) = branch {
            for val in [0.0, 1.0] {
                let (mut lo, mut hi) = (node.lower.clone(), node.upper.clone());
                lo[j] = val;
                hi[j] = val;
                child(lo, hi, &mut heap, &search);
            }
            continue;
        }
        if let Some(&j) = p.binaries.iter().find(|&&j| node.lower[j] < node.upper[j]) {
            if search.relax.is_none() {
                // convex: the relaxation is exact at v, so no other assignment in this box beats it
                let (lo, hi) = search.pinned_box(&v, &node.lower, &node.upper);
                child(lo, hi, &mut heap, &search);
            } else {
                // the relaxation under-estimates, so integral v says nothing about the other assignments
                for val in [0.0, 1.0] {
                    let (mut lo, mut hi) = (node.lower.clone(), node.upper.clone());
                    lo[j] = val;
                    hi[j] = val;
                    child(lo, hi, &mut heap, &search);
                }
            }
            continue;
        }

        let Some(r) = &search.relax else {
            search.offer(v);
            continue;
        };
        // all binaries pinned, nonconvex objective: pick the worst-relaxed term
        let (lo, hi) = (&node.lower, &node.upper);
        let mut worst: Option<(usize, f64)> = None;
        for (k, &(a, b, hab)) in r.pairs.iter().enumerate() {
            let gap = hab.abs() * (x[n + k] - v[a] * v[b]).abs();
            let j = if hi[a] - lo[a] >= hi[b] - lo[b] { a } else { b };
            if worst.is_none_or(|(_, g)| gap > g) {
                worst = Some((j, gap));
            }
        }
        for &(a, haa) in &r.concave {
            let sec = (lo[a] + hi[a]) * v[a] - lo[a] * hi[a];
            let gap = 0.5 * haa.abs() * (sec - v[a] * v[a]).abs();
            if worst.is_none_or(|(_, g)| gap > g) {
                worst = Some((a, gap));
            }
        }
        let (lo_root, hi_root) = search.pinned_box(&v, &lower, &upper);
        search.offer(v.clone());
        search.leaf(&lo_root, &hi_root, &v);
        if bound >= search.inc_value() - cfg.gap_tol {
            pruned_min = pruned_min.min(bound);
            continue;
        }
        let Some((j, _)) = worst else {
            continue;
        };
        let width = hi[j] - lo[j];
        if width <= 1e-9 * (1.0 + hi[j].abs()) {
            unresolved_min = unresolved_min.min(bound);
            continue;
        }
        let split = if v[j] >= lo[j] + 0.1 * width && v[j] <= hi[j] - 0.1 * width {
            v[j]
        } else {
            0.5 * (lo[j] + hi[j])
        };
        let mut left_hi = hi.clone();
        left_hi[j] = split;
        child(lo.clone(), left_hi, &mut heap, &search);
        let mut right_lo = lo.clone();
        right_lo[j] = split;
        child(right_lo, hi.clone(), &mut heap, &search);
    }

    let open_min = heap.iter().map(|nd| nd.bound).fold(f64::INFINITY, f64::min);
    report.wall_time = clock.elapsed().as_secs_f64();
    match search.incumbent {
        None => {
            report.status = if hit_limit {
                SolveStatus::NodeLimit
            } else {
                SolveStatus::Infeasible
            };
            report.bound = open_min.min(unresolved_min);
        }
        Some((v, f)) => {
            report.value = f;
            report.bound = f.min(pruned_min).min(open_min).min(unresolved_min);
            report.gap = (f - report.bound).max(0.0);
            report.status = if hit_limit {
                SolveStatus::NodeLimit
            } else if report.gap > cfg.gap_tol {
                SolveStatus::GapLimit
            } else {
                SolveStatus::Optimal
            };
            report.incumbent = Some(v);
        }
    }
    Ok(report)
}
