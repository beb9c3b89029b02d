//! Single-level reformulation of one leader's problem: the followers' KKT system with
//! big-M complementarity over one flat vector `(x, y_ν.., λ_ν.., δ.., s_ν.., t..)`.
//!
//! Private rows use the convention `D_ν y_ν + A_ν x + Σ_{μ≠ν} D_νμ y_μ − e_ν ≥ 0`.
//! Each complementarity pair `0 ≤ slack ⊥ mult ≥ 0` becomes
//! `slack ≤ (1 − b)·slack_cap`, `mult ≤ b·mult_cap` with binary `b`.

use std::fmt::Write as _;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EquilibriumMode, HierarchicalGame, LeaderBlock, LeaderSpec, QuadForm};
use crate::solver::mccormick::{fbbt, row_max, Tightening};
use crate::solver::qp::LinearRows;

pub const DEFAULT_BIG_M: f64 = 200.0;

/// How big-M constants are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BigMPolicy {
    /// Cap on every multiplier (λ and δ).
    pub multiplier_cap: f64,
    /// Slack cap used when interval arithmetic cannot bound a row.
    pub fallback_slack_cap: f64,
    /// Derived slack caps are `(1 + rel_margin)·ub + abs_margin`.
    pub rel_margin: f64,
    pub abs_margin: f64,
}

impl Default for BigMPolicy {
    fn default() -> Self {
        BigMPolicy::uniform(DEFAULT_BIG_M)
    }
}

impl BigMPolicy {
    pub fn uniform(cap: f64) -> Self {
        BigMPolicy {
            multiplier_cap: cap,
            fallback_slack_cap: cap,
            rel_margin: 0.1,
            abs_margin: 1.0,
        }
    }

    fn slack_cap(&self, row_ub: f64) -> f64 {
        if row_ub.is_finite() {
            (1.0 + self.rel_margin) * row_ub.max(0.0) + self.abs_margin
        } else {
            self.fallback_slack_cap
        }
    }
}

/// Named index ranges into the flat vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarMap {
    pub x: Range<usize>,
    pub y: Vec<Range<usize>>,
    pub lambda: Vec<Range<usize>>,
    pub delta: Vec<Range<usize>>,
    pub s: Vec<Range<usize>>,
    pub t: Vec<Range<usize>>,
    pub len: usize,
}

impl VarMap {
    pub fn new(spec: &LeaderSpec, mode: EquilibriumMode) -> Self {
        let mut at = 0;
        let mut take = |k: usize| {
            let r = at..at + k;
            at += k;
            r
        };
        let copies = match mode {
            EquilibriumMode::Variational => 1,
            EquilibriumMode::Gne => spec.num_followers(),
        };
        let d = spec.shared.rows();
        let x = take(spec.n);
        let y = spec.followers.iter().map(|f| take(f.dim)).collect();
        let lambda = spec
            .followers
            .iter()
            .map(|f| take(f.constraints.rows()))
            .collect();
        let delta = (0..copies).map(|_| take(d)).collect();
        let s = spec
            .followers
            .iter()
            .map(|f| take(f.constraints.rows()))
            .collect();
        let t = (0..copies).map(|_| take(d)).collect();
        VarMap {
            x,
            y,
            lambda,
            delta,
            s,
            t,
            len: at,
        }
    }

    /// Index of the shared-row copy used by follower `ν`.
    pub fn shared_copy(&self, nu: usize) -> usize {
        if self.delta.len() == 1 {
            0
        } else {
            nu
        }
    }

    pub fn binary_indices(&self) -> Vec<usize> {
        self.s.iter().chain(&self.t).flat_map(|r| r.clone()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairKind {
    Private { follower: usize, row: usize },
    Shared { copy: usize, row: usize },
}

/// One complementarity pair with its big-M triple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Complementarity {
    pub kind: PairKind,
    /// Row of `ge_rows` holding the primal constraint `a'v ≥ rhs`; its slack is `a'v − rhs`.
    pub primal_row: usize,
    pub multiplier: usize,
    pub binary: usize,
    pub slack_cap: f64,
    pub multiplier_cap: f64,
}

/// The big-M mixed-integer program of one leader.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MIEncoding {
    pub leader: usize,
    pub mode: EquilibriumMode,
    pub var_map: VarMap,
    /// Stationarity rows, `matrix · v = rhs`.
    pub eq_rows: LinearRows,
    /// Primal feasibility, big-M caps and leader rows, `matrix · v ≥ rhs`.
    pub ge_rows: LinearRows,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub binary_idx: Vec<usize>,
    /// `J^i(·, x^{−i})` over the flat vector, opponent terms folded into the linear part and constant.
    pub objective: QuadForm,
    pub pairs: Vec<Complementarity>,
}

impl MIEncoding {
    pub fn num_vars(&self) -> usize {
        self.var_map.len
    }

    pub fn num_binaries(&self) -> usize {
        self.binary_idx.len()
    }

    /// Multiplier caps of follower `ν`'s private rows.
    pub fn lambda_caps(&self, nu: usize) -> DVector<f64> {
        self.caps_where(|k| matches!(k, PairKind::Private { follower, .. } if follower == nu), true)
    }

    /// Slack caps of follower `ν`'s private rows.
    pub fn private_slack_caps(&self, nu: usize) -> DVector<f64> {
        self.caps_where(|k| matches!(k, PairKind::Private { follower, .. } if follower == nu), false)
    }

    fn caps_where(&self, f: impl Fn(PairKind) -> bool, mult: bool) -> DVector<f64> {
        DVector::from_vec(
            self.pairs
                .iter()
                .filter(|p| f(p.kind))
                .map(|p| if mult { p.multiplier_cap } else { p.slack_cap })
                .collect(),
        )
    }

    /// Maximum violation of the encoding's rows and bounds at `v` (binaries not checked for integrality).
    pub fn max_violation(&self, v: &DVector<f64>) -> f64 {
        let mut r: f64 = 0.0;
        if !self.eq_rows.is_empty() {
            r = r.max((&self.eq_rows.matrix * v - &self.eq_rows.rhs).amax());
        }
        if !self.ge_rows.is_empty() {
            let sl = &self.ge_rows.matrix * v - &self.ge_rows.rhs;
            r = r.max(sl.iter().fold(0.0, |m, &s| m.max(-s)));
        }
        for j in 0..v.len() {
            r = r.max(self.lower[j] - v[j]).max(v[j] - self.upper[j]);
        }
        r
    }
}

struct RowBuilder {
    width: usize,
    rows: Vec<(Vec<f64>, f64)>,
}

impl RowBuilder {
    fn new(width: usize) -> Self {
        RowBuilder { width, rows: Vec::new() }
    }

    fn push(&mut self, coefs: Vec<f64>, rhs: f64) -> usize {
        self.rows.push((coefs, rhs));
        self.rows.len() - 1
    }

    fn zeros(&self) -> Vec<f64> {
        vec![0.0; self.width]
    }

    fn finish(self) -> LinearRows {
        LinearRows::from_rows(self.width, self.rows)
    }
}

fn place_row(dst: &mut [f64], at: &Range<usize>, src: impl Iterator<Item = f64>, scale: f64) {
    for (j, v) in at.clone().zip(src) {
        dst[j] += scale * v;
    }
}

/// Build the encoding of leader `i` against the leader decisions `x_all` (entry `i` is ignored).
pub fn build_encoding(
    g: &HierarchicalGame,
    i: usize,
    x_all: &[DVector<f64>],
    policy: &BigMPolicy,
) -> Result<MIEncoding> {
    if !(policy.multiplier_cap > 0.0) || !(policy.fallback_slack_cap > 0.0) {
        return Err(Error::InvalidInput(format!(
            "big-M policy yields nonpositive bounds (multiplier cap {}, slack cap {})",
            policy.multiplier_cap, policy.fallback_slack_cap
        )));
    }
    let spec = g
        .leaders
        .get(i)
        .ok_or_else(|| Error::Dimension(format!("no leader with index {i}")))?;
    let mut x_stack = x_all.to_vec();
    if x_stack.len() == g.num_leaders() {
        x_stack[i] = DVector::zeros(spec.n);
    }
    let xs = g.stack_x(&x_stack)?;
    let vm = VarMap::new(spec, g.mode);
    let nv = vm.len;
    let m_cap = policy.multiplier_cap;

    // stationarity
    let mut eq = RowBuilder::new(nv);
    for (nu, f) in spec.followers.iter().enumerate() {
        let c = &f.cost;
        let con = &f.constraints;
        let copy = vm.shared_copy(nu);
        for k in 0..f.dim {
            let mut row = eq.zeros();
            place_row(&mut row, &vm.y[nu], c.q_mat.row(k).iter().copied(), 1.0);
            place_row(&mut row, &vm.x, c.r.row(k).iter().copied(), 1.0);
            for (mu, s) in c.coupling.iter().enumerate() {
                if let (Some(s), true) = (s, mu != nu) {
                    place_row(&mut row, &vm.y[mu], s.row(k).iter().copied(), 1.0);
                }
            }
            place_row(&mut row, &vm.lambda[nu], con.d_own.column(k).iter().copied(), -1.0);
            place_row(&mut row, &vm.delta[copy], spec.shared.e[nu].column(k).iter().copied(), -1.0);
            eq.push(row, -c.q[k]);
        }
    }

    // leader rows and primal feasibility
    let mut ge = RowBuilder::new(nv);
    for k in 0..spec.g_rows.len() {
        let mut row = ge.zeros();
        place_row(&mut row, &vm.x, spec.g_rows.matrix.row(k).iter().copied(), 1.0);
        ge.push(row, -spec.g_rows.offset[k]);
    }
    let mut private_rows: Vec<Vec<usize>> = Vec::new();
    for (nu, f) in spec.followers.iter().enumerate() {
        let con = &f.constraints;
        let mut idx = Vec::new();
        for k in 0..con.rows() {
            let mut row = ge.zeros();
            place_row(&mut row, &vm.y[nu], con.d_own.row(k).iter().copied(), 1.0);
            place_row(&mut row, &vm.x, con.a.row(k).iter().copied(), 1.0);
            for (mu, dm) in con.d_cross.iter().enumerate() {
                if let (Some(dm), true) = (dm, mu != nu) {
                    place_row(&mut row, &vm.y[mu], dm.row(k).iter().copied(), 1.0);
                }
            }
            idx.push(ge.push(row, con.e[k]));
        }
        private_rows.push(idx);
    }
    let mut shared_rows = Vec::new();
    for k in 0..spec.shared.rows() {
        let mut row = ge.zeros();
        place_row(&mut row, &vm.x, spec.shared.b.row(k).iter().copied(), 1.0);
        for (mu, em) in spec.shared.e.iter().enumerate() {
            place_row(&mut row, &vm.y[mu], em.row(k).iter().copied(), 1.0);
        }
        shared_rows.push(ge.push(row, spec.shared.c[k]));
    }

    // variable bounds
    let mut lower = vec![f64::NEG_INFINITY; nv];
    let mut upper = vec![f64::INFINITY; nv];
    for (a, j) in vm.x.clone().enumerate() {
        lower[j] = spec.x_bounds.lower[a];
        upper[j] = spec.x_bounds.upper[a];
    }
    for r in vm.lambda.iter().chain(&vm.delta) {
        for j in r.clone() {
            lower[j] = 0.0;
            upper[j] = m_cap;
        }
    }
    for r in vm.s.iter().chain(&vm.t) {
        for j in r.clone() {
            lower[j] = 0.0;
            upper[j] = 1.0;
        }
    }

    // boxes on x and y implied by the primal rows; they bound the slacks below
    let primal = LinearRows::from_rows(nv, ge.rows.clone());
    if fbbt(&primal, &LinearRows::empty(nv), &mut lower, &mut upper, 20) == Tightening::Infeasible {
        return Err(Error::Infeasible(format!(
            "leader {}: primal rows are inconsistent with the bounds",
            i + 1
        )));
    }

    // big-M caps
    let mut pairs = Vec::new();
    let add_pair = |ge: &mut RowBuilder,
                        pairs: &mut Vec<Complementarity>,
                        kind: PairKind,
                        primal_row: usize,
                        mult: usize,
                        bin: usize| {
        let (coefs, rhs) = ge.rows[primal_row].clone();
        let ub = row_max(&coefs, &lower, &upper) - rhs;
        let cap = policy.slack_cap(ub);
        // slack ≤ (1 − b)·cap  ⇔  −a'v − cap·b ≥ −cap − rhs
        let mut row: Vec<f64> = coefs.iter().map(|a| -a).collect();
        row[bin] -= cap;
        ge.push(row, -cap - rhs);
        // mult ≤ b·cap
        let mut row = ge.zeros();
        row[bin] = m_cap;
        row[mult] = -1.0;
        ge.push(row, 0.0);
        pairs.push(Complementarity {
            kind,
            primal_row,
            multiplier: mult,
            binary: bin,
            slack_cap: cap,
            multiplier_cap: m_cap,
        });
    };
    for (nu, idx) in private_rows.iter().enumerate() {
        for (k, &r) in idx.iter().enumerate() {
            add_pair(
                &mut ge,
                &mut pairs,
                PairKind::Private { follower: nu, row: k },
                r,
                vm.lambda[nu].start + k,
                vm.s[nu].start + k,
            );
        }
    }
    for copy in 0..vm.delta.len() {
        for (k, &r) in shared_rows.iter().enumerate() {
            add_pair(
                &mut ge,
                &mut pairs,
                PairKind::Shared { copy, row: k },
                r,
                vm.delta[copy].start + k,
                vm.t[copy].start + k,
            );
        }
    }
    if pairs.iter().any(|p| !(p.slack_cap > 0.0)) {
        return Err(Error::InvalidInput("big-M policy yields a nonpositive slack cap".into()));
    }

    let objective = leader_objective(g, i, spec, &vm, &xs)?;
    Ok(MIEncoding {
        leader: i,
        mode: g.mode,
        binary_idx: vm.binary_indices(),
        var_map: vm,
        eq_rows: eq.finish(),
        ge_rows: ge.finish(),
        lower,
        upper,
        objective,
        pairs,
    })
}

/// `g^i(x^i, x^{−i}) + h^i(x^i, y^i)` as a quadratic form over the flat vector.
fn leader_objective(
    g: &HierarchicalGame,
    i: usize,
    spec: &LeaderSpec,
    vm: &VarMap,
    xs: &DVector<f64>,
) -> Result<QuadForm> {
    let nv = vm.len;
    let off = g.x_offsets()[i];
    let own = off..off + spec.n;
    let mut obj = QuadForm::zeros(nv);
    let cg = &spec.cost_g;
    // opponents' contribution with x^i = 0 in `xs`
    obj.constant = cg.eval(xs) + spec.cost_h.constant;
    let cross = &cg.hessian * xs;
    for (a, ja) in own.clone().zip(vm.x.clone()) {
        obj.linear[ja] += cg.linear[a] + cross[a];
        for (b, jb) in own.clone().zip(vm.x.clone()) {
            obj.hessian[(ja, jb)] += cg.hessian[(a, b)];
        }
    }
    // h over (x^i, y^i): map its coordinates to flat indices
    let mut h_idx: Vec<usize> = vm.x.clone().collect();
    for r in &vm.y {
        h_idx.extend(r.clone());
    }
    let ch = &spec.cost_h;
    if ch.dim() != h_idx.len() {
        return Err(Error::Dimension(format!(
            "leader {}: cost_h has dimension {}, expected {}",
            i + 1,
            ch.dim(),
            h_idx.len()
        )));
    }
    for (a, &ja) in h_idx.iter().enumerate() {
        obj.linear[ja] += ch.linear[a];
        for (b, &jb) in h_idx.iter().enumerate() {
            obj.hessian[(ja, jb)] += ch.hessian[(a, b)];
        }
    }
    Ok(obj)
}

/// Split a flat vector into a named block.
pub fn extract_block(enc: &MIEncoding, v: &DVector<f64>) -> Result<LeaderBlock> {
    let vm = &enc.var_map;
    if v.len() != vm.len {
        return Err(Error::Dimension(format!(
            "flat vector has length {}, encoding expects {}",
            v.len(),
            vm.len
        )));
    }
    let seg = |r: &Range<usize>| DVector::from_iterator(r.len(), r.clone().map(|j| v[j]));
    let segs = |rs: &[Range<usize>]| rs.iter().map(seg).collect::<Vec<_>>();
    Ok(LeaderBlock {
        x: seg(&vm.x),
        y: segs(&vm.y),
        lambda: segs(&vm.lambda),
        delta: segs(&vm.delta),
        s: segs(&vm.s),
        t: segs(&vm.t),
    })
}

/// Residuals of the followers' KKT system at a leader decision and candidate multipliers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KktResidual {
    pub stationarity_inf: f64,
    pub primal_inf: f64,
    pub dual_inf: f64,
    pub compl_inf: f64,
}

impl KktResidual {
    pub fn max(&self) -> f64 {
        self.stationarity_inf
            .max(self.primal_inf)
            .max(self.dual_inf)
            .max(self.compl_inf)
    }
}

/// Exact residuals of the KKT system of leader `i`'s followers at `block`.
///
/// Primal infeasibility covers the private rows, the shared rows, the leader's rows and `x` bounds.
pub fn kkt_residual(g: &HierarchicalGame, i: usize, block: &LeaderBlock) -> Result<KktResidual> {
    let spec = g
        .leaders
        .get(i)
        .ok_or_else(|| Error::Dimension(format!("no leader with index {i}")))?;
    let copies = match g.mode {
        EquilibriumMode::Variational => 1,
        EquilibriumMode::Gne => spec.num_followers(),
    };
    if block.x.len() != spec.n
        || block.y.len() != spec.num_followers()
        || block.lambda.len() != spec.num_followers()
        || block.delta.len() != copies
    {
        return Err(Error::Dimension(format!("leader {}: block shape does not match the game", i + 1)));
    }
    let x = &block.x;
    let mut res = KktResidual::default();
    let upd = |slot: &mut f64, v: f64| *slot = slot.max(v);

    let shared_slack = {
        let mut s = &spec.shared.b * x - &spec.shared.c;
        for (mu, em) in spec.shared.e.iter().enumerate() {
            s += em * &block.y[mu];
        }
        s
    };
    for (nu, f) in spec.followers.iter().enumerate() {
        let c = &f.cost;
        let con = &f.constraints;
        let copy = if copies == 1 { 0 } else { nu };
        let lam = &block.lambda[nu];
        let del = &block.delta[copy];
        let mut grad = &c.q_mat * &block.y[nu] + &c.r * x + &c.q;
        for (mu, s) in c.coupling.iter().enumerate() {
            if let (Some(s), true) = (s, mu != nu) {
                grad += s * &block.y[mu];
            }
        }
        let stat = grad - con.d_own.transpose() * lam - spec.shared.e[nu].transpose() * del;
        upd(&mut res.stationarity_inf, stat.amax());
        let mut slack = &con.d_own * &block.y[nu] + &con.a * x - &con.e;
        for (mu, dm) in con.d_cross.iter().enumerate() {
            if let (Some(dm), true) = (dm, mu != nu) {
                slack += dm * &block.y[mu];
            }
        }
        for k in 0..slack.len() {
            upd(&mut res.primal_inf, -slack[k]);
            upd(&mut res.dual_inf, -lam[k]);
            upd(&mut res.compl_inf, (slack[k] * lam[k]).abs());
        }
    }
    for del in &block.delta {
        for k in 0..shared_slack.len() {
            upd(&mut res.dual_inf, -del[k]);
            upd(&mut res.compl_inf, (shared_slack[k] * del[k]).abs());
        }
    }
    for k in 0..shared_slack.len() {
        upd(&mut res.primal_inf, -shared_slack[k]);
    }
    let grow = &spec.g_rows.matrix * x + &spec.g_rows.offset;
    for k in 0..grow.len() {
        upd(&mut res.primal_inf, -grow[k]);
    }
    for a in 0..spec.n {
        upd(&mut res.primal_inf, spec.x_bounds.lower[a] - x[a]);
        upd(&mut res.primal_inf, x[a] - spec.x_bounds.upper[a]);
    }
    Ok(res)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CapKind {
    Multiplier,
    Slack,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BigMFlag {
    pub pair: PairKind,
    pub cap_kind: CapKind,
    pub value: f64,
    pub cap: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub flags: Vec<BigMFlag>,
    /// Largest multiplier value seen.
    pub max_multiplier: f64,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.flags.is_empty()
    }
}

/// Fraction of a cap at which a value is considered to be binding on it.
pub const AUDIT_FRACTION: f64 = 0.99;

/// Flags multipliers and slacks within 1% of their big-M bound.
pub fn audit_big_m(enc: &MIEncoding, v: &DVector<f64>) -> AuditReport {
    let mut rep = AuditReport::default();
    for p in &enc.pairs {
        let m = v[p.multiplier];
        rep.max_multiplier = rep.max_multiplier.max(m);
        if m >= AUDIT_FRACTION * p.multiplier_cap {
            rep.flags.push(BigMFlag {
                pair: p.kind,
                cap_kind: CapKind::Multiplier,
                value: m,
                cap: p.multiplier_cap,
            });
        }
        let slack = enc.ge_rows.matrix.row(p.primal_row).transpose().dot(v) - enc.ge_rows.rhs[p.primal_row];
        if slack >= AUDIT_FRACTION * p.slack_cap {
            rep.flags.push(BigMFlag {
                pair: p.kind,
                cap_kind: CapKind::Slack,
                value: slack,
                cap: p.slack_cap,
            });
        }
    }
    rep
}

/// Human-readable variable names in flat order.
pub fn variable_names(enc: &MIEncoding) -> Vec<String> {
    let vm = &enc.var_map;
    let mut names = vec![String::new(); vm.len];
    for (a, j) in vm.x.clone().enumerate() {
        names[j] = format!("x_{}", a + 1);
    }
    let groups: [(&str, &Vec<Range<usize>>); 5] = [
        ("y", &vm.y),
        ("lambda", &vm.lambda),
        ("delta", &vm.delta),
        ("s", &vm.s),
        ("t", &vm.t),
    ];
    for (tag, ranges) in groups {
        for (b, r) in ranges.iter().enumerate() {
            for (a, j) in r.clone().enumerate() {
                names[j] = format!("{tag}_{}_{}", b + 1, a + 1);
            }
        }
    }
    names
}

fn lp_terms(out: &mut String, coefs: impl Iterator<Item = (usize, f64)>, names: &[String]) -> bool {
    let mut any = false;
    for (j, a) in coefs {
        if a == 0.0 {
            continue;
        }
        let sign = if a < 0.0 { "-" } else if any { "+" } else { "" };
        let _ = write!(out, " {sign} {} {}", a.abs(), names[j]);
        any = true;
    }
    any
}

/// CPLEX LP text of the encoding with its own objective, for cross-checking elsewhere.
pub fn to_lp_format(enc: &MIEncoding) -> String {
    let names = variable_names(enc);
    let obj = &enc.objective;
    let mut out = String::from("\\ leader best-response encoding\nMinimize\n obj:");
    let any = lp_terms(&mut out, obj.linear.iter().copied().enumerate(), &names);
    let h: &DMatrix<f64> = &obj.hessian;
    let mut quad = String::new();
    let n = h.nrows();
    let mut first = true;
    for a in 0..n {
        for b in a..n {
            let coef = if a == b { h[(a, a)] } else { 2.0 * h[(a, b)] };
            if coef == 0.0 {
                continue;
            }
            let sign = if coef < 0.0 { "-" } else if first { "" } else { "+" };
            if a == b {
                let _ = write!(quad, " {sign} {} {} ^ 2", coef.abs(), names[a]);
            } else {
                let _ = write!(quad, " {sign} {} {} * {}", coef.abs(), names[a], names[b]);
            }
            first = false;
        }
    }
    if !quad.is_empty() {
        let _ = write!(out, " {} [{quad} ] / 2", if any { "+" } else { "" });
    } else if !any {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");
    for (k, (rows, sense)) in [(&enc.eq_rows, "="), (&enc.ge_rows, ">=")].iter().enumerate() {
        for r in 0..rows.len() {
            let _ = write!(out, " c{}_{}:", k, r);
            if !lp_terms(&mut out, rows.matrix.row(r).iter().copied().enumerate(), &names) {
                let _ = write!(out, " 0 {}", names[0]);
            }
            let _ = writeln!(out, " {sense} {}", rows.rhs[r]);
        }
    }
    out.push_str("Bounds\n");
    for j in 0..enc.num_vars() {
        let lo = if enc.lower[j].is_finite() { enc.lower[j].to_string() } else { "-inf".into() };
        let hi = if enc.upper[j].is_finite() { enc.upper[j].to_string() } else { "+inf".into() };
        let _ = writeln!(out, " {lo} <= {} <= {hi}", names[j]);
    }
    out.push_str("Binaries\n");
    for &j in &enc.binary_idx {
        let _ = writeln!(out, " {}", names[j]);
    }
    out.push_str("End\n");
    out
}
