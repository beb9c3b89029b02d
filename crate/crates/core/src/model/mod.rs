//! Game data for multi-leader multi-follower games with quadratic costs and affine rows,
//! plus the evaluation primitives (costs, gradients, potential, feasibility) every other
//! module builds on.
//!
//! Leader `i` owns `x^i ∈ R^{n_i}` and its followers own `y^i_ν ∈ R^{p_ν}`. Follower `ν`
//! minimises
//!
//! ```text
//! f_ν = ½ y_ν'Q y_ν + (q + R x + Σ_{μ≠ν} S_νμ y_μ)' y_ν + c0
//! ```
//!
//! over its private rows `D_ν y_ν + A_ν x + Σ_{μ≠ν} D_νμ y_μ − e_ν ≥ 0` and the shared rows
//! `B x + Σ_μ E_μ y_μ − c ≥ 0`. The leader's cost is `g(x^1..x^N) + h(x^i, y^i)`, both stored
//! as quadratic forms.

pub mod fixtures;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_psd, is_symmetric, min_eigenvalue, serde_dense};
use crate::solver::qp::{solve_qp, LinearRows, QpOptions, QpProblem};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquilibriumMode {
    /// One shared multiplier vector per leader (variational equilibrium of the followers).
    #[default]
    Variational,
    /// One shared-row multiplier copy per follower.
    Gne,
}

/// `½ v'Hv + c'v + k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadForm {
    #[serde(with = "serde_dense::mat")]
    pub hessian: DMatrix<f64>,
    #[serde(with = "serde_dense::vector")]
    pub linear: DVector<f64>,
    #[serde(default)]
    pub constant: f64,
}

impl QuadForm {
    pub fn zeros(n: usize) -> Self {
        QuadForm {
            hessian: DMatrix::zeros(n, n),
            linear: DVector::zeros(n),
            constant: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn eval(&self, v: &DVector<f64>) -> f64 {
        0.5 * v.dot(&(&self.hessian * v)) + self.linear.dot(v) + self.constant
    }

    pub fn gradient(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.hessian * v + &self.linear
    }

    /// Adds `coef · v_a · v_b` (for `a == b`, `coef · v_a²`).
    pub fn add_product(&mut self, a: usize, b: usize, coef: f64) {
        if a == b {
            self.hessian[(a, a)] += 2.0 * coef;
        } else {
            self.hessian[(a, b)] += coef;
            self.hessian[(b, a)] += coef;
        }
    }

    fn shape_issue(&self, expected: usize) -> Option<String> {
        if self.hessian.nrows() != expected
            || self.hessian.ncols() != expected
            || self.linear.len() != expected
        {
            Some(format!(
                "expected dimension {expected}, got hessian {}x{} and linear {}",
                self.hessian.nrows(),
                self.hessian.ncols(),
                self.linear.len()
            ))
        } else if !is_symmetric(&self.hessian, 1e-12) {
            Some("hessian is not symmetric".into())
        } else {
            None
        }
    }
}

/// Rows `matrix · x + offset ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineRows {
    #[serde(with = "serde_dense::mat")]
    pub matrix: DMatrix<f64>,
    #[serde(with = "serde_dense::vector")]
    pub offset: DVector<f64>,
}

impl AffineRows {
    pub fn empty(n: usize) -> Self {
        AffineRows {
            matrix: DMatrix::zeros(0, n),
            offset: DVector::zeros(0),
        }
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// As `matrix · x ≥ -offset`.
    pub fn as_ge_rows(&self) -> LinearRows {
        LinearRows {
            matrix: self.matrix.clone(),
            rhs: -&self.offset,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    #[serde(with = "serde_dense::lower_bounds")]
    pub lower: Vec<f64>,
    #[serde(with = "serde_dense::upper_bounds")]
    pub upper: Vec<f64>,
}

impl BoxBounds {
    pub fn unbounded(n: usize) -> Self {
        BoxBounds {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        BoxBounds { lower, upper }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FollowerCost {
    /// Curvature `Q` (p_ν × p_ν).
    #[serde(rename = "Q", with = "serde_dense::mat")]
    pub q_mat: DMatrix<f64>,
    #[serde(with = "serde_dense::vector")]
    pub q: DVector<f64>,
    /// Leader-to-follower coupling `R` (p_ν × n_i).
    #[serde(rename = "R", with = "serde_dense::mat")]
    pub r: DMatrix<f64>,
    /// `S_νμ` indexed by `μ`; `None` for `μ = ν` or absent coupling.
    #[serde(rename = "S", default, with = "serde_dense::opt_mats")]
    pub coupling: Vec<Option<DMatrix<f64>>>,
    #[serde(default)]
    pub c0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FollowerConstraints {
    /// `D_ν = D_νν` (r_ν × p_ν).
    #[serde(rename = "D", with = "serde_dense::mat")]
    pub d_own: DMatrix<f64>,
    /// `D_νμ` indexed by `μ`; `None` for `μ = ν` or absent.
    #[serde(rename = "D_cross", default, with = "serde_dense::opt_mats")]
    pub d_cross: Vec<Option<DMatrix<f64>>>,
    /// `A_ν` (r_ν × n_i).
    #[serde(rename = "A", with = "serde_dense::mat")]
    pub a: DMatrix<f64>,
    #[serde(with = "serde_dense::vector")]
    pub e: DVector<f64>,
}

impl FollowerConstraints {
    pub fn rows(&self) -> usize {
        self.d_own.nrows()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Follower {
    pub dim: usize,
    pub cost: FollowerCost,
    pub constraints: FollowerConstraints,
}

/// Shared rows `B x + Σ_μ E_μ y_μ − c ≥ 0`, stored once per leader.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharedRows {
    #[serde(rename = "B", with = "serde_dense::mat")]
    pub b: DMatrix<f64>,
    #[serde(rename = "E", with = "serde_dense::mats")]
    pub e: Vec<DMatrix<f64>>,
    #[serde(with = "serde_dense::vector")]
    pub c: DVector<f64>,
}

impl SharedRows {
    pub fn rows(&self) -> usize {
        self.c.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeaderSpec {
    pub n: usize,
    /// Affine rows `G(x) ≥ 0` on the leader's own decision.
    pub g_rows: AffineRows,
    pub x_bounds: BoxBounds,
    /// `g^i` over the stacked leader decisions `(x^1, …, x^N)`.
    pub cost_g: QuadForm,
    /// `h^i` over `(x^i, y^i_1, …, y^i_M)`.
    pub cost_h: QuadForm,
    pub followers: Vec<Follower>,
    pub shared: SharedRows,
}

impl LeaderSpec {
    pub fn num_followers(&self) -> usize {
        self.followers.len()
    }

    /// `p^i = Σ_ν p_ν`.
    pub fn follower_dim(&self) -> usize {
        self.followers.iter().map(|f| f.dim).sum()
    }

    pub fn y_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.followers.len());
        let mut acc = 0;
        for f in &self.followers {
            off.push(acc);
            acc += f.dim;
        }
        off
    }

    /// Joint follower feasible set `Ω^i(x)` as `≥` rows over the stacked `y^i`.
    pub fn follower_polyhedron(&self, x: &DVector<f64>) -> LinearRows {
        let p = self.follower_dim();
        let off = self.y_offsets();
        let mut rows = Vec::new();
        for (nu, f) in self.followers.iter().enumerate() {
            let con = &f.constraints;
            let rhs = &con.e - &con.a * x;
            for k in 0..con.rows() {
                let mut coefs = vec![0.0; p];
                for j in 0..f.dim {
                    coefs[off[nu] + j] = con.d_own[(k, j)];
                }
                for (mu, dm) in con.d_cross.iter().enumerate() {
                    if let Some(dm) = dm {
                        if mu != nu {
                            for j in 0..self.followers[mu].dim {
                                coefs[off[mu] + j] += dm[(k, j)];
                            }
                        }
                    }
                }
                rows.push((coefs, rhs[k]));
            }
        }
        let sh = &self.shared;
        let rhs = &sh.c - &sh.b * x;
        for k in 0..sh.rows() {
            let mut coefs = vec![0.0; p];
            for (mu, em) in sh.e.iter().enumerate() {
                for j in 0..self.followers[mu].dim {
                    coefs[off[mu] + j] = em[(k, j)];
                }
            }
            rows.push((coefs, rhs[k]));
        }
        LinearRows::from_rows(p, rows)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalGame {
    pub version: u32,
    #[serde(default)]
    pub instance_id: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub mode: EquilibriumMode,
    pub leaders: Vec<LeaderSpec>,
    /// Exact potential `W` over the stacked leader decisions.
    #[serde(default, rename = "potential_W")]
    pub potential_w: Option<QuadForm>,
}

impl HierarchicalGame {
    pub fn num_leaders(&self) -> usize {
        self.leaders.len()
    }

    /// `n = Σ_i n_i`.
    pub fn total_x_dim(&self) -> usize {
        self.leaders.iter().map(|l| l.n).sum()
    }

    pub fn x_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.leaders.len());
        let mut acc = 0;
        for l in &self.leaders {
            off.push(acc);
            acc += l.n;
        }
        off
    }

    pub fn stack_x(&self, xs: &[DVector<f64>]) -> Result<DVector<f64>> {
        if xs.len() != self.leaders.len() {
            return Err(Error::Dimension(format!(
                "expected {} leader decisions, got {}",
                self.leaders.len(),
                xs.len()
            )));
        }
        let mut out = Vec::with_capacity(self.total_x_dim());
        for (i, (x, l)) in xs.iter().zip(&self.leaders).enumerate() {
            if x.len() != l.n {
                return Err(Error::Dimension(format!(
                    "leader {}: x has length {} but n = {}",
                    i + 1,
                    x.len(),
                    l.n
                )));
            }
            out.extend(x.iter().copied());
        }
        Ok(DVector::from_vec(out))
    }

    pub fn leader(&self, i: usize) -> Result<&LeaderSpec> {
        self.leaders
            .get(i)
            .ok_or_else(|| Error::Dimension(format!("no leader with index {i}")))
    }
}

/// One leader's composite decision `z^i = (x, y, λ, δ, s, t)`.
///
/// `delta` and `t` hold one vector in variational mode and one per follower in GNE mode.
/// Binaries are stored as `0.0`/`1.0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeaderBlock {
    #[serde(with = "serde_dense::vector")]
    pub x: DVector<f64>,
    #[serde(with = "serde_dense::vectors")]
    pub y: Vec<DVector<f64>>,
    #[serde(with = "serde_dense::vectors")]
    pub lambda: Vec<DVector<f64>>,
    #[serde(with = "serde_dense::vectors")]
    pub delta: Vec<DVector<f64>>,
    #[serde(with = "serde_dense::vectors")]
    pub s: Vec<DVector<f64>>,
    #[serde(with = "serde_dense::vectors")]
    pub t: Vec<DVector<f64>>,
}

pub type PopulationState = Vec<LeaderBlock>;

impl LeaderBlock {
    /// All-zero block shaped for `spec` under `mode`.
    pub fn zeros(spec: &LeaderSpec, mode: EquilibriumMode) -> Self {
        let d = spec.shared.rows();
        let copies = match mode {
            EquilibriumMode::Variational => 1,
            EquilibriumMode::Gne => spec.num_followers(),
        };
        LeaderBlock {
            x: DVector::zeros(spec.n),
            y: spec.followers.iter().map(|f| DVector::zeros(f.dim)).collect(),
            lambda: spec
                .followers
                .iter()
                .map(|f| DVector::zeros(f.constraints.rows()))
                .collect(),
            delta: (0..copies).map(|_| DVector::zeros(d)).collect(),
            s: spec
                .followers
                .iter()
                .map(|f| DVector::zeros(f.constraints.rows()))
                .collect(),
            t: (0..copies).map(|_| DVector::zeros(d)).collect(),
        }
    }

    /// Concatenation in the canonical order `x, y_1..y_M, λ_1..λ_M, δ.., s_1..s_M, t..`.
    pub fn flatten(&self) -> DVector<f64> {
        let mut out = Vec::new();
        out.extend(self.x.iter().copied());
        for part in [&self.y, &self.lambda, &self.delta, &self.s, &self.t] {
            for v in part.iter() {
                out.extend(v.iter().copied());
            }
        }
        DVector::from_vec(out)
    }

    pub fn y_stacked(&self) -> DVector<f64> {
        let mut out = Vec::new();
        for v in &self.y {
            out.extend(v.iter().copied());
        }
        DVector::from_vec(out)
    }

    /// `(x^i, y^i)` as the argument of `h^i`.
    pub fn xy(&self) -> DVector<f64> {
        let mut out: Vec<f64> = self.x.iter().copied().collect();
        for v in &self.y {
            out.extend(v.iter().copied());
        }
        DVector::from_vec(out)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    fn push(&mut self, s: String) {
        self.issues.push(s);
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidInput(self.issues.join("; ")))
        }
    }
}

/// Structural checks: shapes, PSD follower curvature, symmetric forms, exact potential.
pub fn validate_game(g: &HierarchicalGame) -> ValidationReport {
    let mut rep = ValidationReport::default();
    if g.version != SCHEMA_VERSION {
        rep.push(format!(
            "unsupported schema version {} (expected {SCHEMA_VERSION})",
            g.version
        ));
    }
    if g.leaders.is_empty() {
        rep.push("game has no leaders".into());
    }
    let n_total = g.total_x_dim();
    for (i, l) in g.leaders.iter().enumerate() {
        let li = i + 1;
        let n = l.n;
        let m = l.num_followers();
        let mut dim = |what: &str, msg: String| {
            rep.push(format!("dimension mismatch: leader {li} {what}: {msg}"));
        };
        if l.g_rows.matrix.ncols() != n || l.g_rows.offset.len() != l.g_rows.len() {
            dim(
                "G rows",
                format!(
                    "matrix {}x{}, offset {}, n = {n}",
                    l.g_rows.matrix.nrows(),
                    l.g_rows.matrix.ncols(),
                    l.g_rows.offset.len()
                ),
            );
        }
        if l.x_bounds.lower.len() != n || l.x_bounds.upper.len() != n {
            dim("x_bounds", format!("lengths {}/{}, n = {n}", l.x_bounds.lower.len(), l.x_bounds.upper.len()));
        }
        if let Some(s) = l.cost_g.shape_issue(n_total) {
            dim("cost_g (over all leaders' x)", s);
        }
        if let Some(s) = l.cost_h.shape_issue(n + l.follower_dim()) {
            dim("cost_h (over own x and own followers' y)", s);
        }
        for (nu, f) in l.followers.iter().enumerate() {
            let fi = nu + 1;
            let p = f.dim;
            let c = &f.cost;
            let mut fdim = |msg: String| {
                rep.push(format!("dimension mismatch: leader {li} follower {fi}: {msg}"));
            };
            if c.q_mat.shape() != (p, p) {
                fdim(format!("Q is {}x{}, expected {p}x{p}", c.q_mat.nrows(), c.q_mat.ncols()));
            }
            if c.q.len() != p {
                fdim(format!("q has length {}, expected {p}", c.q.len()));
            }
            if c.r.shape() != (p, n) {
                fdim(format!("R is {}x{}, expected {p}x{n}", c.r.nrows(), c.r.ncols()));
            }
            if !c.coupling.is_empty() && c.coupling.len() != m {
                fdim(format!("S has {} entries, expected {m}", c.coupling.len()));
            }
            for (mu, s) in c.coupling.iter().enumerate() {
                if let Some(s) = s {
                    if mu < m && s.shape() != (p, l.followers[mu].dim) {
                        fdim(format!("S[{}] is {}x{}", mu + 1, s.nrows(), s.ncols()));
                    }
                }
            }
            let con = &f.constraints;
            let r = con.rows();
            if con.d_own.ncols() != p {
                fdim(format!("D has {} columns, expected {p}", con.d_own.ncols()));
            }
            if con.a.shape() != (r, n) {
                fdim(format!("A is {}x{}, expected {r}x{n}", con.a.nrows(), con.a.ncols()));
            }
            if con.e.len() != r {
                fdim(format!("e has length {} but D has {r} rows", con.e.len()));
            }
            if !con.d_cross.is_empty() && con.d_cross.len() != m {
                fdim(format!("D_cross has {} entries, expected {m}", con.d_cross.len()));
            }
            for (mu, dm) in con.d_cross.iter().enumerate() {
                if let Some(dm) = dm {
                    if mu < m && dm.shape() != (r, l.followers[mu].dim) {
                        fdim(format!("D_cross[{}] is {}x{}", mu + 1, dm.nrows(), dm.ncols()));
                    }
                }
            }
            if c.q_mat.is_square() && c.q_mat.nrows() == p {
                if !is_symmetric(&c.q_mat, 1e-12) {
                    rep.push(format!("leader {li}: Q not symmetric for follower {fi}"));
                } else if !is_psd(&c.q_mat, 1e-10) {
                    rep.push(format!(
                        "leader {li}: Q not PSD for follower {fi} (min eigenvalue {:.3e})",
                        min_eigenvalue(&c.q_mat)
                    ));
                }
            }
        }
        let sh = &l.shared;
        let d = sh.rows();
        if sh.b.shape() != (d, n) {
            rep.push(format!(
                "dimension mismatch: leader {li} shared rows: B is {}x{}, expected {d}x{n}",
                sh.b.nrows(),
                sh.b.ncols()
            ));
        }
        if sh.e.len() != m {
            rep.push(format!(
                "shared-row inconsistency: leader {li} has {} E blocks for {m} followers",
                sh.e.len()
            ));
        } else {
            for (mu, em) in sh.e.iter().enumerate() {
                if em.shape() != (d, l.followers[mu].dim) {
                    rep.push(format!(
                        "shared-row inconsistency: leader {li} E[{}] is {}x{}, expected {d}x{}",
                        mu + 1,
                        em.nrows(),
                        em.ncols(),
                        l.followers[mu].dim
                    ));
                }
            }
        }
    }
    if let Some(w) = &g.potential_w {
        if let Some(s) = w.shape_issue(n_total) {
            rep.push(format!("dimension mismatch: potential_W: {s}"));
        } else {
            for i in potential_violations(g, w) {
                rep.push(format!(
                    "potential_W is not an exact potential for leader {}: W − g^{} depends on x^{}",
                    i + 1,
                    i + 1,
                    i + 1
                ));
            }
        }
    }
    rep
}

/// Leaders for which `W − g^i` depends on `x^i` (so `ΔW ≠ Δg^i` for some deviation).
fn potential_violations(g: &HierarchicalGame, w: &QuadForm) -> Vec<usize> {
    let off = g.x_offsets();
    let n_total = g.total_x_dim();
    let mut bad = Vec::new();
    for (i, l) in g.leaders.iter().enumerate() {
        if l.cost_g.dim() != n_total {
            continue;
        }
        let dh = &w.hessian - &l.cost_g.hessian;
        let dc = &w.linear - &l.cost_g.linear;
        let scale = w.hessian.amax().max(l.cost_g.hessian.amax()).max(1.0);
        let lscale = w.linear.amax().max(l.cost_g.linear.amax()).max(1.0);
        let mut ok = true;
        for a in off[i]..off[i] + l.n {
            if dc[a].abs() > 1e-9 * lscale || dh.row(a).amax() > 1e-9 * scale {
                ok = false;
            }
        }
        if !ok {
            bad.push(i);
        }
    }
    bad
}

fn check_follower_args(
    l: &LeaderSpec,
    nu: usize,
    x: &DVector<f64>,
    y_all: &[DVector<f64>],
) -> Result<()> {
    if nu >= l.num_followers() {
        return Err(Error::Dimension(format!("no follower with index {nu}")));
    }
    if x.len() != l.n {
        return Err(Error::Dimension(format!("x has length {}, expected {}", x.len(), l.n)));
    }
    if y_all.len() != l.num_followers() {
        return Err(Error::Dimension(format!(
            "expected {} follower blocks, got {}",
            l.num_followers(),
            y_all.len()
        )));
    }
    for (mu, (y, f)) in y_all.iter().zip(&l.followers).enumerate() {
        if y.len() != f.dim {
            return Err(Error::Dimension(format!(
                "y[{}] has length {}, expected {}",
                mu + 1,
                y.len(),
                f.dim
            )));
        }
    }
    Ok(())
}

/// `q + R x + Σ_{μ≠ν} S_νμ y_μ`: the part of the follower gradient independent of `y_ν`.
fn follower_linear_term(l: &LeaderSpec, nu: usize, x: &DVector<f64>, y_all: &[DVector<f64>]) -> DVector<f64> {
    let c = &l.followers[nu].cost;
    let mut lin = &c.q + &c.r * x;
    for (mu, s) in c.coupling.iter().enumerate() {
        if let Some(s) = s {
            if mu != nu {
                lin += s * &y_all[mu];
            }
        }
    }
    lin
}

/// `∇_{y_ν} f_ν = Q y_ν + R x + Σ_{μ≠ν} S_νμ y_μ + q`.
pub fn follower_gradient(
    g: &HierarchicalGame,
    i: usize,
    nu: usize,
    x: &DVector<f64>,
    y_all: &[DVector<f64>],
) -> Result<DVector<f64>> {
    let l = g.leader(i)?;
    check_follower_args(l, nu, x, y_all)?;
    let c = &l.followers[nu].cost;
    Ok(&c.q_mat * &y_all[nu] + follower_linear_term(l, nu, x, y_all))
}

pub fn follower_cost(
    g: &HierarchicalGame,
    i: usize,
    nu: usize,
    x: &DVector<f64>,
    y_all: &[DVector<f64>],
) -> Result<f64> {
    let l = g.leader(i)?;
    check_follower_args(l, nu, x, y_all)?;
    let c = &l.followers[nu].cost;
    let y = &y_all[nu];
    Ok(0.5 * y.dot(&(&c.q_mat * y)) + follower_linear_term(l, nu, x, y_all).dot(y) + c.c0)
}

/// Stacked pseudogradient `V^i(x, y) = (∇_{y_ν} f_ν)_ν`.
pub fn pseudogradient(
    g: &HierarchicalGame,
    i: usize,
    x: &DVector<f64>,
    y_all: &[DVector<f64>],
) -> Result<DVector<f64>> {
    let l = g.leader(i)?;
    let mut out = Vec::with_capacity(l.follower_dim());
    for nu in 0..l.num_followers() {
        out.extend(follower_gradient(g, i, nu, x, y_all)?.iter().copied());
    }
    Ok(DVector::from_vec(out))
}

/// A minimiser of `f_ν(x, ·, y_{−ν})` over `Ω_ν(x, y_{−ν})`; the entry `y_all[ν]` is ignored.
pub fn follower_best_response(
    g: &HierarchicalGame,
    i: usize,
    nu: usize,
    x: &DVector<f64>,
    y_all: &[DVector<f64>],
) -> Result<DVector<f64>> {
    let l = g.leader(i)?;
    check_follower_args(l, nu, x, y_all)?;
    let f = &l.followers[nu];
    let p = f.dim;
    let con = &f.constraints;
    let mut rows = Vec::new();
    let mut rhs = &con.e - &con.a * x;
    for (mu, dm) in con.d_cross.iter().enumerate() {
        if let (Some(dm), true) = (dm, mu != nu) {
            rhs -= dm * &y_all[mu];
        }
    }
    for k in 0..con.rows() {
        rows.push((con.d_own.row(k).iter().copied().collect::<Vec<_>>(), rhs[k]));
    }
    let sh = &l.shared;
    let mut srhs = &sh.c - &sh.b * x;
    for (mu, em) in sh.e.iter().enumerate() {
        if mu != nu {
            srhs -= em * &y_all[mu];
        }
    }
    for k in 0..sh.rows() {
        rows.push((sh.e[nu].row(k).iter().copied().collect::<Vec<_>>(), srhs[k]));
    }
    let ge = LinearRows::from_rows(p, rows);
    let eq = LinearRows::empty(p);
    let lin = follower_linear_term(l, nu, x, y_all);
    let lo = vec![f64::NEG_INFINITY; p];
    let hi = vec![f64::INFINITY; p];
    let prob = QpProblem {
        hessian: &f.cost.q_mat,
        linear: &lin,
        eq: &eq,
        ge: &ge,
        lower: &lo,
        upper: &hi,
    };
    let sol = solve_qp(&prob, Some(&y_all[nu]), &QpOptions::default()).map_err(|e| match Error::from(e) {
        Error::Infeasible(s) => Error::Infeasible(format!(
            "feasible set of follower {} of leader {} is empty ({s})",
            nu + 1,
            i + 1
        )),
        other => other,
    })?;
    Ok(sol.x)
}

/// `(g^i(x^1..x^N), h^i(x^i, y^i))`.
pub fn leader_cost_parts(
    g: &HierarchicalGame,
    i: usize,
    x_all: &[DVector<f64>],
    y_i: &[DVector<f64>],
) -> Result<(f64, f64)> {
    let l = g.leader(i)?;
    let xs = g.stack_x(x_all)?;
    if y_i.len() != l.num_followers() || y_i.iter().zip(&l.followers).any(|(y, f)| y.len() != f.dim) {
        return Err(Error::Dimension(format!(
            "leader {}: follower decisions do not match follower dimensions",
            i + 1
        )));
    }
    let mut xy: Vec<f64> = x_all[i].iter().copied().collect();
    for y in y_i {
        xy.extend(y.iter().copied());
    }
    Ok((l.cost_g.eval(&xs), l.cost_h.eval(&DVector::from_vec(xy))))
}

/// `F^i = g^i + h^i`.
pub fn leader_cost(
    g: &HierarchicalGame,
    i: usize,
    x_all: &[DVector<f64>],
    y_i: &[DVector<f64>],
) -> Result<f64> {
    let (a, b) = leader_cost_parts(g, i, x_all, y_i)?;
    Ok(a + b)
}

/// `J^i(z) = F^i(x^i, x^{−i}, y^i)`; multipliers and binaries carry no cost.
pub fn joint_cost(g: &HierarchicalGame, i: usize, z: &[LeaderBlock]) -> Result<f64> {
    let xs: Vec<DVector<f64>> = z.iter().map(|b| b.x.clone()).collect();
    leader_cost(g, i, &xs, &z.get(i).ok_or_else(|| Error::Dimension(format!("no block {i}")))?.y)
}

/// `∇_{x^i} F^i` at the given decisions.
pub fn leader_gradient(
    g: &HierarchicalGame,
    i: usize,
    x_all: &[DVector<f64>],
    y_i: &[DVector<f64>],
) -> Result<DVector<f64>> {
    let l = g.leader(i)?;
    let xs = g.stack_x(x_all)?;
    let off = g.x_offsets()[i];
    let gg = l.cost_g.gradient(&xs);
    let mut xy: Vec<f64> = x_all[i].iter().copied().collect();
    for y in y_i {
        xy.extend(y.iter().copied());
    }
    let xy = DVector::from_vec(xy);
    if xy.len() != l.cost_h.dim() {
        return Err(Error::Dimension(format!("leader {}: (x, y) does not match cost_h", i + 1)));
    }
    let gh = l.cost_h.gradient(&xy);
    Ok(DVector::from_fn(l.n, |a, _| gg[off + a] + gh[a]))
}

/// `P(z) = W(x) + Σ_i h^i(x^i, y^i)`.
pub fn potential(g: &HierarchicalGame, z: &[LeaderBlock]) -> Result<f64> {
    let w = g.potential_w.as_ref().ok_or(Error::MissingPotential)?;
    let xs: Vec<DVector<f64>> = z.iter().map(|b| b.x.clone()).collect();
    let xs = g.stack_x(&xs)?;
    let mut p = w.eval(&xs);
    for (l, b) in g.leaders.iter().zip(z) {
        let xy = b.xy();
        if xy.len() != l.cost_h.dim() {
            return Err(Error::Dimension("block does not match cost_h".into()));
        }
        p += l.cost_h.eval(&xy);
    }
    Ok(p)
}
