use nalgebra::{DMatrix, DVector};

use super::qp::{solve_qp, QpOptions, QpProblem};
use super::MiqpProblem;
use crate::linalg::min_eigenvalue;

const MAX_PROX_STEPS: usize = 200;

/// Proximal-point descent to a KKT point of the continuous problem inside `[lower, upper]`.
///
/// Each step solves the convex QP `min f(v) + ½μ‖v − v_k‖²` with `μ` above the most negative
/// eigenvalue of the Hessian, so the objective never increases. Returns `None` when the box
/// and rows admit no point.
pub fn local_descent(
    p: &MiqpProblem,
    lower: &[f64],
    upper: &[f64],
    start: &DVector<f64>,
) -> Option<(DVector<f64>, f64)> {
    let h = &p.objective.hessian;
    let n = h.nrows();
    let lam = min_eigenvalue(h);
    let scale = h.amax().max(1.0);
    let mu = if lam >= -1e-10 * scale { 0.0 } else { -lam + 1e-3 * scale };
    let hp = h + DMatrix::identity(n, n) * mu;
    let opts = QpOptions::default();
    let mut v = start.clone();
    let mut best: Option<DVector<f64>> = None;
    for _ in 0..MAX_PROX_STEPS {
        let lin = &p.objective.linear - &v * mu;
        let prob = QpProblem {
            hessian: &hp,
            linear: &lin,
            eq: &p.eq,
            ge: &p.ge,
            lower,
            upper,
        };
        let next = match solve_qp(&prob, Some(&v), &opts) {
            Ok(sol) => sol.x,
            Err(_) => break,
        };
        let step = (&next - &v).amax();
        v = next;
        best = Some(v.clone());
        if mu == 0.0 || step <= 1e-10 * (1.0 + v.amax()) {
            break;
        }
    }
    best.map(|v| {
        let f = p.objective.eval(&v);
        (v, f)
    })
}
