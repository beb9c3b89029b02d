//! McCormick envelopes for bilinear products and feasibility-based bound tightening.

use nalgebra::DVector;

use super::qp::LinearRows;

/// Box `[lo, hi]` of one variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

/// The four McCormick inequalities for `w = u·v` as rows `a_u u + a_v v + a_w w ≥ rhs`.
///
/// Returned in the order: two under-estimators, then two over-estimators.
pub fn envelope_rows(u: Interval, v: Interval) -> [(f64, f64, f64, f64); 4] {
    let (lu, uu, lv, uv) = (u.lo, u.hi, v.lo, v.hi);
    [
        // w ≥ lv u + lu v − lu lv
        (-lv, -lu, 1.0, -lu * lv),
        // w ≥ uv u + uu v − uu uv
        (-uv, -uu, 1.0, -uu * uv),
        // w ≤ uv u + lu v − lu uv
        (uv, lu, -1.0, lu * uv),
        // w ≤ lv u + uu v − uu lv
        (lv, uu, -1.0, uu * lv),
    ]
}

/// Convex under-estimator of `u·v` on the box (pointwise max of the two lower planes).
pub fn envelope_lower(u: Interval, v: Interval, a: f64, b: f64) -> f64 {
    (v.lo * a + u.lo * b - u.lo * v.lo).max(v.hi * a + u.hi * b - u.hi * v.hi)
}

/// Concave over-estimator of `u·v` on the box.
pub fn envelope_upper(u: Interval, v: Interval, a: f64, b: f64) -> f64 {
    (v.hi * a + u.lo * b - u.lo * v.hi).min(v.lo * a + u.hi * b - u.hi * v.lo)
}

/// Secant of `t²` over `[lo, hi]`: `(lo + hi) t − lo·hi ≥ t²` on the interval.
pub fn square_secant(t: Interval) -> (f64, f64) {
    (t.lo + t.hi, -t.lo * t.hi)
}

/// Outcome of bound tightening.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tightening {
    Ok,
    /// Some row cannot be satisfied inside the box.
    Infeasible,
}

/// Propagates `A v ≥ b` and `E v = f` into the box for a fixed number of passes.
///
/// Each pass visits every row and, for each variable in it, bounds the variable by what
/// the rest of the row can contribute at most. Only finite bounds are produced.
pub fn fbbt(
    ge: &LinearRows,
    eq: &LinearRows,
    lower: &mut [f64],
    upper: &mut [f64],
    passes: usize,
) -> Tightening {
    let tol = 1e-9;
    for _ in 0..passes {
        let mut changed = false;
        for (rows, two_sided) in [(ge, false), (eq, true)] {
            for k in 0..rows.len() {
                let row = rows.matrix.row(k);
                let coefs: Vec<(usize, f64)> = row
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| **a != 0.0)
                    .map(|(j, a)| (j, *a))
                    .collect();
                let senses: &[f64] = if two_sided { &[1.0, -1.0] } else { &[1.0] };
                for &sgn in senses {
                    let rhs = sgn * rows.rhs[k];
                    match propagate_row(&coefs, sgn, rhs, lower, upper, tol) {
                        Some(c) => changed |= c,
                        None => return Tightening::Infeasible,
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    Tightening::Ok
}

/// One row `sgn·a'v ≥ rhs`. Returns `None` on detected infeasibility, else whether a bound moved.
fn propagate_row(
    coefs: &[(usize, f64)],
    sgn: f64,
    rhs: f64,
    lower: &mut [f64],
    upper: &mut [f64],
    tol: f64,
) -> Option<bool> {
    // max of each term a_j v_j over the box, counting infinite contributions separately
    let term_max = |j: usize, a: f64, lower: &[f64], upper: &[f64]| {
        if a > 0.0 {
            a * upper[j]
        } else {
            a * lower[j]
        }
    };
    let mut finite_sum = 0.0;
    let mut n_inf = 0;
    let mut inf_idx = usize::MAX;
    for &(j, a) in coefs {
        let t = term_max(j, sgn * a, lower, upper);
        if t.is_finite() {
            finite_sum += t;
        } else {
            n_inf += 1;
            inf_idx = j;
        }
    }
    if n_inf == 0 && finite_sum < rhs - tol * (1.0 + rhs.abs()) {
        return None;
    }
    let mut changed = false;
    for &(j, a0) in coefs {
        let a = sgn * a0;
        let t = term_max(j, a, lower, upper);
        let rest = if t.is_finite() {
            if n_inf > 0 {
                continue;
            }
            finite_sum - t
        } else {
            if n_inf > 1 || inf_idx != j {
                continue;
            }
            finite_sum
        };
        // a v_j ≥ rhs − rest
        let bound = (rhs - rest) / a;
        if a > 0.0 {
            if bound > lower[j] + 1e-12 * (1.0 + bound.abs()) {
                lower[j] = bound;
                changed = true;
            }
        } else if bound < upper[j] - 1e-12 * (1.0 + bound.abs()) {
            upper[j] = bound;
            changed = true;
        }
        if lower[j] > upper[j] + tol * (1.0 + upper[j].abs()) {
            return None;
        }
        if lower[j] > upper[j] {
            let mid = 0.5 * (lower[j] + upper[j]);
            lower[j] = mid;
            upper[j] = mid;
        }
    }
    Some(changed)
}

/// Upper bound of `a'v` over the box (may be `+inf`).
pub fn row_max(a: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    let mut s = 0.0;
    for (j, &c) in a.iter().enumerate() {
        if c > 0.0 {
            s += c * upper[j];
        } else if c < 0.0 {
            s += c * lower[j];
        }
    }
    s
}

pub fn boxes(lower: &[f64], upper: &[f64]) -> Vec<Interval> {
    lower.iter().zip(upper).map(|(&l, &u)| Interval::new(l, u)).collect()
}

/// Is `v` inside the box up to `tol`?
pub fn in_box(v: &DVector<f64>, lower: &[f64], upper: &[f64], tol: f64) -> bool {
    v.iter()
        .enumerate()
        .all(|(j, &x)| x >= lower[j] - tol && x <= upper[j] + tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn envelopes_sandwich_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let lu = rng.gen_range(-5.0..5.0);
            let lv = rng.gen_range(-5.0..5.0);
            let u = Interval::new(lu, lu + rng.gen_range(0.0..4.0));
            let v = Interval::new(lv, lv + rng.gen_range(0.0..4.0));
            let a = rng.gen_range(u.lo..=u.hi);
            let b = rng.gen_range(v.lo..=v.hi);
            assert!(envelope_lower(u, v, a, b) <= a * b + 1e-9);
            assert!(envelope_upper(u, v, a, b) >= a * b - 1e-9);
            for (cu, cv, cw, rhs) in envelope_rows(u, v) {
                assert!(cu * a + cv * b + cw * a * b >= rhs - 1e-9);
            }
        }
    }

    #[test]
    fn envelopes_exact_at_corners() {
        let u = Interval::new(1.0, 3.0);
        let v = Interval::new(-2.0, 5.0);
        for a in [u.lo, u.hi] {
            for b in [v.lo, v.hi] {
                assert!((envelope_lower(u, v, a, b) - a * b).abs() < 1e-12);
                assert!((envelope_upper(u, v, a, b) - a * b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fbbt_derives_box_from_rows() {
        // y ≥ 0, 5 − y ≥ 0, y + z ≥ 1, z ≤ 0.25 via bounds
        let ge = LinearRows::from_rows(
            2,
            vec![(vec![1.0, 0.0], 0.0), (vec![-1.0, 0.0], -5.0), (vec![1.0, 1.0], 1.0)],
        );
        let eq = LinearRows::empty(2);
        let mut lo = vec![f64::NEG_INFINITY, f64::NEG_INFINITY];
        let mut hi = vec![f64::INFINITY, 0.25];
        assert_eq!(fbbt(&ge, &eq, &mut lo, &mut hi, 5), Tightening::Ok);
        assert_eq!((lo[0], hi[0]), (0.75, 5.0));
        assert_eq!(lo[1], -4.0);
    }

    #[test]
    fn fbbt_detects_infeasibility() {
        let ge = LinearRows::from_rows(1, vec![(vec![1.0], 1.0), (vec![-1.0], 0.0)]);
        let mut lo = vec![f64::NEG_INFINITY];
        let mut hi = vec![f64::INFINITY];
        assert_eq!(
            fbbt(&ge, &LinearRows::empty(1), &mut lo, &mut hi, 5),
            Tightening::Infeasible
        );
    }
}
