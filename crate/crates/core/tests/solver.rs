//! Branch and bound against exhaustive enumeration, envelopes, projection.

mod common;

use lfne::solver::mccormick::{envelope_lower, envelope_rows, envelope_upper, square_secant, Interval};
use lfne::solver::qp::LinearRows;
use lfne::solver::{project_polyhedron, solve, solve_by_enumeration, SolverConfig};
use nalgebra::DVector;
use proptest::prelude::*;

use common::random_miqp;

fn interval() -> impl Strategy<Value = Interval> {
    (-5.0f64..5.0, 0.0f64..4.0).prop_map(|(lo, w)| Interval::new(lo, lo + w))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn branch_and_bound_matches_enumeration(seed: u64, convex: bool) {
        let p = random_miqp(seed, convex);
        let cfg = SolverConfig::default();
        let bb = solve(&p, &cfg).unwrap();
        let en = solve_by_enumeration(&p, &cfg).unwrap();
        prop_assert_eq!(bb.status, en.status);
        if bb.is_optimal() {
            prop_assert!((bb.value - en.value).abs() <= 1e-5, "{} vs {}", bb.value, en.value);
            let v = bb.incumbent.as_ref().unwrap();
            prop_assert!(p.max_violation(v) <= 1e-6);
            prop_assert!((p.objective.eval(v) - bb.value).abs() <= 1e-9 * (1.0 + bb.value.abs()));
            prop_assert!(bb.bound <= bb.value + 1e-9);
        }
    }

    #[test]
    fn solve_reports_are_deterministic(seed: u64) {
        let p = random_miqp(seed, false);
        let cfg = SolverConfig::default();
        let a = solve(&p, &cfg).unwrap();
        let b = solve(&p, &cfg).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        prop_assert_eq!(a.nodes, b.nodes);
        prop_assert_eq!(a.incumbent, b.incumbent);
    }

    #[test]
    fn mccormick_bounds_the_product(u in interval(), v in interval(), s in 0.0f64..=1.0, t in 0.0f64..=1.0) {
        let a = u.lo + s * (u.hi - u.lo);
        let b = v.lo + t * (v.hi - v.lo);
        let w = a * b;
        let slack = 1e-9 * (1.0 + w.abs());
        prop_assert!(envelope_lower(u, v, a, b) <= w + slack);
        prop_assert!(envelope_upper(u, v, a, b) >= w - slack);
        for (au, av, aw, rhs) in envelope_rows(u, v) {
            prop_assert!(au * a + av * b + aw * w >= rhs - slack);
        }
        let (k1, k0) = square_secant(u);
        prop_assert!(k1 * a + k0 >= a * a - 1e-9 * (1.0 + a * a));
    }

    #[test]
    fn mccormick_is_exact_at_corners(u in interval(), v in interval(), hi_u: bool, hi_v: bool) {
        let a = if hi_u { u.hi } else { u.lo };
        let b = if hi_v { v.hi } else { v.lo };
        let w = a * b;
        prop_assert!((envelope_lower(u, v, a, b) - w).abs() <= 1e-9 * (1.0 + w.abs()));
        prop_assert!((envelope_upper(u, v, a, b) - w).abs() <= 1e-9 * (1.0 + w.abs()));
    }

    #[test]
    fn projection_is_feasible_and_idempotent(
        point in proptest::collection::vec(-5.0f64..5.0, 3),
        rows in proptest::collection::vec((proptest::collection::vec(-1.0f64..1.0, 3), -1.0f64..0.0), 0..4),
    ) {
        // rhs ≤ 0 keeps the origin feasible
        let ge = LinearRows::from_rows(3, rows);
        let eq = LinearRows::empty(3);
        let (lo, hi) = (vec![-2.0; 3], vec![2.0; 3]);
        let x = DVector::from_vec(point);
        let p = project_polyhedron(&eq, &ge, &lo, &hi, &x).unwrap().x;
        let act = &ge.matrix * &p;
        for k in 0..ge.len() {
            prop_assert!(act[k] >= ge.rhs[k] - 1e-7);
        }
        prop_assert!(p.iter().all(|v| (-2.0 - 1e-9..=2.0 + 1e-9).contains(v)));
        // no feasible point is closer than the projection; the origin is one
        prop_assert!((&x - &p).norm() <= x.norm() + 1e-9);
        let again = project_polyhedron(&eq, &ge, &lo, &hi, &p).unwrap().x;
        prop_assert!((&again - &p).norm() <= 1e-7);
    }
}
