use nalgebra::{DMatrix, DVector};

use super::*;
use crate::model::fixtures::toy_t1;
use crate::reformulate::{build_encoding, extract_block, BigMPolicy};

fn t1_problem() -> (MIEncoding, MiqpProblem) {
    let g = toy_t1();
    let enc = build_encoding(&g, 0, &[DVector::zeros(1)], &BigMPolicy::default()).unwrap();
    let p = MiqpProblem::from_encoding(&enc, enc.objective.clone());
    (enc, p)
}

fn box_problem(h: &[f64], c: &[f64], lo: &[f64], hi: &[f64], binaries: Vec<usize>) -> MiqpProblem {
    let n = c.len();
    MiqpProblem {
        objective: QuadForm {
            hessian: DMatrix::from_row_slice(n, n, h),
            linear: DVector::from_column_slice(c),
            constant: 0.0,
        },
        eq: LinearRows::empty(n),
        ge: LinearRows::empty(n),
        lower: lo.to_vec(),
        upper: hi.to_vec(),
        binaries,
    }
}

#[test]
fn t1_best_response() {
    let (enc, p) = t1_problem();
    let rep = solve(&p, &SolverConfig::default()).unwrap();
    assert_eq!(rep.status, SolveStatus::Optimal);
    assert!(rep.value.abs() < 1e-9);
    let b = extract_block(&enc, rep.incumbent.as_ref().unwrap()).unwrap();
    assert!((b.x[0] - 1.0).abs() < 1e-7);
    assert!((b.y[0][0] - 1.0).abs() < 1e-7 && (b.y[1][0] - 1.0).abs() < 1e-7);
    assert_eq!(b.t[0][0], 0.0);
    assert_eq!((b.s[0][0], b.s[1][0]), (0.0, 0.0));
}

#[test]
fn t1_best_response_with_leader_capped_at_zero() {
    let (enc, mut p) = t1_problem();
    let x = enc.var_map.x.start;
    p.upper[x] = 0.0;
    let rep = solve(&p, &SolverConfig::default()).unwrap();
    assert_eq!(rep.status, SolveStatus::Optimal);
    assert!((rep.value - 1.25).abs() < 1e-9);
    let b = extract_block(&enc, rep.incumbent.as_ref().unwrap()).unwrap();
    assert!(b.x[0].abs() < 1e-9);
    assert!((b.y[0][0] - 0.5).abs() < 1e-7 && (b.y[1][0] - 0.5).abs() < 1e-7);
    assert!((b.delta[0][0] - 0.5).abs() < 1e-7);
    assert_eq!(b.t[0][0], 1.0);
}

#[test]
fn pure_binary_toy() {
    // (b − 0.3)² = b² − 0.6 b + 0.09
    let mut p = box_problem(&[2.0], &[-0.6], &[0.0], &[1.0], vec![0]);
    p.objective.constant = 0.09;
    let rep = solve(&p, &SolverConfig::default()).unwrap();
    assert_eq!(rep.incumbent.unwrap()[0], 0.0);
    assert!((rep.value - 0.09).abs() < 1e-12);
    let en = solve_by_enumeration(&p, &SolverConfig::default()).unwrap();
    assert!((en.value - 0.09).abs() < 1e-12);
}

#[test]
fn enumeration_matches_t1() {
    let (_, p) = t1_problem();
    let cfg = SolverConfig::default();
    let a = solve(&p, &cfg).unwrap();
    let b = solve_by_enumeration(&p, &cfg).unwrap();
    assert_eq!(b.nodes, 8);
    assert!((a.value - b.value).abs() < 1e-6);
    assert!(!b.heuristic_leaf);
}

#[test]
fn infeasible_rows() {
    // x ≥ 1 and −x ≥ 0
    let mut p = box_problem(&[1.0], &[0.0], &[f64::NEG_INFINITY], &[f64::INFINITY], vec![]);
    p.ge = LinearRows::from_rows(1, vec![(vec![1.0], 1.0), (vec![-1.0], 0.0)]);
    let cfg = SolverConfig::default();
    assert_eq!(solve(&p, &cfg).unwrap().status, SolveStatus::Infeasible);
    assert_eq!(solve_by_enumeration(&p, &cfg).unwrap().status, SolveStatus::Infeasible);
}

#[test]
fn convex_without_binaries_is_one_leaf() {
    let mut p = box_problem(&[2.0, 0.5, 0.5, 1.0], &[-1.0, 1.0], &[-5.0, -5.0], &[5.0, 5.0], vec![]);
    p.ge = LinearRows::from_rows(2, vec![(vec![1.0, 1.0], 1.0)]);
    let cfg = SolverConfig::default();
    let a = solve(&p, &cfg).unwrap();
    let b = solve_by_enumeration(&p, &cfg).unwrap();
    assert_eq!(b.nodes, 1);
    assert_eq!(a.nodes, 1);
    assert!((a.value - b.value).abs() < 1e-9);
}

#[test]
fn bilinear_box_reaches_corner() {
    // min u·v over [−1, 2] × [−1, 1]: value −2 at (2, −1)
    let p = box_problem(&[0.0, 1.0, 1.0, 0.0], &[0.0, 0.0], &[-1.0, -1.0], &[2.0, 1.0], vec![]);
    let rep = solve(&p, &SolverConfig::default()).unwrap();
    assert_eq!(rep.status, SolveStatus::Optimal);
    assert!((rep.value + 2.0).abs() < 1e-6);
    assert!(rep.bound <= rep.value + 1e-12);
}

#[test]
fn concave_square_is_branched() {
    // min −v² + 0.5 v over [−1, 2]: value −3 at v = 2
    let p = box_problem(&[-2.0], &[0.5], &[-1.0], &[2.0], vec![]);
    let rep = solve(&p, &SolverConfig::default()).unwrap();
    assert!((rep.value + 3.0).abs() < 1e-6, "{}", rep.value);
    let en = solve_by_enumeration(&p, &SolverConfig::default()).unwrap();
    assert!(en.heuristic_leaf);
    assert!((en.value + 3.0).abs() < 1e-6);
}

#[test]
fn bilinear_without_box_is_rejected() {
    let p = box_problem(&[0.0, 1.0, 1.0, 0.0], &[0.0, 0.0], &[0.0, f64::NEG_INFINITY], &[1.0, f64::INFINITY], vec![]);
    assert!(matches!(solve(&p, &SolverConfig::default()), Err(Error::UnboundedBilinear(1))));
}

#[test]
fn too_many_binaries_refused() {
    let n = 21;
    let p = MiqpProblem {
        objective: QuadForm::zeros(n),
        eq: LinearRows::empty(n),
        ge: LinearRows::empty(n),
        lower: vec![0.0; n],
        upper: vec![1.0; n],
        binaries: (0..n).collect(),
    };
    assert!(matches!(
        solve_by_enumeration(&p, &SolverConfig::default()),
        Err(Error::TooManyBinaries(21, 20))
    ));
}

#[test]
fn warm_start_seeds_incumbent() {
    let (enc, p) = t1_problem();
    let mut cfg = SolverConfig::default();
    let cold = solve(&p, &cfg).unwrap();
    cfg.warm_start = cold.incumbent.clone();
    let warm = solve(&p, &cfg).unwrap();
    assert!(warm.value <= cold.value + 1e-12);
    assert!(warm.nodes <= cold.nodes);
    assert_eq!(warm.incumbent.unwrap().len(), enc.num_vars());
}

#[test]
fn node_log_bounds_are_monotone() {
    let (_, p) = t1_problem();
    let cfg = SolverConfig {
        log_nodes: true,
        ..SolverConfig::default()
    };
    let rep = solve(&p, &cfg).unwrap();
    assert!(!rep.node_log.is_empty());
    for w in rep.node_log.windows(2) {
        assert!(w[1].incumbent <= w[0].incumbent);
    }
    let mut buf = Vec::new();
    rep.write_node_log(&mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("node,bound,incumbent\n"));
}

#[test]
fn projection_examples() {
    let e = LinearRows::empty(1);
    let p = project_polyhedron(&e, &e, &[0.0], &[1.0], &DVector::from_element(1, 2.0)).unwrap();
    assert!((p.x[0] - 1.0).abs() < 1e-12);
    let ge = LinearRows::from_rows(2, vec![(vec![1.0, 1.0], 1.0)]);
    let p = project_polyhedron(&LinearRows::empty(2), &ge, &[0.0, 0.0], &[f64::INFINITY; 2], &DVector::zeros(2)).unwrap();
    assert!((p.x[0] - 0.5).abs() < 1e-12 && (p.x[1] - 0.5).abs() < 1e-12);
}
