//! Proximal Gauss-Seidel and extra-gradient dynamics on generated games.

mod common;

use lfne::baseline::{followers_eg_step, leaders_eg_step};
use lfne::model::fixtures::{random_game, RandomShape};
use lfne::model::{leader_gradient, potential, pseudogradient, HierarchicalGame};
use lfne::pgs::{self, cost_to_move, tau_update, Icrf, PgsConfig, VerifyConfig};
use lfne::solver::SolverConfig;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::random_state;

fn shape(leaders: usize) -> RandomShape {
    RandomShape {
        leaders,
        leader_dim: 1,
        max_followers: 2,
        max_follower_dim: 2,
        max_binaries: 6,
        follower_coupling: true,
        bilinear: false,
    }
}

fn rows_violation(rows: &lfne::solver::qp::LinearRows, v: &DVector<f64>) -> f64 {
    let act = &rows.matrix * v;
    (0..rows.len()).map(|k| rows.rhs[k] - act[k]).fold(0.0, f64::max)
}

fn feasible_followers(g: &HierarchicalGame, x: &[DVector<f64>]) -> Vec<Vec<DVector<f64>>> {
    // one EG step from zero lands on the projection, which is feasible
    (0..g.num_leaders())
        .map(|i| {
            let zero: Vec<DVector<f64>> = g.leaders[i].followers.iter().map(|f| DVector::zeros(f.dim)).collect();
            followers_eg_step(g, i, &x[i], &zero, 0.0).unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tau_law(tau in 1e-6f64..10.0, omega in 0.01f64..0.99, d in 0.0f64..20.0) {
        let next = tau_update(tau, omega, d);
        prop_assert!(next <= tau);
        prop_assert!(next >= omega * tau);
        if d <= omega * tau {
            prop_assert_eq!(next, omega * tau);
        }
        if d >= tau {
            prop_assert_eq!(next, tau);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pgs_descends_and_certifies(seed in 0u64..10_000, leaders in 2usize..4, approx: bool) {
        let g = random_game(seed, &shape(leaders));
        let cfg = PgsConfig {
            icrf: if approx { Icrf::EuclideanApprox } else { Icrf::SquaredEuclidean },
            omega: 0.5,
            ..PgsConfig::default()
        };
        let out = pgs::run(&g, &cfg).unwrap();
        let gap = SolverConfig::default().gap_tol;
        prop_assert!(out.trajectory.validate(cfg.omega, leaders as f64 * gap).is_ok());
        prop_assert!(out.trajectory.final_potential <= out.trajectory.initial_potential + leaders as f64 * gap);
        prop_assert!((potential(&g, &out.state).unwrap() - out.trajectory.final_potential).abs() < 1e-9);
        if out.converged() {
            let rep = pgs::verify_equilibrium(&g, &out.state, &VerifyConfig::default()).unwrap();
            prop_assert!(rep.certified, "seed {seed}: {:?}", rep.leaders);
        }
    }

    #[test]
    fn tiny_eg_steps_stay_feasible_and_close(seed in 0u64..10_000, state_seed: u64, alpha in 1e-6f64..1e-2) {
        let g = random_game(seed, &shape(2));
        let mut rng = ChaCha8Rng::seed_from_u64(state_seed);
        let boxed: Vec<DVector<f64>> = random_state(&g, &mut rng, 1.0).into_iter().map(|b| b.x).collect();
        // the box draw can break coupling rows; a zero-length step projects onto the leader sets
        let x = leaders_eg_step(&g, &boxed, &feasible_followers(&g, &boxed), 0.0).unwrap();
        let y = feasible_followers(&g, &x);
        let x_next = leaders_eg_step(&g, &x, &y, alpha).unwrap();
        for (i, l) in g.leaders.iter().enumerate() {
            prop_assert!(pgs::leader_infeasibility(l, &x_next[i]) <= 1e-7);
            // nonexpansive projection: the step is at most α times the operator at the predictor,
            // which stays within a factor 2 of the operator at x for these step sizes
            let vx = leader_gradient(&g, i, &x, &y[i]).unwrap().norm();
            prop_assert!((&x_next[i] - &x[i]).norm() <= 2.0 * alpha * vx.max(1.0) + 1e-8);
            let y_next = followers_eg_step(&g, i, &x[i], &y[i], alpha).unwrap();
            let stacked = |v: &[DVector<f64>]| DVector::from_iterator(l.follower_dim(), v.iter().flat_map(|b| b.iter().copied()));
            let (a, b) = (stacked(&y_next), stacked(&y[i]));
            prop_assert!(rows_violation(&l.follower_polyhedron(&x[i]), &a) <= 1e-7);
            let vy = pseudogradient(&g, i, &x[i], &y[i]).unwrap().norm();
            prop_assert!((&a - &b).norm() <= 2.0 * alpha * vy.max(1.0) + 1e-8);
        }
    }

    #[test]
    fn cost_to_move_is_a_regularizer(seed in 0u64..1000, state_seed: u64, approx: bool) {
        let g = random_game(seed, &shape(2));
        let kind = if approx { Icrf::EuclideanApprox } else { Icrf::SquaredEuclidean };
        let mut rng = ChaCha8Rng::seed_from_u64(state_seed);
        let a = random_state(&g, &mut rng, 1.0);
        let b = random_state(&g, &mut rng, 1.0);
        prop_assert_eq!(cost_to_move(&a, &a, kind).unwrap(), 0.0);
        let d = cost_to_move(&a, &b, kind).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!((d - cost_to_move(&b, &a, kind).unwrap()).abs() <= 1e-12 * (1.0 + d));
    }
}
