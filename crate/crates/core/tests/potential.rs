//! Exact-potential identity and ride-hail generator properties.

mod common;

use lfne::model::fixtures::{random_game, RandomShape};
use lfne::model::{joint_cost, potential, validate_game};
use lfne::ridehail::{build_game, metrics, sample_params, MIN_RIDE_FRACTION};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::random_state;

fn multi_leader() -> RandomShape {
    RandomShape {
        leaders: 3,
        leader_dim: 2,
        max_followers: 2,
        max_follower_dim: 2,
        max_binaries: 8,
        follower_coupling: true,
        bilinear: false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_games_have_an_exact_potential(game_seed in 0u64..500, dev_seed: u64) {
        let g = random_game(game_seed, &multi_leader());
        let mut rng = ChaCha8Rng::seed_from_u64(dev_seed);
        let z = random_state(&g, &mut rng, 2.0);
        let i = rng.gen_range(0..g.num_leaders());
        let mut z2 = z.clone();
        z2[i] = random_state(&g, &mut rng, 2.0).swap_remove(i);
        let dp = potential(&g, &z2).unwrap() - potential(&g, &z).unwrap();
        let dj = joint_cost(&g, i, &z2).unwrap() - joint_cost(&g, i, &z).unwrap();
        prop_assert!((dp - dj).abs() <= 1e-9 * (1.0 + dj.abs()), "ΔP {dp} vs ΔJ {dj}");
    }

    #[test]
    fn ridehail_games_have_an_exact_potential(
        platforms in 1usize..4,
        drivers in 1usize..4,
        areas in 1usize..3,
        seed in 0u64..10_000,
        dev_seed: u64,
    ) {
        let p = sample_params(platforms, drivers, areas, seed).unwrap();
        let g = build_game(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(dev_seed);
        let z = random_state(&g, &mut rng, 30.0);
        let i = rng.gen_range(0..platforms);
        let mut z2 = z.clone();
        z2[i] = random_state(&g, &mut rng, 30.0).swap_remove(i);
        let dp = potential(&g, &z2).unwrap() - potential(&g, &z).unwrap();
        let dj = joint_cost(&g, i, &z2).unwrap() - joint_cost(&g, i, &z).unwrap();
        prop_assert!((dp - dj).abs() <= 1e-8 * (1.0 + dj.abs()), "ΔP {dp} vs ΔJ {dj}");
    }

    #[test]
    fn sampled_params_are_deterministic_and_in_range(
        platforms in 1usize..5,
        drivers in 1usize..5,
        areas in 1usize..4,
        seed: u64,
    ) {
        let p = sample_params(platforms, drivers, areas, seed).unwrap();
        prop_assert_eq!(&p, &sample_params(platforms, drivers, areas, seed).unwrap());
        prop_assert!(p.area_price_cap.iter().all(|v| (16.0..30.0).contains(v) && *v < p.max_price));
        prop_assert!(p.wage_ub.iter().flatten().all(|v| (20.0..28.0).contains(v) && *v > p.wage_lb));
        prop_assert!(p.customers.iter().all(|v| (50.0..100.0).contains(v)));
        prop_assert!(p.distance.iter().flatten().flatten().all(|v| (50.0..5000.0).contains(v)));
        prop_assert!(p.preference.iter().flatten().flatten().all(|v| (6.0..15.0).contains(v)));
        prop_assert!(p.congestion.iter().all(|v| (70.0..150.0).contains(v)));
        prop_assert!((0.001..0.1).contains(&p.beta));
        for row in &p.min_rides {
            for (d, c) in row.iter().zip(&p.customers) {
                prop_assert!((d - MIN_RIDE_FRACTION * c).abs() < 1e-12);
            }
        }
        let g = build_game(&p).unwrap();
        let rep = validate_game(&g);
        prop_assert!(rep.is_valid(), "{:?}", rep.issues);
    }

    #[test]
    fn metrics_split_profit_into_revenue_and_wages(seed in 0u64..1000, state_seed: u64) {
        let p = sample_params(3, 2, 2, seed).unwrap();
        let g = build_game(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(state_seed);
        let z = random_state(&g, &mut rng, 30.0);
        for (i, m) in metrics(&p, &z).unwrap().iter().enumerate() {
            prop_assert!((m.profit - (m.revenue - m.wage_bill)).abs() <= 1e-9 * (1.0 + m.profit.abs()));
            let j = joint_cost(&g, i, &z).unwrap();
            prop_assert!((m.profit + j).abs() <= 1e-8 * (1.0 + j.abs()), "profit {} vs −J {}", m.profit, -j);
        }
    }
}

#[test]
fn other_seeds_change_the_draw() {
    assert_ne!(sample_params(3, 3, 2, 1).unwrap(), sample_params(3, 3, 2, 2).unwrap());
}
