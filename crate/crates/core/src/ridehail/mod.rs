//! Competing ride-hailing platforms (leaders) and their subscribed drivers (followers).
//!
//! Platform `i` sets a price `p^{i,h}` and a wage `w^{i,h}` per area `h`; its drivers choose
//! how much to work in each area, `y^i_{ν,h} ∈ [0, C^h]`, and jointly guarantee at least
//! `d̄^{i,h}` rides per area. Market shares in the demand formula are frozen at a reference
//! driver availability, which keeps each platform's cost separable and the game an exact
//! potential game.

pub mod batch;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    AffineRows, BoxBounds, EquilibriumMode, Follower, FollowerConstraints, FollowerCost,
    HierarchicalGame, LeaderBlock, LeaderSpec, QuadForm, SharedRows, SCHEMA_VERSION,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShareMode {
    /// Every platform's share in area `h` is `C^h / (p̄ N)`.
    #[default]
    FrozenUniform,
    /// Shares from `reference_availability`; breaks the exact potential unless uniform.
    FrozenPerPlatform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RidehailParams {
    pub platforms: usize,
    pub drivers: usize,
    pub areas: usize,
    /// `p̄`, strictly above every area cap.
    pub max_price: f64,
    /// `p̄^h`.
    pub area_price_cap: Vec<f64>,
    pub wage_lb: f64,
    /// `w̄^{i,h}`, indexed `[platform][area]`.
    pub wage_ub: Vec<Vec<f64>>,
    /// `θ̄`.
    pub substitutability: f64,
    /// `C^h`.
    pub customers: Vec<f64>,
    /// `B^{ν,h}`, indexed `[platform][driver][area]`.
    pub preference: Vec<Vec<Vec<f64>>>,
    /// `s^{ν,h}` in meters, indexed `[platform][driver][area]`.
    pub distance: Vec<Vec<Vec<f64>>>,
    pub beta: f64,
    /// `Q^h`.
    pub congestion: Vec<f64>,
    /// `d̄^{i,h}`, indexed `[platform][area]`.
    pub min_rides: Vec<Vec<f64>>,
    pub share_mode: ShareMode,
    /// `K̂^{i,h}` used to freeze the shares, indexed `[platform][area]`.
    pub reference_availability: Vec<Vec<f64>>,
    pub big_m: f64,
    pub omega: f64,
}

pub const MAX_PRICE: f64 = 32.0;
pub const WAGE_LB: f64 = 12.0;
pub const SUBSTITUTABILITY: f64 = 0.9;
pub const MIN_RIDE_FRACTION: f64 = 0.2;

/// Draw an instance; the same `(platforms, drivers, areas, seed)` always gives the same draw.
pub fn sample_params(platforms: usize, drivers: usize, areas: usize, seed: u64) -> Result<RidehailParams> {
    if platforms == 0 || drivers == 0 || areas == 0 {
        return Err(Error::InvalidInput(format!(
            "dimensions must be positive (platforms {platforms}, drivers {drivers}, areas {areas})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = |lo: f64, hi: f64| rng.gen_range(lo..hi);
    let area_price_cap: Vec<f64> = (0..areas).map(|_| u(16.0, 30.0)).collect();
    let wage_ub: Vec<Vec<f64>> = (0..platforms)
        .map(|_| (0..areas).map(|_| u(20.0, 28.0)).collect())
        .collect();
    let customers: Vec<f64> = (0..areas).map(|_| u(50.0, 100.0)).collect();
    let mut per_driver = |lo: f64, hi: f64| -> Vec<Vec<Vec<f64>>> {
        (0..platforms)
            .map(|_| (0..drivers).map(|_| (0..areas).map(|_| u(lo, hi)).collect()).collect())
            .collect()
    };
    let preference = per_driver(6.0, 15.0);
    let distance = per_driver(50.0, 5000.0);
    let beta = u(0.001, 0.1);
    let congestion: Vec<f64> = (0..areas).map(|_| u(70.0, 150.0)).collect();
    let min_rides = (0..platforms)
        .map(|_| customers.iter().map(|c| MIN_RIDE_FRACTION * c).collect())
        .collect();
    Ok(RidehailParams {
        platforms,
        drivers,
        areas,
        max_price: MAX_PRICE,
        area_price_cap,
        wage_lb: WAGE_LB,
        wage_ub,
        substitutability: SUBSTITUTABILITY,
        customers,
        preference,
        distance,
        beta,
        congestion,
        min_rides,
        share_mode: ShareMode::FrozenUniform,
        reference_availability: vec![vec![drivers as f64; areas]; platforms],
        big_m: 200.0,
        omega: 0.1,
    })
}

impl RidehailParams {
    /// `A^{ν,h} = C^h / (s^{ν,h} β)`.
    pub fn willingness(&self, i: usize, nu: usize, h: usize) -> f64 {
        self.customers[h] / (self.distance[i][nu][h] * self.beta)
    }

    /// Frozen share factor `σ^{i,h}`.
    pub fn share(&self, i: usize, h: usize) -> f64 {
        match self.share_mode {
            ShareMode::FrozenUniform => self.customers[h] / (self.max_price * self.platforms as f64),
            ShareMode::FrozenPerPlatform => {
                let total: f64 = self.reference_availability.iter().map(|k| k[h]).sum();
                self.customers[h] * self.reference_availability[i][h] / (self.max_price * total)
            }
        }
    }

    fn cross_price_weight(&self) -> f64 {
        if self.platforms > 1 {
            self.substitutability / (self.platforms - 1) as f64
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m, h) = (self.platforms, self.drivers, self.areas);
        let mut issues = Vec::new();
        if n == 0 || m == 0 || h == 0 {
            issues.push("dimensions must be positive".to_string());
        }
        let shape_ok = self.area_price_cap.len() == h
            && self.customers.len() == h
            && self.congestion.len() == h
            && self.wage_ub.len() == n
            && self.wage_ub.iter().all(|r| r.len() == h)
            && self.min_rides.len() == n
            && self.min_rides.iter().all(|r| r.len() == h)
            && self.reference_availability.len() == n
            && self.reference_availability.iter().all(|r| r.len() == h)
            && [&self.preference, &self.distance]
                .iter()
                .all(|t| t.len() == n && t.iter().all(|d| d.len() == m && d.iter().all(|a| a.len() == h)));
        if !shape_ok {
            issues.push("parameter arrays do not match (platforms, drivers, areas)".to_string());
            return Err(Error::InvalidInput(issues.join("; ")));
        }
        let cap_max = self.area_price_cap.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(self.max_price > cap_max) {
            issues.push(format!("max price {} must exceed every area cap (max {cap_max})", self.max_price));
        }
        if self.area_price_cap.iter().any(|&p| !(p >= 0.0)) {
            issues.push("area price caps must be nonnegative".into());
        }
        if self.wage_ub.iter().flatten().any(|&w| !(w >= self.wage_lb)) {
            issues.push("wage upper bounds must be at least the wage lower bound".into());
        }
        if !(0.0..=1.0).contains(&self.substitutability) {
            issues.push("substitutability must lie in [0, 1]".into());
        }
        if self.customers.iter().chain(&self.congestion).any(|&v| !(v > 0.0)) {
            issues.push("customer masses and congestion coefficients must be positive".into());
        }
        if !(self.beta > 0.0) || self.distance.iter().flatten().flatten().any(|&s| !(s > 0.0)) {
            issues.push("beta and distances must be positive".into());
        }
        for i in 0..n {
            for a in 0..h {
                let d = self.min_rides[i][a];
                if d > self.customers[a] {
                    issues.push(format!(
                        "minimum rides {d} of platform {} in area {} exceed the customer mass {}",
                        i + 1,
                        a + 1,
                        self.customers[a]
                    ));
                }
            }
        }
        if self.reference_availability.iter().flatten().any(|&k| !(k > 0.0)) {
            issues.push("reference availability must be positive".into());
        }
        if !(self.big_m > 0.0) || !(self.omega > 0.0 && self.omega < 1.0) {
            issues.push("big-M must be positive and omega in (0, 1)".into());
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInput(issues.join("; ")))
        }
    }
}

/// `d^{i,h} = σ (p̄ − p̄^h + θ̄/(N−1) Σ_{j≠i} p^{j,h})`; `prices` holds every platform's price in area `h`.
pub fn demand(params: &RidehailParams, i: usize, h: usize, prices: &[f64], share: f64) -> f64 {
    let others: f64 = prices.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p).sum();
    share * (params.max_price - params.area_price_cap[h] + params.cross_price_weight() * others)
}

/// Index of `p^{i,h}` and `w^{i,h}` inside one platform's decision.
pub fn price_index(h: usize) -> usize {
    h
}

pub fn wage_index(areas: usize, h: usize) -> usize {
    areas + h
}

pub fn build_game(params: &RidehailParams) -> Result<HierarchicalGame> {
    let (n_pl, m, hh) = (params.platforms, params.drivers, params.areas);
    for (i, row) in params.min_rides.iter().enumerate() {
        for (h, &d) in row.iter().enumerate() {
            if d > m as f64 * params.customers.get(h).copied().unwrap_or(f64::INFINITY) {
                return Err(Error::Infeasible(format!(
                    "platform {}: minimum rides in area {} exceed what its drivers can serve",
                    i + 1,
                    h + 1
                )));
            }
        }
    }
    params.validate()?;
    let n = 2 * hh;
    let n_total = n_pl * n;
    let theta = params.cross_price_weight();
    let mut leaders = Vec::with_capacity(n_pl);
    for i in 0..n_pl {
        // g^i over all platforms' (p, w)
        let mut cost_g = QuadForm::zeros(n_total);
        for h in 0..hh {
            let sigma = params.share(i, h);
            let own = i * n + price_index(h);
            cost_g.linear[own] = -sigma * (params.max_price - params.area_price_cap[h]);
            for j in (0..n_pl).filter(|&j| j != i) {
                cost_g.add_product(own, j * n + price_index(h), -sigma * theta);
            }
        }
        // h^i = Σ_h w_h Σ_ν y_{ν,h}
        let mut cost_h = QuadForm::zeros(n + m * hh);
        for h in 0..hh {
            for nu in 0..m {
                cost_h.add_product(wage_index(hh, h), n + nu * hh + h, 1.0);
            }
        }
        let followers = (0..m)
            .map(|nu| {
                let a_diag: Vec<f64> = (0..hh).map(|h| 2.0 * params.willingness(i, nu, h)).collect();
                let mut r = DMatrix::zeros(hh, n);
                for h in 0..hh {
                    r[(h, wage_index(hh, h))] = -1.0;
                }
                let mut d_own = DMatrix::zeros(2 * hh, hh);
                let mut e = DVector::zeros(2 * hh);
                for h in 0..hh {
                    d_own[(h, h)] = 1.0;
                    d_own[(hh + h, h)] = -1.0;
                    e[hh + h] = -params.customers[h];
                }
                Follower {
                    dim: hh,
                    cost: FollowerCost {
                        q_mat: DMatrix::from_diagonal(&DVector::from_vec(a_diag)),
                        q: DVector::from_fn(hh, |h, _| params.congestion[h] - params.preference[i][nu][h]),
                        r,
                        coupling: vec![None; m],
                        c0: 0.0,
                    },
                    constraints: FollowerConstraints {
                        d_own,
                        d_cross: vec![None; m],
                        a: DMatrix::zeros(2 * hh, n),
                        e,
                    },
                }
            })
            .collect();
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for h in 0..hh {
            upper[price_index(h)] = params.area_price_cap[h];
            lower[wage_index(hh, h)] = params.wage_lb;
            upper[wage_index(hh, h)] = params.wage_ub[i][h];
        }
        leaders.push(LeaderSpec {
            n,
            g_rows: AffineRows::empty(n),
            x_bounds: BoxBounds::new(lower, upper),
            cost_g,
            cost_h,
            followers,
            shared: SharedRows {
                b: DMatrix::zeros(hh, n),
                e: vec![DMatrix::identity(hh, hh); m],
                c: DVector::from_vec(params.min_rides[i].clone()),
            },
        });
    }
    let potential_w = match params.share_mode {
        ShareMode::FrozenUniform => Some(build_potential(params)?),
        ShareMode::FrozenPerPlatform => None,
    };
    Ok(HierarchicalGame {
        version: SCHEMA_VERSION,
        instance_id: format!("ridehail-n{n_pl}-m{m}-h{hh}"),
        seed: None,
        mode: EquilibriumMode::Variational,
        leaders,
        potential_w,
    })
}

/// `W(x) = −Σ_h σ^h [(p̄ − p̄^h) Σ_i p^{i,h} + θ̄/(N−1) Σ_{i<j} p^{i,h} p^{j,h}]`.
pub fn build_potential(params: &RidehailParams) -> Result<QuadForm> {
    if params.share_mode != ShareMode::FrozenUniform {
        return Err(Error::InvalidInput(
            "an exact potential exists only with frozen-uniform shares".into(),
        ));
    }
    let (n_pl, hh) = (params.platforms, params.areas);
    let n = 2 * hh;
    let theta = params.cross_price_weight();
    let mut w = QuadForm::zeros(n_pl * n);
    for h in 0..hh {
        let sigma = params.share(0, h);
        for i in 0..n_pl {
            let a = i * n + price_index(h);
            w.linear[a] = -sigma * (params.max_price - params.area_price_cap[h]);
            for j in i + 1..n_pl {
                w.add_product(a, j * n + price_index(h), -sigma * theta);
            }
        }
    }
    Ok(w)
}

/// Profit decomposition and service level of one platform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlatformMetrics {
    /// `−F^i = revenue − wage_bill`.
    pub profit: f64,
    pub revenue: f64,
    pub wage_bill: f64,
    /// `100 Σ_ν y_{ν,h} / C^h` per area.
    pub satisfaction: Vec<f64>,
}

pub fn metrics(params: &RidehailParams, z: &[LeaderBlock]) -> Result<Vec<PlatformMetrics>> {
    let (n_pl, hh) = (params.platforms, params.areas);
    if z.len() != n_pl || z.iter().any(|b| b.x.len() != 2 * hh || b.y.len() != params.drivers) {
        return Err(Error::Dimension("state does not match the ride-hail parameters".into()));
    }
    let mut out = Vec::with_capacity(n_pl);
    for i in 0..n_pl {
        let b = &z[i];
        let mut revenue = 0.0;
        let mut wage_bill = 0.0;
        let mut satisfaction = Vec::with_capacity(hh);
        for h in 0..hh {
            let prices: Vec<f64> = z.iter().map(|bj| bj.x[price_index(h)]).collect();
            let d = demand(params, i, h, &prices, params.share(i, h));
            let k: f64 = b.y.iter().map(|y| y[h]).sum();
            revenue += b.x[price_index(h)] * d;
            wage_bill += b.x[wage_index(hh, h)] * k;
            satisfaction.push(100.0 * k / params.customers[h]);
        }
        out.push(PlatformMetrics {
            profit: revenue - wage_bill,
            revenue,
            wage_bill,
            satisfaction,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{joint_cost, potential, validate_game};

    #[test]
    fn sampled_values_lie_in_their_ranges() {
        for seed in 0..20 {
            let p = sample_params(3, 4, 2, seed).unwrap();
            assert!(p.area_price_cap.iter().all(|v| (16.0..30.0).contains(v)));
            assert!(p.wage_ub.iter().flatten().all(|v| (20.0..28.0).contains(v)));
            assert!(p.customers.iter().all(|v| (50.0..100.0).contains(v)));
            assert!(p.preference.iter().flatten().flatten().all(|v| (6.0..15.0).contains(v)));
            assert!(p.distance.iter().flatten().flatten().all(|v| (50.0..5000.0).contains(v)));
            assert!((0.001..0.1).contains(&p.beta));
            assert!(p.congestion.iter().all(|v| (70.0..150.0).contains(v)));
            assert_eq!(p.max_price, 32.0);
            assert_eq!(p.wage_lb, 12.0);
            assert_eq!(p.substitutability, 0.9);
            for i in 0..3 {
                for h in 0..2 {
                    assert_eq!(p.min_rides[i][h], 0.2 * p.customers[h]);
                }
            }
            p.validate().unwrap();
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_params(2, 3, 2, 9).unwrap(), sample_params(2, 3, 2, 9).unwrap());
        assert_ne!(sample_params(2, 3, 2, 9).unwrap(), sample_params(2, 3, 2, 10).unwrap());
    }

    #[test]
    fn full_scale_dimensions() {
        let p = sample_params(5, 10, 3, 1).unwrap();
        let g = build_game(&p).unwrap();
        assert_eq!(g.num_leaders(), 5);
        assert!(g.leaders.iter().all(|l| l.num_followers() == 10 && l.n == 6));
        assert!(g.leaders.iter().all(|l| l.followers.iter().all(|f| f.dim == 3)));
        assert!(sample_params(0, 1, 1, 0).is_err());
    }

    #[test]
    fn demand_examples() {
        let mut p = sample_params(5, 1, 1, 0).unwrap();
        p.customers = vec![80.0];
        p.area_price_cap = vec![20.0];
        let sigma = p.share(0, 0);
        assert_eq!(sigma, 0.5);
        let d = demand(&p, 0, 0, &[7.0, 20.0, 20.0, 20.0, 20.0], sigma);
        assert!((d - 15.0).abs() < 1e-12);
        p.substitutability = 0.0;
        assert!((demand(&p, 0, 0, &[1.0, 3.0, 5.0, 7.0, 9.0], sigma) - 6.0).abs() < 1e-12);
        p.substitutability = 0.9;
        assert!((demand(&p, 0, 0, &[0.0; 5], sigma) - 6.0).abs() < 1e-12);
        let single = sample_params(1, 1, 1, 0).unwrap();
        let s = single.share(0, 0);
        assert_eq!(demand(&single, 0, 0, &[3.0], s), s * (32.0 - single.area_price_cap[0]));
    }

    #[test]
    fn generated_games_are_valid_and_strictly_convex() {
        for seed in 0..5 {
            let p = sample_params(3, 3, 2, seed).unwrap();
            let g = build_game(&p).unwrap();
            let rep = validate_game(&g);
            assert!(rep.is_valid(), "{:?}", rep.issues);
            for l in &g.leaders {
                for f in &l.followers {
                    for h in 0..2 {
                        assert!(f.cost.q_mat[(h, h)] > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn two_platform_potential_matches_symbolic_form() {
        let mut p = sample_params(2, 1, 1, 4).unwrap();
        p.substitutability = 1.0;
        p.customers = vec![32.0 * 2.0];
        let w = build_potential(&p).unwrap();
        let cap = p.area_price_cap[0];
        let eval = |p1: f64, p2: f64| w.eval(&DVector::from_vec(vec![p1, 15.0, p2, 15.0]));
        let expect = |p1: f64, p2: f64| -((32.0 - cap) * (p1 + p2) + p1 * p2);
        for (a, b) in [(0.0, 0.0), (3.0, 7.5), (10.0, 1.0)] {
            assert!((eval(a, b) - expect(a, b)).abs() < 1e-10);
        }
    }

    #[test]
    fn unreachable_minimum_rides_are_infeasible() {
        let mut p = sample_params(2, 2, 1, 0).unwrap();
        p.min_rides[1][0] = 2.5 * p.customers[0];
        assert!(matches!(build_game(&p), Err(Error::Infeasible(_))));
    }

    #[test]
    fn per_platform_shares_refuse_potential() {
        let mut p = sample_params(2, 2, 1, 0).unwrap();
        p.share_mode = ShareMode::FrozenPerPlatform;
        assert!(build_potential(&p).is_err());
        assert!(build_game(&p).unwrap().potential_w.is_none());
    }

    #[test]
    fn unilateral_deviation_identity() {
        let p = sample_params(3, 2, 2, 11).unwrap();
        let g = build_game(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let random_state = |rng: &mut ChaCha8Rng| -> Vec<LeaderBlock> {
            g.leaders
                .iter()
                .map(|l| {
                    let mut b = LeaderBlock::zeros(l, g.mode);
                    for a in 0..l.n {
                        b.x[a] = rng.gen_range(l.x_bounds.lower[a]..=l.x_bounds.upper[a]);
                    }
                    for y in b.y.iter_mut() {
                        for v in y.iter_mut() {
                            *v = rng.gen_range(0.0..30.0);
                        }
                    }
                    b
                })
                .collect()
        };
        for _ in 0..20 {
            let z = random_state(&mut rng);
            let i = rng.gen_range(0..3);
            let mut z2 = z.clone();
            z2[i] = random_state(&mut rng).swap_remove(i);
            let dp = potential(&g, &z2).unwrap() - potential(&g, &z).unwrap();
            let dj = joint_cost(&g, i, &z2).unwrap() - joint_cost(&g, i, &z).unwrap();
            assert!((dp - dj).abs() <= 1e-8 * (1.0 + dj.abs()));
        }
    }

    #[test]
    fn satisfaction_at_the_minimum() {
        let p = sample_params(2, 4, 2, 3).unwrap();
        let g = build_game(&p).unwrap();
        let z: Vec<LeaderBlock> = (0..2)
            .map(|i| {
                let mut b = LeaderBlock::zeros(&g.leaders[i], g.mode);
                for y in b.y.iter_mut() {
                    for h in 0..2 {
                        y[h] = p.min_rides[i][h] / 4.0;
                    }
                }
                b
            })
            .collect();
        for m in metrics(&p, &z).unwrap() {
            for s in m.satisfaction {
                assert!((s - 20.0).abs() < 1e-9);
            }
            assert!((m.profit - (m.revenue - m.wage_bill)).abs() < 1e-12);
        }
    }

    #[test]
    fn metrics_profit_is_negated_leader_cost() {
        let p = sample_params(3, 2, 2, 8).unwrap();
        let g = build_game(&p).unwrap();
        let mut z: Vec<LeaderBlock> = g.leaders.iter().map(|l| LeaderBlock::zeros(l, g.mode)).collect();
        for (i, b) in z.iter_mut().enumerate() {
            b.x = DVector::from_vec(vec![18.0, 17.0 + i as f64, 13.0, 14.0]);
            b.y[0] = DVector::from_vec(vec![5.0, 6.0]);
            b.y[1] = DVector::from_vec(vec![7.0, 8.0 + i as f64]);
        }
        let m = metrics(&p, &z).unwrap();
        for i in 0..3 {
            let f = joint_cost(&g, i, &z).unwrap();
            assert!((m[i].profit + f).abs() < 1e-9);
        }
    }
}
