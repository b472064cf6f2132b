mod common;

use common::*;
use cqcap::oracle::{grid_capacity, GridSpec};
use cqcap::{
    constrained_capacity, holevo_quantity, random_channel, solve_fixed_lambda,
    unconstrained_capacity, CapacityOptions, CqChannel, EnsembleKind, SolverConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn costed(rng: &mut ChaCha8Rng, n: usize, m: usize) -> CqChannel {
    let kind = [
        EnsembleKind::Pure,
        EnsembleKind::Mixed,
        EnsembleKind::Diagonal,
    ][rng.random_range(0..3)];
    let costs = (0..n).map(|_| rng.random::<f64>()).collect();
    random_channel(n, m, rng.random(), kind)
        .unwrap()
        .with_costs(costs)
        .unwrap()
}

#[test]
fn capacity_is_monotone_in_the_budget() {
    let mut rng = ChaCha8Rng::seed_from_u64(400);
    let opts = CapacityOptions::with_epsilon(1e-7);
    for _ in 0..10 {
        let n = rng.random_range(2..=4);
        let ch = costed(&mut rng, n, 2);
        let s_max = ch.costs().iter().copied().fold(0.0, f64::max);
        let mut budgets: Vec<f64> = (0..4)
            .map(|_| ch.min_cost() + rng.random::<f64>() * (s_max - ch.min_cost()))
            .collect();
        budgets.sort_by(f64::total_cmp);
        let caps: Vec<f64> = budgets
            .iter()
            .map(|&s| constrained_capacity(&ch, s, &opts).unwrap().capacity)
            .collect();
        for w in caps.windows(2) {
            assert!(w[0] <= w[1] + 2.0 * opts.epsilon, "{caps:?} at {budgets:?}");
        }
    }
}

#[test]
fn budget_above_every_cost_is_inactive() {
    let mut rng = ChaCha8Rng::seed_from_u64(401);
    let opts = CapacityOptions::with_epsilon(1e-7);
    for _ in 0..10 {
        let n = rng.random_range(1..=4);
        let ch = costed(&mut rng, n, 3);
        let s_max = ch.costs().iter().copied().fold(0.0, f64::max);
        let a = constrained_capacity(&ch, s_max, &opts).unwrap();
        let b = unconstrained_capacity(&ch, &opts).unwrap();
        assert!(!a.constraint_active);
        assert!((a.capacity - b.capacity).abs() <= 2.0 * opts.epsilon);
    }
}

#[test]
fn capacity_matches_the_primal_value() {
    // at the returned multiplier, C = chi(p) - lambda (s^T p - S)
    let mut rng = ChaCha8Rng::seed_from_u64(402);
    let opts = CapacityOptions::with_epsilon(1e-7);
    for _ in 0..15 {
        let n = rng.random_range(2..=4);
        let m = rng.random_range(1..=3);
        let ch = costed(&mut rng, n, m);
        let s_max = ch.costs().iter().copied().fold(0.0, f64::max);
        let limit = ch.min_cost() + 0.4 * (s_max - ch.min_cost());
        let res = constrained_capacity(&ch, limit, &opts).unwrap();
        let chi = holevo_quantity(&ch, &res.p).unwrap();
        let primal = chi - res.lambda * (res.expected_cost - limit);
        assert!(
            (res.capacity - primal).abs() <= 2.0 * opts.epsilon,
            "{} vs {primal}",
            res.capacity
        );
        assert!(res.gap_certificate[0] <= res.capacity + 1e-12);
        assert!(res.capacity <= res.gap_certificate[1] + 1e-12);
        assert_eq!(res.cost_monotonicity_violations(2.0 * opts.epsilon), 0);
    }
}

#[test]
fn optimizer_cost_is_non_increasing_in_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(403);
    for _ in 0..15 {
        let n = rng.random_range(2..=4);
        // mixed states with n <= m^2 keep the optimizer unique
        let costs = (0..n).map(|_| rng.random::<f64>()).collect();
        let ch = random_channel(n, 3, rng.random(), EnsembleKind::Mixed)
            .unwrap()
            .with_costs(costs)
            .unwrap();
        let eps = 1e-9;
        let mut prev = f64::INFINITY;
        for lambda in [0.0, 0.1, 0.3, 0.7, 1.5, 3.0] {
            let (res, _) =
                solve_fixed_lambda(&ch, &SolverConfig::with_lambda(lambda, eps), None).unwrap();
            assert!(
                res.expected_cost <= prev + 2.0 * eps.sqrt(),
                "{} after {prev}",
                res.expected_cost
            );
            prev = res.expected_cost;
        }
    }
}

#[test]
fn constrained_value_agrees_with_budgeted_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let opts = CapacityOptions::with_epsilon(1e-7);
    for _ in 0..8 {
        let ch = costed(&mut rng, 2, 2);
        let s_max = ch.costs().iter().copied().fold(0.0, f64::max);
        let limit = ch.min_cost() + 0.5 * (s_max - ch.min_cost());
        let res = constrained_capacity(&ch, limit, &opts).unwrap();
        let grid = grid_capacity(&ch, &GridSpec::new(2000), Some(limit)).unwrap();
        assert!(grid.value <= res.gap_certificate[1] + 1e-9);
        assert!(grid.value >= res.capacity - grid.slack - 1e-9);
    }
}

#[test]
fn orthogonal_pair_with_budget() {
    let ch = orthogonal_pure(2).with_costs(vec![0.0, 1.0]).unwrap();
    let res = constrained_capacity(&ch, 0.3, &CapacityOptions::default()).unwrap();
    assert!((res.capacity - binary_entropy(0.3)).abs() < 1e-5);
    assert!((res.expected_cost - 0.3).abs() <= 1e-6);
}
