//! Maximin objective, solver, best responses and property checks.

mod common;

use common::*;
use olp_core::bounds::BoundModel;
use olp_core::numerics::zero_sum_value;
use olp_core::perception::{MaskShape, PerceptionFamily};
use olp_core::solver::{
    best_response_lower, best_response_upper, check_constant_gap, check_narrowly_reversible,
    maximin_objective, solve_maximin, stackelberg_gap_probe, GameInstance, Verdict,
};
use olp_core::{unit, Capability, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn zero_sum(family: &PerceptionFamily, u: Matrix, c1: Capability, c2: Capability) -> GameInstance {
    GameInstance::new(family.clone(), u, None, c1, c2).unwrap()
}

/// Column payoffs `P⁻(u1, c1, x, e_k)` sorted, to measure how unique the active branch is.
fn branch_gap(game: &GameInstance, x: &[f64]) -> f64 {
    let model = game.row_model().unwrap();
    let n = game.shape().1;
    let mut v: Vec<f64> = (0..n).map(|k| model.lower(x, &unit(n, k))).collect();
    v.sort_by(f64::total_cmp);
    if v.len() < 2 { f64::INFINITY } else { v[1] - v[0] }
}

#[test]
fn subgradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let h = 1e-6;
    for f in families() {
        let mut instances = 0;
        while instances < 20 {
            let (m, n) = (rng.gen_range(2..=4), rng.gen_range(2..=4));
            let c = fin(rng.gen_range(1..=2));
            let u = random_perceived(&f, &mut rng, m, n, c);
            let game = zero_sum(&f, u, c, c.succ());
            let model = game.row_model().unwrap();
            let value = |p: &[f64]| (0..n).map(|k| model.lower(p, &unit(n, k))).fold(f64::INFINITY, f64::min);
            // instances with identical columns never have a unique active branch
            let points: Vec<Vec<f64>> = (0..2000)
                .map(|_| {
                    let x: Vec<f64> = random_point(&mut rng, m).iter().map(|a| 0.05 + 0.9 * a).collect();
                    let s: f64 = x.iter().sum();
                    x.iter().map(|a| a / s).collect::<Vec<f64>>()
                })
                .filter(|x| branch_gap(&game, x) >= 1e-4)
                .take(20)
                .collect();
            if points.len() < 20 {
                continue;
            }
            for x in &points {
                let (_, grad) = maximin_objective(&game, x).unwrap();
                for i in 0..m {
                    let mut hi = x.clone();
                    let mut lo = x.clone();
                    hi[i] += h;
                    lo[i] -= h;
                    let fd = (value(&hi) - value(&lo)) / (2.0 * h);
                    assert!((fd - grad[i]).abs() <= 1e-4, "{f:?} coordinate {i}: {fd} vs {}", grad[i]);
                }
            }
            instances += 1;
        }
    }
}

#[test]
fn objective_is_concave() {
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    for _ in 0..100 {
        for f in families() {
            let (m, n) = (rng.gen_range(2..=4), rng.gen_range(1..=4));
            let c = fin(rng.gen_range(1..=3));
            let game = zero_sum(&f, random_perceived(&f, &mut rng, m, n, c), c, c);
            let (x1, x2) = (random_point(&mut rng, m), random_point(&mut rng, m));
            let t: f64 = rng.gen();
            let mid: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| t * a + (1.0 - t) * b).collect();
            let v = |x: &[f64]| maximin_objective(&game, x).unwrap().0;
            assert!(v(&mid) >= t * v(&x1) + (1.0 - t) * v(&x2) - 1e-9);
        }
    }
}

#[test]
fn pure_columns_realize_the_minimum_over_mixed_strategies() {
    let mut rng = ChaCha8Rng::seed_from_u64(302);
    for _ in 0..30 {
        for f in families() {
            let (m, n) = (rng.gen_range(1..=4), rng.gen_range(2..=4));
            let c = fin(rng.gen_range(1..=2));
            let game = zero_sum(&f, random_perceived(&f, &mut rng, m, n, c), c, c);
            let x = random_point(&mut rng, m);
            let model = game.row_model().unwrap();
            let (pure, _) = maximin_objective(&game, &x).unwrap();
            let mut mixed_min = f64::INFINITY;
            for _ in 0..500 {
                let y = random_point(&mut rng, n);
                let value = model.lower(&x, &y);
                assert!(value >= pure - 1e-12, "{f:?}: mixed {value} below pure {pure}");
                mixed_min = mixed_min.min(value);
            }
            for k in 0..n {
                mixed_min = mixed_min.min(model.lower(&x, &unit(n, k)));
            }
            assert!((mixed_min - pure).abs() <= 1e-6);
        }
    }
}

#[test]
fn exact_perception_reduces_to_classical_minimax() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let inf = Capability::Infinite;
    for trial in 0..50 {
        let (m, n) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let a = random_matrix(&mut rng, m, n);
        let game = zero_sum(&PerceptionFamily::Masked, a.clone(), inf, inf);
        let sol = solve_maximin(&game, 1e-7, 200_000, trial).unwrap();
        let classical = zero_sum_value(&a, 1e-5).unwrap();
        assert!((sol.value - classical.value).abs() <= 2e-4, "{} vs {}", sol.value, classical.value);
    }
    // capability at or above the intrinsic one
    for trial in 0..20 {
        let (m, n) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
        let a = Matrix::new(m, n, (0..m * n).map(|_| rng.gen_range(-20..=20) as f64 / 10.0).collect()).unwrap();
        let game = zero_sum(&PerceptionFamily::Quantized, a.clone(), fin(1), fin(1));
        let model = game.row_model().unwrap();
        assert!(model.bounds(&random_point(&mut rng, m), &random_point(&mut rng, n)).width() > 0.0);
        let exact = zero_sum(&PerceptionFamily::Masked, a.clone(), fin((m * n) as u32), fin((m * n) as u32));
        let sol = solve_maximin(&exact, 1e-7, 200_000, trial).unwrap();
        let classical = zero_sum_value(&a, 1e-5).unwrap();
        assert!((sol.value - classical.value).abs() <= 2e-4);
    }
}

#[test]
fn quantized_best_responses_match_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(304);
    let f = PerceptionFamily::Quantized;
    for _ in 0..50 {
        let (m, n) = (rng.gen_range(1..=3), 2);
        let c = fin(rng.gen_range(1..=2));
        let v = random_perceived(&f, &mut rng, m, n, c);
        let game = zero_sum(&f, v.clone(), c, c);
        let model = BoundModel::new(&f, &v, c).unwrap();
        let x = random_point(&mut rng, m);
        let grid = |score: &dyn Fn(&[f64]) -> f64| {
            (0..=1000).map(|i| i as f64 / 1000.0).map(|t| score(&[t, 1.0 - t])).fold(f64::NEG_INFINITY, f64::max)
        };
        let y = best_response_upper(&game, &v, c, &x, 1e-9).unwrap();
        assert!((-model.upper(&x, &y) - grid(&|y| -model.upper(&x, y))).abs() < 1e-12);
        let y = best_response_lower(&game, &v, c, &x, 1e-9).unwrap();
        assert!((model.lower(&x, &y) - grid(&|y| model.lower(&x, y))).abs() < 1e-12);
    }
}

#[test]
fn limited_rank_best_responses_match_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(305);
    let f = PerceptionFamily::limited_rank();
    for _ in 0..20 {
        let v = rank_matrix(&mut rng, 3, 2, 1);
        let game = zero_sum(&f, v.clone(), fin(1), fin(1));
        let model = BoundModel::new(&f, &v, fin(1)).unwrap();
        let x = random_point(&mut rng, 3);
        let grid_min = (0..=10_000)
            .map(|i| i as f64 / 10_000.0)
            .map(|t| model.upper(&x, &[t, 1.0 - t]))
            .fold(f64::INFINITY, f64::min);
        let y = best_response_upper(&game, &v, fin(1), &x, 1e-9).unwrap();
        assert!(model.upper(&x, &y) - grid_min <= 1e-3);
    }
}

#[test]
fn constant_gap_verdicts() {
    for c in 1..=4 {
        let r = check_constant_gap(&PerceptionFamily::Quantized, fin(c), 200, 40 + c as u64);
        assert!(r.verdict.passed() && r.witnesses.is_empty(), "{r:?}");
        assert!(!r.exceptions.is_empty(), "zero-entry matrices must be flagged");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(306);
    for _ in 0..200 {
        let c = rng.gen_range(1..=4);
        let (m, n) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let v = nonzero_quantized(&mut rng, m, n, c);
        let model = BoundModel::new(&PerceptionFamily::Quantized, &v, fin(c)).unwrap();
        let width = model.bounds(&random_point(&mut rng, m), &random_point(&mut rng, n)).width();
        assert!((width - 10f64.powi(-(c as i32))).abs() <= 1e-12);
    }
    for f in [PerceptionFamily::Masked, PerceptionFamily::limited_rank()] {
        let r = check_constant_gap(&f, fin(2), 100, 7);
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(r.witnesses.iter().all(|w| w.gap.is_finite()));
    }
}

#[test]
fn limited_rank_games_are_narrowly_reversible() {
    let mut rng = ChaCha8Rng::seed_from_u64(307);
    let f = PerceptionFamily::limited_rank();
    for trial in 0..20 {
        let u = rank_matrix(&mut rng, 3, 3, 1);
        let game = zero_sum(&f, u, fin(1), fin(2));
        let r = check_narrowly_reversible(&game, 10, trial, 1e-6).unwrap();
        assert!(r.verdict.passed(), "{r:?}");
        assert!(r.trials == 30 && r.max_gap <= 1e-6);
        assert!(r.guarantee.is_some());
    }
}

#[test]
fn masked_column_fill_criterion() {
    let mut rng = ChaCha8Rng::seed_from_u64(308);
    let f = PerceptionFamily::Masked;
    let mut checked = 0;
    while checked < 30 {
        let (m, n) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
        let c1 = rng.gen_range(1..=3);
        let c2 = c1 + rng.gen_range(1..=3);
        let u = random_perceived(&f, &mut rng, m, n, fin(c1));
        let Some(shape) = MaskShape::of(&u, fin(c1)) else { continue };
        let eligible = (0..n).all(|k| shape.masked.iter().filter(|&&i| i % n == k).count() <= (c2 - c1) as usize);
        let game = zero_sum(&f, u, fin(c1), fin(c2));
        let r = check_narrowly_reversible(&game, 10, checked, 1e-6).unwrap();
        assert!(r.verdict.passed(), "{r:?}");
        if eligible {
            assert!(r.max_gap <= 1e-6);
            assert_eq!(r.guarantee, Some("masked column-fill criterion"));
            checked += 1;
        }
    }
}

#[test]
fn stackelberg_gap_closes_at_the_maximin_strategy() {
    let mut rng = ChaCha8Rng::seed_from_u64(309);
    for trial in 0..10 {
        let (m, n) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
        let u = nonzero_quantized(&mut rng, m, n, 1);
        let game = zero_sum(&PerceptionFamily::Quantized, u, fin(1), fin(2));
        let sol = solve_maximin(&game, 1e-7, 100_000, trial).unwrap();
        let p = stackelberg_gap_probe(&game, &sol.x, 50, trial, 1e-9).unwrap();
        assert!(p.h1 <= p.g_lower_est + 1e-9);
        assert!(p.g_lower_est - p.h1 <= 1e-4, "{p:?}");
        assert!(p.g_lower_est <= p.g_upper);
    }
    let f = PerceptionFamily::limited_rank();
    for trial in 0..10 {
        let u = rank_matrix(&mut rng, 3, 3, 1);
        let game = zero_sum(&f, u, fin(1), fin(2));
        let sol = solve_maximin(&game, 1e-7, 100_000, trial).unwrap();
        let p = stackelberg_gap_probe(&game, &sol.x, 20, trial, 1e-9).unwrap();
        assert!(p.h1 <= p.g_lower_est + 1e-9, "{p:?}");
        assert!(p.g_lower_est - p.h1 <= 1e-4, "{p:?}");
    }
}

#[test]
fn equal_capabilities_probe_is_one_best_response() {
    let u = Matrix::from_rows(&[[0.5, -0.3], [-0.7, 0.2]]).unwrap();
    let game = zero_sum(&PerceptionFamily::Quantized, u.clone(), fin(1), fin(1));
    let x = [0.5, 0.5];
    let p = stackelberg_gap_probe(&game, &x, 10, 0, 1e-9).unwrap();
    assert_eq!(p.evaluated, 1);
    let y = best_response_upper(&game, &u, fin(1), &x, 1e-9).unwrap();
    let expected = BoundModel::new(&PerceptionFamily::Quantized, &u, fin(1)).unwrap().lower(&x, &y);
    assert_eq!(p.g_lower_est, expected);
}

#[test]
fn diagonal_limited_rank_example_is_reversible() {
    let u = Matrix::from_rows(&[[2.0, 0.0], [0.0, 0.0]]).unwrap();
    let game = zero_sum(&PerceptionFamily::limited_rank(), u, fin(1), fin(2));
    let r = check_narrowly_reversible(&game, 5, 1, 1e-6).unwrap();
    assert!(r.verdict.passed() && r.max_gap <= 1e-6, "{r:?}");
}
