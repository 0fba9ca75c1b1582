//! Scenario-tree properties against independent normal-quantile references.

use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use windcommit::scenario_tree::{
    branch_probabilities, build_error_tree, inverse_normal_cdf, ArParams, ErrorMode, ProbabilityVector, QuantileSet,
};

/// Standard normal CDF by composite Simpson quadrature of the density.
fn simpson_cdf(z: f64) -> f64 {
    let n = 4000;
    let h = z / n as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(0.0) + pdf(z);
    for i in 1..n {
        s += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    0.5 + s * h / 3.0
}

fn bisect_quantile(q: f64) -> f64 {
    let (mut lo, mut hi) = (-9.0, 9.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if simpson_cdf(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn quantile_matches_quadrature_bisection() {
    for q in [0.001, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 0.999] {
        let want = bisect_quantile(q);
        let got = inverse_normal_cdf(q, 0.0, 1.0).unwrap();
        assert!((got - want).abs() < 1e-9, "q={q}: {got} vs {want}");
    }
}

#[test]
fn default_tree_values() {
    let tree = build_error_tree(&QuantileSet::default(), ArParams::default(), 3).unwrap();
    // 0.14 * z(0.01) and 1.2 times that
    assert!((tree.error(0, 1) - -0.325_688_702_4).abs() < 1e-10);
    assert!((tree.error(0, 2) - -0.390_826_442_8).abs() < 1e-10);
    assert_eq!(tree.error(2, 1), 0.0);
    assert_eq!(tree.branch_stage(), 2);
}

#[test]
fn median_branch_reproduces_forecast() {
    let tree = build_error_tree(&QuantileSet::default(), ArParams::default(), 4).unwrap();
    let forecast = [5.0, 7.5, 19.0, 0.0];
    let wind = tree.apply_errors(&forecast, 20.0, ErrorMode::PerUnit).unwrap();
    assert_eq!(wind[2], forecast);
    let abs = tree.apply_errors(&forecast, 20.0, ErrorMode::AbsoluteGw).unwrap();
    assert_eq!(abs[2], forecast);
}

fn levels() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(1u32..999, 1..8).prop_map(|s| s.into_iter().map(|k| k as f64 / 1000.0).collect())
}

proptest! {
    #[test]
    fn closed_form(levels in levels(), phi in 0.1f64..2.0, eps_c in 0.0f64..0.5, stages in 1usize..9) {
        let q = QuantileSet::new(levels.clone()).unwrap();
        let tree = build_error_tree(&q, ArParams::new(phi, eps_c).unwrap(), stages).unwrap();
        let normal = Normal::new(0.0, 1.0).unwrap();
        for (n, &level) in levels.iter().enumerate() {
            let z = normal.inverse_cdf(level);
            prop_assert_eq!(tree.error(n, 0), 0.0);
            for k in 1..stages {
                let want = phi.powi(k as i32 - 1) * eps_c * z;
                let got = tree.error(n, k);
                prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-3), "{} vs {}", got, want);
            }
        }
    }

    #[test]
    fn symmetric_levels_give_antisymmetric_errors(half in prop::collection::btree_set(1u32..499, 1..4), mid in any::<bool>()) {
        let mut levels: Vec<f64> = half.iter().map(|&k| k as f64 / 1000.0).collect();
        if mid {
            levels.push(0.5);
        }
        levels.extend(half.iter().rev().map(|&k| 1.0 - k as f64 / 1000.0));
        let q = QuantileSet::new(levels).unwrap();
        prop_assert!(q.is_symmetric());
        let tree = build_error_tree(&q, ArParams::default(), 4).unwrap();
        let n = q.len();
        for i in 0..n {
            for k in 0..4 {
                prop_assert!((tree.error(i, k) + tree.error(n - 1 - i, k)).abs() < 1e-12);
            }
        }
        let p = branch_probabilities(&q);
        for i in 0..n {
            prop_assert!((p.as_slice()[i] - p.as_slice()[n - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn quantile_round_trips_through_cdf(q in 1e-6f64..(1.0 - 1e-6), mu in -5.0f64..5.0, sigma in 0.01f64..3.0) {
        let x = inverse_normal_cdf(q, mu, sigma).unwrap();
        // statrs' erfc is only good to ~1e-10 relative in the tails
        let back = Normal::new(mu, sigma).unwrap().cdf(x);
        prop_assert!((back - q).abs() <= 1e-9 * q, "{} vs {}", back, q);
    }

    #[test]
    fn midpoint_rule_is_a_distribution(levels in levels()) {
        let q = QuantileSet::new(levels).unwrap();
        let p = branch_probabilities(&q);
        prop_assert_eq!(p.len(), q.len());
        prop_assert!(p.as_slice().iter().all(|&x| x > 0.0));
        prop_assert!((p.sum() - 1.0).abs() < 1e-12);
        prop_assert!(ProbabilityVector::new(p.as_slice().to_vec()).is_ok());
    }

    #[test]
    fn scenario_wind_stays_in_range(f in prop::collection::vec(0.0f64..25.0, 1..10), cap in 1.0f64..30.0) {
        let tree = build_error_tree(&QuantileSet::default(), ArParams::default(), f.len()).unwrap();
        for mode in [ErrorMode::PerUnit, ErrorMode::AbsoluteGw] {
            for row in tree.apply_errors(&f, cap, mode).unwrap() {
                prop_assert!(row.iter().all(|&w| (0.0..=cap).contains(&w)));
            }
        }
    }
}
