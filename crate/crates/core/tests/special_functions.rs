mod common;

use common::simpson;
use proptest::prelude::*;
use selfsim_core::special::{cdf, cdf_inverse, cdf_prime, ln_cdf, log_cdf_diff};
use selfsim_core::Error;
use std::f64::consts::PI;

fn density(s: f64) -> f64 {
    (-s * s / 4.0).exp() / (2.0 * PI.sqrt())
}

#[test]
fn cdf_matches_quadrature_of_the_density() {
    for x in [-8.0, -3.5, -1.0, -0.2, 0.0, 0.7, 2.0, 5.0, 9.0] {
        let oracle = 0.5 + simpson(density, 0.0, x, 4000);
        assert!((cdf(x) - oracle).abs() < 1e-14, "x={x}: {} vs {oracle}", cdf(x));
    }
}

#[test]
fn cdf_at_two() {
    // (1 + erf(1)) / 2 with erf(1) = 0.8427007929497148693...
    assert!((cdf(2.0) - 0.921_350_396_474_857_4).abs() < 1e-15);
}

#[test]
fn density_is_the_derivative() {
    for x in [-4.0, -1.0, 0.0, 0.5, 3.0] {
        let h = 1e-5;
        let fd = (cdf(x + h) - cdf(x - h)) / (2.0 * h);
        assert!((fd - cdf_prime(x)).abs() < 1e-10);
    }
}

/// `ln ∫_y^x F'` with the Gaussian factor `e^{-y²/4}` pulled out first so
/// that nothing underflows.
fn log_diff_oracle(x: f64, y: f64) -> f64 {
    let integral = simpson(|s| (-(s * s - y * y) / 4.0).exp(), y, x, 20_000);
    integral.ln() - y * y / 4.0 - (2.0 * PI.sqrt()).ln()
}

#[test]
fn far_right_tail() {
    let got = log_cdf_diff(30.0, 29.0).unwrap();
    let oracle = log_diff_oracle(30.0, 29.0);
    assert!(got < -200.0);
    assert!(((got - oracle) / oracle).abs() < 1e-12, "{got} vs {oracle}");
}

#[test]
fn far_left_tail_mirrors_right() {
    let a = log_cdf_diff(-29.0, -30.0).unwrap();
    let b = log_cdf_diff(30.0, 29.0).unwrap();
    assert!((a - b).abs() <= 1e-12 * b.abs());
}

#[test]
fn deep_tails_stay_finite() {
    for (x, y) in [(80.0, 79.9), (200.0, 100.0), (-40.0, -41.0), (1e3, 999.0)] {
        let v = log_cdf_diff(x, y).unwrap();
        assert!(v.is_finite() && v < -1e2, "({x}, {y}) -> {v}");
    }
    let oracle = log_diff_oracle(80.0, 79.9);
    let got = log_cdf_diff(80.0, 79.9).unwrap();
    assert!(((got - oracle) / oracle).abs() < 1e-12);
}

#[test]
fn tiny_separation() {
    let (x, y) = (3.0 + 1e-9, 3.0);
    // The stored separation is not exactly 1e-9.
    let d = x - y;
    let expected = (d * density(y + 0.5 * d)).ln();
    assert!((log_cdf_diff(x, y).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn infinite_endpoints() {
    assert_eq!(log_cdf_diff(f64::INFINITY, f64::NEG_INFINITY).unwrap(), 0.0);
    assert!((log_cdf_diff(f64::INFINITY, 0.0).unwrap() - 0.5_f64.ln()).abs() < 1e-15);
    assert!((log_cdf_diff(1.0, f64::NEG_INFINITY).unwrap() - ln_cdf(1.0)).abs() < 1e-15);
}

#[test]
fn rejects_unordered_arguments() {
    assert!(matches!(log_cdf_diff(1.0, 1.0), Err(Error::Domain { .. })));
    assert!(matches!(log_cdf_diff(0.0, 2.0), Err(Error::Domain { .. })));
    assert!(log_cdf_diff(f64::NAN, 0.0).unwrap().is_nan());
}

#[test]
fn inverse_rejects_bad_probabilities() {
    for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
        assert!(matches!(cdf_inverse(p), Err(Error::Probability(_))));
    }
    assert_eq!(cdf_inverse(0.5).unwrap(), 0.0);
}

proptest! {
    // Away from the tails, where the plain difference loses no digits.
    #[test]
    fn agrees_with_direct_difference(x in -3.0f64..3.0, d in 0.1f64..6.0) {
        let y = x - d;
        let direct = (cdf(x) - cdf(y)).ln();
        prop_assert!((log_cdf_diff(x, y).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn reflection_symmetry(x in -40.0f64..40.0, d in 1e-6f64..20.0) {
        let y = x - d;
        let a = log_cdf_diff(x, y).unwrap();
        let b = log_cdf_diff(-y, -x).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn nonpositive_and_monotone(x in -30.0f64..30.0, d in 1e-3f64..10.0, e in 1e-3f64..1.0) {
        let y = x - d;
        let v = log_cdf_diff(x, y).unwrap();
        prop_assert!(v <= 0.0);
        prop_assert!(log_cdf_diff(x + e, y).unwrap() >= v);
        prop_assert!(log_cdf_diff(x, y - e).unwrap() >= v);
    }

    #[test]
    fn inverse_round_trip(p in 1e-300f64..1.0) {
        prop_assume!(p < 1.0);
        let x = cdf_inverse(p).unwrap();
        let back = if p < 0.5 { ln_cdf(x).exp() } else { cdf(x) };
        prop_assert!((back - p).abs() <= 1e-13 * p.max(1e-300) + 1e-16, "p={p} x={x} back={back}");
    }
}
