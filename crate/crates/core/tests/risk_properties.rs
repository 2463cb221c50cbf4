//! Invariants of the risk functionals and their analytic special cases.

mod common;

use common::norm_quantile;
use mcpope::risk::{
    empirical_cvar, empirical_var, gaussian_omega, omega, omega_put_call, student_t_quantile,
    ReturnSample,
};
use mcpope::tolerances;
use proptest::prelude::*;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Omega is above 1 exactly when the sample mean is above the threshold.
#[test]
fn omega_sign_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..5000 {
        let j = 2 + rng.random_range(0..100);
        let r: Vec<f64> = (0..j).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mean = r.iter().sum::<f64>() / j as f64;
        let lo = r.iter().cloned().fold(f64::MAX, f64::min);
        let hi = r.iter().cloned().fold(f64::MIN, f64::max);
        if hi - lo < 1e-12 {
            continue;
        }
        let b = rng.random_range(lo..hi);
        let value = omega(&ReturnSample::new(r).unwrap(), b).unwrap();
        if mean > b {
            assert!(value > 1.0, "mean {mean} > b {b} but omega {value} <= 1");
        } else if mean < b {
            assert!(value < 1.0, "mean {mean} < b {b} but omega {value} >= 1");
        }
    }
}

/// Adding cash c shifts the tail estimators by exactly -c.
#[test]
fn var_and_cvar_translate_with_cash() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..2000 {
        let j = 2 + rng.random_range(0..80);
        let r: Vec<f64> = (0..j).map(|_| rng.random_range(-4.0..4.0)).collect();
        let u = rng.random_range(0.02..0.98);
        let c = rng.random_range(-2.0..2.0);
        let shifted: Vec<f64> = r.iter().map(|x| x + c).collect();
        let base = ReturnSample::new(r).unwrap();
        let moved = ReturnSample::new(shifted).unwrap();
        let var_gap =
            empirical_var(&moved, u).unwrap() - (empirical_var(&base, u).unwrap() - c);
        let cvar_gap =
            empirical_cvar(&moved, u).unwrap() - (empirical_cvar(&base, u).unwrap() - c);
        assert!(var_gap.abs() < 1e-12, "VaR translation broke by {var_gap}");
        assert!(cvar_gap.abs() < 1e-12, "CVaR translation broke by {cvar_gap}");
    }
}

/// The closed-form Gaussian Omega falls strictly as the threshold rises.
#[test]
fn gaussian_omega_strictly_decreasing() {
    let mut previous = f64::INFINITY;
    for i in 0..1000 {
        let b = -5.0 + 10.0 * i as f64 / 999.0;
        let value = gaussian_omega(0.0, 1.0, b).unwrap();
        assert!(
            value < previous,
            "omega rose from {previous} to {value} at b = {b}"
        );
        previous = value;
    }
}

/// Quantile antisymmetry F^-1(1-u) = -F^-1(u) to 1e-12.
#[test]
fn t_quantile_antisymmetry() {
    for nu in [1.0, 2.5, 4.0, 9.0, 30.0] {
        for u in [0.01, 0.05, 0.2, 0.35, 0.49] {
            let lower = student_t_quantile(u, nu).unwrap();
            let upper = student_t_quantile(1.0 - u, nu).unwrap();
            assert!(
                (upper + lower).abs() <= tolerances::T_QUANTILE_ANTISYMMETRY,
                "nu={nu} u={u}: {lower} vs {upper}"
            );
        }
    }
}

/// At nu = 10^6 the t quantile collapses onto the normal quantile.
#[test]
fn t_quantile_normal_limit() {
    for u in [0.01, 0.05, 0.25] {
        let t = student_t_quantile(u, 1.0e6).unwrap();
        let z = norm_quantile(u);
        assert!(
            (t - z).abs() <= tolerances::T_QUANTILE_NORMAL_LIMIT,
            "u={u}: t {t} vs normal {z}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// CVaR dominates VaR for every sample and tail level.
    #[test]
    fn cvar_dominates_var(
        r in prop::collection::vec(-1.0e3..1.0e3f64, 2..400),
        u in 0.001..0.999f64,
    ) {
        let sample = ReturnSample::new(r).unwrap();
        let var = empirical_var(&sample, u).unwrap();
        let cvar = empirical_cvar(&sample, u).unwrap();
        prop_assert!(cvar >= var - 1e-9);
    }

    /// The two Omega routes agree whenever the threshold has mass on
    /// both sides.
    #[test]
    fn omega_routes_agree(
        r in prop::collection::vec(-50.0..50.0f64, 2..200),
        t in 0.05..0.95f64,
    ) {
        let lo = r.iter().cloned().fold(f64::MAX, f64::min);
        let hi = r.iter().cloned().fold(f64::MIN, f64::max);
        prop_assume!(hi - lo > 1e-6);
        let b = lo + t * (hi - lo);
        let sample = ReturnSample::new(r).unwrap();
        let direct = omega(&sample, b).unwrap();
        let parity = omega_put_call(&sample, b).unwrap();
        prop_assert!((direct - parity).abs() <= tolerances::OMEGA_IDENTITY_REL * direct.abs().max(1.0));
    }
}
