//! Statistical and structural properties of the simplex samplers.

mod common;

use common::{ks_critical_two_sample, ks_two_sample};
use mcpope::simplex::{
    apply_ev_bias, filter_constraints, sample_exponential, sample_gap, sample_hypercube,
    sample_order_statistics, sample_uniform_ratio, ConstraintSet, PortfolioWeights, SamplerConfig,
};
use mcpope::tolerances;
use proptest::prelude::*;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Coordinates are exchangeable for the even samplers: coordinate i of
/// one batch is indistinguishable from coordinate j of an independent
/// batch at the 1% level.
#[test]
fn even_samplers_are_exchangeable() {
    let draws = 10_000;
    let critical = ks_critical_two_sample(draws, draws, tolerances::KS_COEFFICIENT_1PCT);
    type Sampler = fn(&SamplerConfig) -> Result<Vec<PortfolioWeights>, mcpope::simplex::SimplexError>;
    let samplers: [(&str, Sampler); 3] = [
        ("gap", sample_gap),
        ("order", sample_order_statistics),
        ("exponential", sample_exponential),
    ];
    for (name, sampler) in samplers {
        let a = sampler(&SamplerConfig::new(5, draws, 0, 101).unwrap()).unwrap();
        let b = sampler(&SamplerConfig::new(5, draws, 0, 202).unwrap()).unwrap();
        for (i, j) in [(0usize, 3usize), (1, 4), (2, 0)] {
            let mut xi: Vec<f64> = a.iter().map(|w| w.as_slice()[i]).collect();
            let mut xj: Vec<f64> = b.iter().map(|w| w.as_slice()[j]).collect();
            let d = ks_two_sample(&mut xi, &mut xj);
            assert!(
                d < critical,
                "{name}: coordinates {i} and {j} differ, KS {d} >= {critical}"
            );
        }
    }
}

/// The ratio-of-uniforms scheme underweights near-vertex configurations:
/// its probability of a dominant coordinate is far below the even
/// sampler's 3(1-0.9)^2 = 0.03. The expected ratio-scheme probability
/// comes from a brute-force acceptance count over 10^6 uniform triples.
#[test]
fn uniform_ratio_bias_demonstration() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let oracle_trials = 1_000_000;
    let mut hits = 0u64;
    for _ in 0..oracle_trials {
        let u = [
            rng.random::<f64>(),
            rng.random::<f64>(),
            rng.random::<f64>(),
        ];
        let sum: f64 = u.iter().sum();
        if u.iter().any(|&x| x / sum > 0.9) {
            hits += 1;
        }
    }
    let oracle_probability = hits as f64 / oracle_trials as f64;

    let draws = 100_000;
    let dominant_fraction = |batch: &[PortfolioWeights]| {
        batch
            .iter()
            .filter(|w| w.as_slice().iter().any(|&x| x > 0.9))
            .count() as f64
            / batch.len() as f64
    };
    let ratio = dominant_fraction(&sample_uniform_ratio(&SamplerConfig::new(3, draws, 0, 505).unwrap()).unwrap());
    let gap = dominant_fraction(&sample_gap(&SamplerConfig::new(3, draws, 0, 606).unwrap()).unwrap());

    // Five standard errors around each expected probability.
    let se = |p: f64| 5.0 * (p * (1.0 - p) / draws as f64).sqrt();
    assert!(
        (ratio - oracle_probability).abs() < se(oracle_probability),
        "ratio sampler fraction {ratio} vs oracle {oracle_probability}"
    );
    assert!((gap - 0.03).abs() < se(0.03), "gap fraction {gap} vs 0.03");
    assert!(ratio < gap, "bias demonstration inverted: {ratio} >= {gap}");
}

#[test]
fn ev_bias_pool_mean_max_rises_with_depth() {
    let config = SamplerConfig::new(4, 3000, 6, 99).unwrap();
    let base = sample_hypercube(&config).unwrap();
    let biased = apply_ev_bias(&base, config.bias_depth).unwrap();
    let mean_max = |p: usize| {
        biased
            .iter()
            .map(|levels| levels[p].as_slice().iter().cloned().fold(f64::MIN, f64::max))
            .sum::<f64>()
            / biased.len() as f64
    };
    // Depth 0 is the biased ratio scheme (center-heavy); by depth 6 the
    // mass should be nearly concentrated.
    assert!(mean_max(0) < 0.6);
    assert!(mean_max(6) > 0.95);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Every sampler keeps every emitted vector on the simplex.
    #[test]
    fn samplers_emit_valid_weights(
        n in 1usize..8,
        k in 1usize..50,
        depth in 0u32..8,
        seed in any::<u64>(),
    ) {
        let config = SamplerConfig::new(n, k, depth, seed).unwrap();
        for batch in [
            sample_uniform_ratio(&config).unwrap(),
            sample_gap(&config).unwrap(),
            sample_order_statistics(&config).unwrap(),
            sample_exponential(&config).unwrap(),
        ] {
            prop_assert_eq!(batch.len(), k);
            for w in batch {
                prop_assert!(PortfolioWeights::new(w.into_vec()).is_ok());
            }
        }
        let base = sample_hypercube(&config).unwrap();
        for levels in apply_ev_bias(&base, depth).unwrap() {
            prop_assert_eq!(levels.len(), depth as usize + 1);
            for w in levels {
                prop_assert!(PortfolioWeights::new(w.into_vec()).is_ok());
            }
        }
    }

    /// Filtering against no constraints is the identity with rate 1.
    #[test]
    fn empty_filter_is_identity(n in 1usize..6, k in 1usize..40, seed in any::<u64>()) {
        let config = SamplerConfig::new(n, k, 0, seed).unwrap();
        let batch = sample_exponential(&config).unwrap();
        let (accepted, rate) = filter_constraints(&batch, &ConstraintSet::none()).unwrap();
        prop_assert_eq!(accepted, batch);
        prop_assert_eq!(rate, 1.0);
    }
}
