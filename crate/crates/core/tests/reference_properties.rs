//! Ground-truth solver checks: closed-form continuity, optimality
//! against random portfolios, grid-oracle convergence.

mod common;

use common::max_abs_gap;
use mcpope::reference::{
    analytic_three_asset, grid_oracle, three_asset_covariance, three_asset_covariance_rows,
    GridSpec, THREE_ASSET_REGION_HIGH, THREE_ASSET_REGION_LOW,
};
use mcpope::simplex::{sample_gap, ConstraintSet, LinearInequality, SamplerConfig};
use mcpope::tolerances;

fn quadratic_form(rows: &[Vec<f64>], w: &[f64]) -> f64 {
    rows.iter()
        .zip(w.iter())
        .map(|(row, &wi)| wi * row.iter().zip(w.iter()).map(|(c, &wj)| c * wj).sum::<f64>())
        .sum()
}

/// Both branches agree at each region boundary of the piecewise form.
#[test]
fn closed_form_is_continuous_across_regions() {
    for boundary in [THREE_ASSET_REGION_LOW, THREE_ASSET_REGION_HIGH] {
        let eps = 1e-9;
        let below = analytic_three_asset(boundary - eps);
        let above = analytic_three_asset(boundary + eps);
        let gap = max_abs_gap(below.as_slice(), above.as_slice());
        assert!(
            gap <= tolerances::THREE_ASSET_BOUNDARY_ABS,
            "branch disagreement {gap} at r = {boundary}"
        );
    }
}

/// No random feasible portfolio beats the closed form anywhere on the
/// correlation range.
#[test]
fn closed_form_beats_random_portfolios() {
    // The raw quadratic form is used here: near r = -1 the matrix is
    // indefinite, but the minimization over the compact simplex (and
    // the closed form describing it) still stands.
    for i in 0..21 {
        let r = -1.0 + 2.0 * i as f64 / 20.0;
        let rows = three_asset_covariance_rows(r);
        let optimum = quadratic_form(&rows, analytic_three_asset(r).as_slice());
        let batch = sample_gap(&SamplerConfig::new(3, 1000, 0, 7000 + i).unwrap()).unwrap();
        for w in &batch {
            let value = quadratic_form(&rows, w.as_slice());
            assert!(
                value >= optimum - tolerances::OPTIMUM_LOWER_BOUND_SLACK,
                "r={r}: random portfolio {value} beats closed form {optimum}"
            );
        }
    }
}

/// Pure lattice minima are nonincreasing across nested lattices.
#[test]
fn lattice_minimum_nonincreasing_in_resolution() {
    let cov = three_asset_covariance(-0.5);
    let constraints = ConstraintSet {
        linear_inequalities: vec![LinearInequality {
            coefficients: vec![1.0, 0.0, 0.0],
            bound: 1.0 / 3.0,
        }],
        ..ConstraintSet::default()
    };
    let value_at = |m: usize| {
        grid_oracle(
            |w| cov.quadratic_form(w),
            &GridSpec::new(3, m, 0).unwrap(),
            &constraints,
        )
        .unwrap()
        .1
    };
    let (v1, v2, v4) = (value_at(250), value_at(500), value_at(1000));
    assert!(v1 >= v2 && v2 >= v4, "lattice minima not nested: {v1} {v2} {v4}");
}

/// Polished grid search lands within 5e-4 per weight of the closed form.
#[test]
fn grid_oracle_matches_closed_form_at_zero_correlation() {
    let cov = three_asset_covariance(0.0);
    let (weights, value) = grid_oracle(
        |w| cov.quadratic_form(w),
        &GridSpec::new(3, 1000, 40).unwrap(),
        &ConstraintSet::none(),
    )
    .unwrap();
    let analytic = analytic_three_asset(0.0);
    let gap = max_abs_gap(weights.as_slice(), analytic.as_slice());
    assert!(gap <= tolerances::GRID_VS_ANALYTIC_WEIGHTS_ABS, "weight gap {gap}");
    let analytic_value = cov.quadratic_form(analytic.as_slice());
    assert!(value >= analytic_value - tolerances::OPTIMUM_LOWER_BOUND_SLACK);
    assert!((value - analytic_value) / analytic_value < 1e-6);
}

/// Constrained grid search reproduces the published constrained optimum.
#[test]
fn grid_oracle_matches_published_constrained_objective() {
    const PUBLISHED: f64 = 32.2379;
    let cov = three_asset_covariance(-0.5);
    let constraints = ConstraintSet {
        linear_inequalities: vec![
            LinearInequality {
                coefficients: vec![1.0, 0.0, 0.0],
                bound: 1.0 / 3.0,
            },
            LinearInequality {
                coefficients: vec![0.0, 1.0, 1.1],
                bound: 0.5,
            },
        ],
        ..ConstraintSet::default()
    };
    let (_, value) = grid_oracle(
        |w| cov.quadratic_form(w),
        &GridSpec::new(3, 1000, 40).unwrap(),
        &constraints,
    )
    .unwrap();
    assert!(
        (value - PUBLISHED).abs() <= tolerances::CONSTRAINED_OBJECTIVE_REL * PUBLISHED,
        "oracle value {value} vs published {PUBLISHED}"
    );
}
