//! The fixed benchmark replays behind `mcpope reproduce`. Each case
//! emits a comparison table with columns
//! `quantity,paper_value,computed_value,abs_diff,tolerance,pass`; the
//! process exits 0 only if every row passes.

use std::io::Write;

use anyhow::Result;
use clap::ValueEnum;

use mcpope::optimizer::{run_workers, ObjectiveSource, OptimizationProblem, OptimizationResult};
use mcpope::reference::{
    admn_correlation, analytic_three_asset, grid_oracle, replay, ru_covariance,
    ru_min_variance_reference, ru_return_constraint, six_asset_covariance,
    three_asset_covariance, GridSpec, ADMN_DEGREES_OF_FREEDOM, ADMN_MARGINAL_VAR, ADMN_MEANS,
    ADMN_OMEGA_TARGETS, ADMN_SIGMAS, RU_EXPECTED_RETURNS, RU_MIN_VARIANCE,
    RU_MIN_VARIANCE_WEIGHTS, RU_OPTIMAL_CVAR, SIX_ASSET_OPTIMAL_WEIGHTS,
};
use mcpope::risk::{marginal_var_student, RiskSpec};
use mcpope::scenario::{simulate_gaussian, simulate_student_t, ScenarioMatrix};
use mcpope::simplex::{ConstraintSet, LinearInequality, SamplerConfig};
use mcpope::tolerances as tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReproduceCase {
    /// Three-asset minimum variance at r = -0.5, 0, +0.5.
    Table1,
    /// Constrained three-asset case (w1 >= 1/3, w2 + 1.1 w3 >= 1/2).
    Constrained3,
    /// Six-asset stress covariance with a two-asset boundary optimum.
    Pathological6,
    /// CVaR optimization against the published three-asset benchmark.
    RuCvar,
    /// Omega optimization of the simplified three-index model.
    OmegaAdmn,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CaseOptions {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub base_samples: Option<usize>,
    pub bias_depth: Option<u32>,
    pub quantile: Option<f64>,
    pub scenario_count: Option<usize>,
}

impl CaseOptions {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(replay::MASTER_SEED)
    }
    fn workers(&self, case_default: usize) -> usize {
        self.workers.unwrap_or(case_default)
    }
    fn base(&self, case_default: usize) -> usize {
        self.base_samples.unwrap_or(case_default)
    }
    fn depth(&self) -> u32 {
        self.bias_depth.unwrap_or(replay::BIAS_DEPTH)
    }
}

#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub quantity: String,
    pub paper_value: f64,
    pub computed_value: f64,
    pub tolerance: f64,
}

impl ComparisonRow {
    fn new(quantity: impl Into<String>, paper: f64, computed: f64, tolerance: f64) -> Self {
        Self {
            quantity: quantity.into(),
            paper_value: paper,
            computed_value: computed,
            tolerance,
        }
    }

    pub fn abs_diff(&self) -> f64 {
        (self.computed_value - self.paper_value).abs()
    }

    pub fn pass(&self) -> bool {
        self.abs_diff() <= self.tolerance
    }
}

/// Writes the comparison table as CSV; returns whether every row passed.
pub fn write_rows<W: Write>(out: &mut W, rows: &[ComparisonRow]) -> std::io::Result<bool> {
    writeln!(out, "quantity,paper_value,computed_value,abs_diff,tolerance,pass")?;
    let mut all = true;
    for row in rows {
        let pass = row.pass();
        all &= pass;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.quantity,
            row.paper_value,
            row.computed_value,
            row.abs_diff(),
            row.tolerance,
            pass
        )?;
    }
    Ok(all)
}

pub fn run_case(case: ReproduceCase, opts: &CaseOptions) -> Result<Vec<ComparisonRow>> {
    match case {
        ReproduceCase::Table1 => table1(opts),
        ReproduceCase::Constrained3 => constrained3(opts),
        ReproduceCase::Pathological6 => pathological6(opts),
        ReproduceCase::RuCvar => ru_cvar(opts),
        ReproduceCase::OmegaAdmn => omega_admn(opts),
    }
}

fn weight_rows(
    rows: &mut Vec<ComparisonRow>,
    prefix: &str,
    published: &[f64],
    computed: &[f64],
    tolerance: f64,
) {
    for (i, (p, c)) in published.iter().zip(computed.iter()).enumerate() {
        rows.push(ComparisonRow::new(
            format!("{prefix}_w{}", i + 1),
            *p,
            *c,
            tolerance,
        ));
    }
}

fn table1(opts: &CaseOptions) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::new();
    for r in [-0.5, 0.0, 0.5] {
        let covariance = three_asset_covariance(r);
        let analytic = analytic_three_asset(r);
        let analytic_value = covariance.quadratic_form(analytic.as_slice());
        let problem = OptimizationProblem::new(
            ObjectiveSource::AnalyticQuadratic {
                covariance,
                lambda: 0.0,
                expected_returns: None,
            },
            ConstraintSet::none(),
            SamplerConfig::new(3, opts.base(replay::THREE_ASSET_BASE), opts.depth(), 0)?,
        )?;
        let result = run_workers(
            &problem,
            opts.workers(replay::THREE_ASSET_WORKERS),
            opts.seed(),
        )?;
        weight_rows(
            &mut rows,
            &format!("r={r}"),
            analytic.as_slice(),
            result.best_weights.as_slice(),
            tol::THREE_ASSET_WEIGHTS_ABS,
        );
        rows.push(ComparisonRow::new(
            format!("r={r}_objective"),
            analytic_value,
            result.best_risk,
            tol::THREE_ASSET_OBJECTIVE_REL * analytic_value,
        ));
    }
    Ok(rows)
}

fn section_42_constraints() -> ConstraintSet {
    ConstraintSet {
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
    }
}

fn constrained3(opts: &CaseOptions) -> Result<Vec<ComparisonRow>> {
    const PUBLISHED_OBJECTIVE: f64 = 32.2379;
    let covariance = three_asset_covariance(-0.5);
    let problem = OptimizationProblem::new(
        ObjectiveSource::AnalyticQuadratic {
            covariance: covariance.clone(),
            lambda: 0.0,
            expected_returns: None,
        },
        section_42_constraints(),
        SamplerConfig::new(3, opts.base(replay::THREE_ASSET_BASE), opts.depth(), 0)?,
    )?;
    let result = run_workers(
        &problem,
        opts.workers(replay::THREE_ASSET_WORKERS),
        opts.seed(),
    )?;
    eprintln!(
        "acceptance rate {:.4} ({} of {} candidates)",
        result.acceptance_rate(),
        result.candidates_accepted,
        result.candidates_evaluated
    );
    let (_, oracle_value) = grid_oracle(
        |w| covariance.quadratic_form(w),
        &GridSpec::new(3, 1000, 40)?,
        &section_42_constraints(),
    )?;
    let band = tol::CONSTRAINED_OBJECTIVE_REL * PUBLISHED_OBJECTIVE;
    Ok(vec![
        ComparisonRow::new("objective", PUBLISHED_OBJECTIVE, result.best_risk, band),
        ComparisonRow::new("objective_vs_oracle", oracle_value, result.best_risk, band),
    ])
}

fn pathological6(opts: &CaseOptions) -> Result<Vec<ComparisonRow>> {
    let problem = OptimizationProblem::new(
        ObjectiveSource::AnalyticQuadratic {
            covariance: six_asset_covariance(),
            lambda: 0.0,
            expected_returns: None,
        },
        ConstraintSet::none(),
        SamplerConfig::new(6, opts.base(replay::SIX_ASSET_BASE), opts.depth(), 0)?,
    )?;
    let result = run_workers(
        &problem,
        opts.workers(replay::SIX_ASSET_WORKERS),
        opts.seed(),
    )?;
    let mut rows = Vec::new();
    weight_rows(
        &mut rows,
        "6d",
        &SIX_ASSET_OPTIMAL_WEIGHTS,
        result.best_weights.as_slice(),
        tol::SIX_ASSET_WEIGHTS_ABS,
    );
    Ok(rows)
}

fn ru_scenarios(scenario_count: usize) -> Result<ScenarioMatrix> {
    Ok(simulate_gaussian(
        &RU_EXPECTED_RETURNS,
        &ru_covariance(),
        scenario_count,
        replay::RU_SCENARIO_SEED,
    )?)
}

fn ru_cvar(opts: &CaseOptions) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::new();

    // Grid-oracle minimum-variance reference rows come along for free.
    let (ref_weights, ref_variance) = ru_min_variance_reference();
    weight_rows(
        &mut rows,
        "min_variance",
        &RU_MIN_VARIANCE_WEIGHTS,
        ref_weights.as_slice(),
        tol::RU_REFERENCE_WEIGHTS_ABS,
    );
    rows.push(ComparisonRow::new(
        "min_variance",
        RU_MIN_VARIANCE,
        ref_variance,
        tol::RU_REFERENCE_VARIANCE_ABS,
    ));

    for &(tail, published) in &RU_OPTIMAL_CVAR {
        if let Some(only) = opts.quantile {
            if (only - tail).abs() > 1e-12 {
                continue;
            }
        }
        let default_j = if tail < 0.05 {
            replay::RU_DEEP_TAIL_SCENARIOS
        } else {
            replay::RU_SCENARIOS
        };
        let scenario_count = opts.scenario_count.unwrap_or(default_j);
        let scenarios = ru_scenarios(scenario_count)?;
        let problem = OptimizationProblem::new(
            ObjectiveSource::Distributional {
                scenarios,
                spec: RiskSpec::ConditionalValueAtRisk { tail },
            },
            ru_return_constraint(),
            SamplerConfig::new(3, opts.base(replay::RU_BASE), opts.depth(), 0)?,
        )?;
        let result = run_workers(&problem, opts.workers(replay::RU_WORKERS), opts.seed())?;
        let tolerance = if tail < 0.05 {
            tol::RU_CVAR_DEEP_TAIL_ABS
        } else {
            tol::RU_CVAR_ABS
        };
        rows.push(ComparisonRow::new(
            format!("cvar_u={tail}"),
            published,
            result.best_risk,
            tolerance,
        ));
        if (tail - 0.05).abs() < 1e-12 {
            weight_rows(
                &mut rows,
                "cvar_u=0.05",
                &RU_MIN_VARIANCE_WEIGHTS,
                result.best_weights.as_slice(),
                tol::RU_CVAR_WEIGHTS_ABS,
            );
        }
    }
    Ok(rows)
}

fn omega_admn(opts: &CaseOptions) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::new();
    for &(u, expected) in &ADMN_MARGINAL_VAR {
        for (i, &target) in expected.iter().enumerate() {
            let got =
                marginal_var_student(ADMN_MEANS[i], ADMN_SIGMAS[i], ADMN_DEGREES_OF_FREEDOM, u)?;
            rows.push(ComparisonRow::new(
                format!("var_u={u}_asset{}", i + 1),
                target,
                got,
                tol::MARGINAL_VAR_ABS,
            ));
        }
    }

    let scenarios = simulate_student_t(
        &ADMN_MEANS,
        &ADMN_SIGMAS,
        &admn_correlation(),
        ADMN_DEGREES_OF_FREEDOM,
        opts.scenario_count.unwrap_or(replay::ADMN_SCENARIOS),
        replay::ADMN_SCENARIO_SEED,
    )?;
    let optimize = |threshold: f64| -> Result<OptimizationResult> {
        let problem = OptimizationProblem::new(
            ObjectiveSource::Distributional {
                scenarios: scenarios.clone(),
                spec: RiskSpec::NegativeOmega { threshold },
            },
            ConstraintSet::none(),
            SamplerConfig::new(3, opts.base(replay::ADMN_BASE), opts.depth(), 0)?,
        )?;
        Ok(run_workers(
            &problem,
            opts.workers(replay::ADMN_WORKERS),
            opts.seed(),
        )?)
    };
    for &(threshold, omega_target, weights_target) in &ADMN_OMEGA_TARGETS {
        let result = optimize(threshold)?;
        rows.push(ComparisonRow::new(
            format!("omega_b={threshold}"),
            omega_target,
            -result.best_risk,
            tol::ADMN_OMEGA_REL * omega_target,
        ));
        weight_rows(
            &mut rows,
            &format!("omega_b={threshold}"),
            &weights_target,
            result.best_weights.as_slice(),
            tol::ADMN_WEIGHTS_ABS,
        );
    }

    // Above every asset mean the optimum snaps to a single asset.
    let result = optimize(1.0)?;
    let concentration = result
        .best_weights
        .as_slice()
        .iter()
        .cloned()
        .fold(f64::MIN, f64::max);
    rows.push(ComparisonRow::new(
        "max_weight_b=1",
        1.0,
        concentration,
        1.0 - tol::ADMN_CONCENTRATION_MIN,
    ));
    Ok(rows)
}
