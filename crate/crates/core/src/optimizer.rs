//! The search loop: stream edge-vertex-biased candidates, evaluate the
//! objective on each survivor of the constraint filter, keep the
//! minimum. Workers are independent deterministic searches over the
//! shared read-only problem, merged best-of-best; the merge is a min
//! with a lexicographic tie break, so any execution schedule gives the
//! identical result.

use std::time::Instant;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::reference::{better_candidate, grid_oracle, GridSpec, ReferenceError};
use crate::risk::{evaluate_in_place, portfolio_returns_into, RiskError, RiskSpec};
use crate::scenario::{
    covariance_discrepancy, realized_covariance, CovarianceSpec, ScenarioError, ScenarioMatrix,
};
use crate::simplex::{
    normalize_in_place, square_and_renormalize, ConstraintSet, PortfolioWeights, SamplerConfig,
    SimplexError,
};

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("no feasible candidates; tighten constraints or enlarge the sample")]
    NoFeasibleCandidates,
    #[error("worker_count must be at least 1")]
    NoWorkers,
    #[error("dimension mismatch between problem parts: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Sampler(#[from] SimplexError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error(transparent)]
    Reference(#[from] ReferenceError),
}

/// What the candidates are scored against: a quadratic form evaluated
/// directly, or a risk functional of the projected scenario returns.
#[derive(Debug)]
pub enum ObjectiveSource {
    AnalyticQuadratic {
        covariance: CovarianceSpec,
        lambda: f64,
        expected_returns: Option<Vec<f64>>,
    },
    Distributional {
        scenarios: ScenarioMatrix,
        spec: RiskSpec,
    },
}

impl ObjectiveSource {
    fn asset_count(&self) -> usize {
        match self {
            Self::AnalyticQuadratic { covariance, .. } => covariance.dimension(),
            Self::Distributional { scenarios, .. } => scenarios.asset_count(),
        }
    }

    fn label(&self) -> String {
        match self {
            Self::AnalyticQuadratic { lambda, .. } => format!("mv:{lambda}"),
            Self::Distributional { spec, .. } => spec.to_string(),
        }
    }
}

/// The full search specification. The equal-weight 1/N portfolio is
/// injected as an extra candidate by default, so the search can never
/// return something worse than equal allocation when that is feasible;
/// switch it off for a faithful sampling-only run. `merge_even_pool`
/// optionally adds an exponential-ratio (even) pool of the same size as
/// the biased one, improving interior coverage in high dimension.
#[derive(Debug)]
pub struct OptimizationProblem {
    pub objective: ObjectiveSource,
    pub constraints: ConstraintSet,
    pub sampler: SamplerConfig,
    pub include_equal_weight_baseline: bool,
    pub merge_even_pool: bool,
}

impl OptimizationProblem {
    pub fn new(
        objective: ObjectiveSource,
        constraints: ConstraintSet,
        sampler: SamplerConfig,
    ) -> Result<Self, OptimizerError> {
        sampler.validate()?;
        let n = objective.asset_count();
        if sampler.n_assets != n {
            return Err(OptimizerError::DimensionMismatch {
                expected: n,
                got: sampler.n_assets,
            });
        }
        if let ObjectiveSource::AnalyticQuadratic {
            expected_returns: Some(r),
            ..
        } = &objective
        {
            if r.len() != n {
                return Err(OptimizerError::DimensionMismatch {
                    expected: n,
                    got: r.len(),
                });
            }
        }
        if let ObjectiveSource::Distributional { spec, .. } = &objective {
            spec.validate()?;
        }
        constraints.validate(n)?;
        Ok(Self {
            objective,
            constraints,
            sampler,
            include_equal_weight_baseline: true,
            merge_even_pool: false,
        })
    }

    pub fn with_baseline(mut self, on: bool) -> Self {
        self.include_equal_weight_baseline = on;
        self
    }

    pub fn with_even_pool(mut self, on: bool) -> Self {
        self.merge_even_pool = on;
        self
    }
}

/// Search outcome. `elapsed_ms` is wall-clock provenance and is the one
/// field not reproduced bit-identically across reruns.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizationResult {
    #[serde(rename = "weights")]
    pub best_weights: PortfolioWeights,
    #[serde(rename = "risk")]
    pub best_risk: f64,
    pub risk_spec: String,
    pub candidates_evaluated: u64,
    pub candidates_accepted: u64,
    pub master_seed: u64,
    pub worker_count: usize,
    pub elapsed_ms: u64,
}

impl OptimizationResult {
    /// Acceptance rate of the constraint filter over this run.
    pub fn acceptance_rate(&self) -> f64 {
        if self.candidates_evaluated == 0 {
            return 0.0;
        }
        self.candidates_accepted as f64 / self.candidates_evaluated as f64
    }
}

/// Per-worker seed derivation: a SplitMix64 finalizer over
/// `master_seed + worker_index * 0x9E3779B97F4A7C15`, i.e.
///
/// ```text
/// z  = master ⊞ index ⊠ 0x9E3779B97F4A7C15      (wrapping u64)
/// z ^= z >> 30; z ⊠= 0xBF58476D1CE4E5B9
/// z ^= z >> 27; z ⊠= 0x94D049BB133111EB
/// z ^= z >> 31
/// ```
///
/// Fixed bit-exactly so runs are reproducible across platforms and so
/// worker streams are decorrelated even for adjacent indices.
pub fn worker_seed(master_seed: u64, worker_index: u64) -> u64 {
    let mut z = master_seed.wrapping_add(worker_index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct WorkerOutcome {
    best: Option<(f64, Vec<f64>)>,
    evaluated: u64,
    accepted: u64,
}

// Borrowed view of one search, so callers (the diagnostics in
// particular) can mix objectives over a shared uncloneable constraint
// set.
#[derive(Clone, Copy)]
struct StreamSpec<'a> {
    objective: &'a ObjectiveSource,
    constraints: &'a ConstraintSet,
    sampler: &'a SamplerConfig,
    baseline: bool,
    even_pool: bool,
}

impl<'a> StreamSpec<'a> {
    fn of(problem: &'a OptimizationProblem) -> Self {
        Self {
            objective: &problem.objective,
            constraints: &problem.constraints,
            sampler: &problem.sampler,
            baseline: problem.include_equal_weight_baseline,
            even_pool: problem.merge_even_pool,
        }
    }
}

// One full candidate stream for one seed. Candidates appear in a fixed
// order (each base row with its bias levels p = 0..=P, then the
// optional even pool, then the baseline), so the stream for a smaller
// base_count is a prefix of the stream for a larger one.
fn run_stream(spec: StreamSpec<'_>, seed: u64) -> WorkerOutcome {
    let sampler = spec.sampler;
    let n = sampler.n_assets;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniforms = vec![0.0_f64; n];
    let mut level = vec![0.0_f64; n];
    let mut returns_scratch: Vec<f64> = Vec::new();
    let mut outcome = WorkerOutcome {
        best: None,
        evaluated: 0,
        accepted: 0,
    };

    let process = |w: &[f64], outcome: &mut WorkerOutcome, scratch: &mut Vec<f64>| {
        outcome.evaluated += 1;
        if !spec.constraints.is_satisfied(w) {
            return;
        }
        outcome.accepted += 1;
        let risk = candidate_risk(spec.objective, w, scratch);
        if better_candidate(risk, w, &outcome.best) {
            outcome.best = Some((risk, w.to_vec()));
        }
    };

    for _ in 0..sampler.base_count {
        for u in uniforms.iter_mut() {
            *u = rng.sample(Open01);
        }
        level.copy_from_slice(&uniforms);
        normalize_in_place(&mut level);
        process(&level, &mut outcome, &mut returns_scratch);
        for _ in 1..=sampler.bias_depth {
            square_and_renormalize(&mut level);
            process(&level, &mut outcome, &mut returns_scratch);
        }
    }

    if spec.even_pool {
        let pool = sampler.base_count * (sampler.bias_depth as usize + 1);
        for _ in 0..pool {
            for u in uniforms.iter_mut() {
                let v: f64 = rng.sample(Open01);
                *u = v.ln();
            }
            level.copy_from_slice(&uniforms);
            normalize_in_place(&mut level);
            process(&level, &mut outcome, &mut returns_scratch);
        }
    }

    if spec.baseline {
        let equal = vec![1.0 / n as f64; n];
        process(&equal, &mut outcome, &mut returns_scratch);
    }

    outcome
}

// Risk of one candidate; any per-candidate evaluation error maps to the
// +infinity sentinel so a single degenerate candidate cannot abort a
// million-candidate run (it simply never wins).
fn candidate_risk(objective: &ObjectiveSource, w: &[f64], scratch: &mut Vec<f64>) -> f64 {
    match objective {
        ObjectiveSource::AnalyticQuadratic {
            covariance,
            lambda,
            expected_returns,
        } => {
            let mut value = covariance.quadratic_form(w);
            if let Some(r) = expected_returns {
                let ret: f64 = r.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
                value -= lambda * ret;
            }
            value
        }
        ObjectiveSource::Distributional { scenarios, spec } => {
            portfolio_returns_into(w, scenarios, scratch);
            evaluate_in_place(spec, scratch).unwrap_or(f64::INFINITY)
        }
    }
}

fn finish(
    outcome: WorkerOutcome,
    label: String,
    master_seed: u64,
    worker_count: usize,
    started: Instant,
) -> Result<OptimizationResult, OptimizerError> {
    let (best_risk, weights) = outcome.best.ok_or(OptimizerError::NoFeasibleCandidates)?;
    let best_weights = PortfolioWeights::new(weights)?;
    Ok(OptimizationResult {
        best_weights,
        best_risk,
        risk_spec: label,
        candidates_evaluated: outcome.evaluated,
        candidates_accepted: outcome.accepted,
        master_seed,
        worker_count: 1.max(worker_count),
        elapsed_ms: started.elapsed().as_millis() as u64,
    })
}

/// One search over `base_count * (bias_depth + 1)` biased candidates
/// (plus the optional even pool and the equal-weight baseline), fully
/// determined by `seed`. The seed in `problem.sampler` is superseded by
/// the argument.
pub fn optimize_single(
    problem: &OptimizationProblem,
    seed: u64,
) -> Result<OptimizationResult, OptimizerError> {
    let started = Instant::now();
    let outcome = run_stream(StreamSpec::of(problem), seed);
    finish(outcome, problem.objective.label(), seed, 1, started)
}

/// Best-of-best over `worker_count` independent searches seeded by
/// [`worker_seed`]`(master_seed, w)` for w = 1..=worker_count. The
/// result is identical whatever the execution order or degree of
/// physical parallelism, and equals the minimum of the per-worker
/// results under the same tie break. Fails with "no feasible
/// candidates" only if every worker reports it.
pub fn run_workers(
    problem: &OptimizationProblem,
    worker_count: usize,
    master_seed: u64,
) -> Result<OptimizationResult, OptimizerError> {
    if worker_count == 0 {
        return Err(OptimizerError::NoWorkers);
    }
    let started = Instant::now();
    let outcomes: Vec<WorkerOutcome> = (1..=worker_count)
        .into_par_iter()
        .map(|w| run_stream(StreamSpec::of(problem), worker_seed(master_seed, w as u64)))
        .collect();
    let mut merged = WorkerOutcome {
        best: None,
        evaluated: 0,
        accepted: 0,
    };
    for outcome in outcomes {
        merged.evaluated += outcome.evaluated;
        merged.accepted += outcome.accepted;
        if let Some((risk, weights)) = outcome.best {
            if better_candidate(risk, &weights, &merged.best) {
                merged.best = Some((risk, weights));
            }
        }
    }
    finish(
        merged,
        problem.objective.label(),
        master_seed,
        worker_count,
        started,
    )
}

// ---------------------------------------------------------------------
// Consistency diagnostics.
// ---------------------------------------------------------------------

/// The five comparable computations for a quadratic-compatible problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ComputationKind {
    /// Grid-oracle QP on the input covariance.
    OracleQpInput,
    /// Grid-oracle QP on the realized covariance.
    OracleQpRealized,
    /// Monte Carlo search of the quadratic form, input covariance.
    McQpInput,
    /// Monte Carlo search of the quadratic form, realized covariance.
    McQpRealized,
    /// Monte Carlo search with full distributional sampling.
    McDistributional,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityComputation {
    pub kind: ComputationKind,
    pub weights: PortfolioWeights,
    pub objective: f64,
}

/// Side-by-side optima of every applicable computation, their pairwise
/// max-abs weight gaps, and the covariance discrepancy of the scenario
/// set. Agreement across the QP members says the portfolio sample is
/// large enough; agreement between the realized-covariance members and
/// the distributional member says the scenario sample is.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub computations: Vec<StabilityComputation>,
    pub pairwise_weight_gaps: Vec<(ComputationKind, ComputationKind, f64)>,
    pub covariance_discrepancy: f64,
    pub degenerate_scenarios: bool,
}

fn max_abs_gap(a: &PortfolioWeights, b: &PortfolioWeights) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice().iter())
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Runs the applicable members of the consistency enumeration for a
/// quadratic problem over the given scenario set. All Monte Carlo
/// members reuse `sampler.seed`, mirroring the reseed-per-session style
/// of the reference runs, so they score the identical candidate set.
pub fn stability_diagnostics(
    input_covariance: &CovarianceSpec,
    lambda: f64,
    expected_returns: Option<&[f64]>,
    scenarios: &ScenarioMatrix,
    sampler: &SamplerConfig,
    constraints: &ConstraintSet,
) -> Result<StabilityReport, OptimizerError> {
    let n = input_covariance.dimension();
    if scenarios.asset_count() != n {
        return Err(OptimizerError::DimensionMismatch {
            expected: n,
            got: scenarios.asset_count(),
        });
    }
    if sampler.n_assets != n {
        return Err(OptimizerError::DimensionMismatch {
            expected: n,
            got: sampler.n_assets,
        });
    }
    let realized = realized_covariance(scenarios);
    let delta = covariance_discrepancy(input_covariance, &realized)?;
    let degenerate = realized.max_abs_entry() < 1e-14;

    let quadratic = |cov: &CovarianceSpec, w: &[f64]| {
        let mut value = cov.quadratic_form(w);
        if let Some(r) = expected_returns {
            value -= lambda * r.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<f64>();
        }
        value
    };

    let grid = GridSpec::for_dimension(n)?;
    let (oracle_in_w, oracle_in_v) =
        grid_oracle(|w| quadratic(input_covariance, w), &grid, constraints)?;
    let (oracle_re_w, oracle_re_v) = grid_oracle(|w| quadratic(&realized, w), &grid, constraints)?;

    let mc = |objective: &ObjectiveSource| -> Result<OptimizationResult, OptimizerError> {
        let started = Instant::now();
        let outcome = run_stream(
            StreamSpec {
                objective,
                constraints,
                sampler,
                baseline: true,
                even_pool: false,
            },
            sampler.seed,
        );
        finish(outcome, objective.label(), sampler.seed, 1, started)
    };

    let mc_input = mc(&ObjectiveSource::AnalyticQuadratic {
        covariance: input_covariance.clone(),
        lambda,
        expected_returns: expected_returns.map(|r| r.to_vec()),
    })?;
    let mc_realized = mc(&ObjectiveSource::AnalyticQuadratic {
        covariance: realized.clone(),
        lambda,
        expected_returns: expected_returns.map(|r| r.to_vec()),
    })?;
    let mc_full = mc(&ObjectiveSource::Distributional {
        scenarios: scenarios.clone(),
        spec: RiskSpec::MeanVariance {
            lambda,
            expected_returns: expected_returns.map(|r| r.to_vec()),
        },
    })?;

    let computations = vec![
        StabilityComputation {
            kind: ComputationKind::OracleQpInput,
            weights: oracle_in_w,
            objective: oracle_in_v,
        },
        StabilityComputation {
            kind: ComputationKind::OracleQpRealized,
            weights: oracle_re_w,
            objective: oracle_re_v,
        },
        StabilityComputation {
            kind: ComputationKind::McQpInput,
            weights: mc_input.best_weights,
            objective: mc_input.best_risk,
        },
        StabilityComputation {
            kind: ComputationKind::McQpRealized,
            weights: mc_realized.best_weights,
            objective: mc_realized.best_risk,
        },
        StabilityComputation {
            kind: ComputationKind::McDistributional,
            weights: mc_full.best_weights,
            objective: mc_full.best_risk,
        },
    ];
    let mut pairwise_weight_gaps = Vec::new();
    for i in 0..computations.len() {
        for j in (i + 1)..computations.len() {
            pairwise_weight_gaps.push((
                computations[i].kind,
                computations[j].kind,
                max_abs_gap(&computations[i].weights, &computations[j].weights),
            ));
        }
    }
    Ok(StabilityReport {
        computations,
        pairwise_weight_gaps,
        covariance_discrepancy: delta,
        degenerate_scenarios: degenerate,
    })
}
