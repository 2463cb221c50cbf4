//! Random long-only fully-invested portfolios on the unit simplex.
//!
//! Three equivalent even samplers (sorted gaps, sequential order
//! statistics, exponential ratios), the deliberately biased
//! uniform-ratio scheme, iterated-squaring edge-vertex biasing, and
//! rejection filtering against arbitrary constraint sets.

use std::fmt;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::tolerances;

/// Largest accepted bias depth; the exponent 2^p must stay well inside
/// the f64 range even before renormalization kicks in.
pub const MAX_BIAS_DEPTH: u32 = 30;

#[derive(Debug, Error)]
pub enum SimplexError {
    #[error("n_assets must be at least 1")]
    NoAssets,
    #[error("base_count must be at least 1")]
    EmptyBatch,
    #[error("bias_depth {0} exceeds the overflow guard {MAX_BIAS_DEPTH}")]
    BiasDepthTooLarge(u32),
    #[error("weight {value} at index {index} is negative")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weight at index {index} is not finite")]
    NonFiniteWeight { index: usize },
    #[error("weights sum to {sum}, not 1")]
    WeightSumOffUnit { sum: f64 },
    #[error("expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("base uniform at row {row}, column {col} lies outside the open interval (0, 1)")]
    UniformOutOfRange { row: usize, col: usize },
    #[error("lower bound exceeds upper bound at index {0}")]
    InvertedBounds(usize),
    #[error("no candidate satisfied the constraints (infeasible or too tight); {submitted} submitted")]
    InfeasibleOrTooTight { submitted: usize },
}

/// A long-only fully-invested portfolio: nonnegative entries summing to
/// one within [`tolerances::WEIGHT_SUM`].
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioWeights {
    w: Vec<f64>,
}

impl PortfolioWeights {
    pub fn new(w: Vec<f64>) -> Result<Self, SimplexError> {
        if w.is_empty() {
            return Err(SimplexError::NoAssets);
        }
        let mut sum = 0.0;
        for (i, &v) in w.iter().enumerate() {
            if !v.is_finite() {
                return Err(SimplexError::NonFiniteWeight { index: i });
            }
            if v < 0.0 {
                return Err(SimplexError::NegativeWeight { index: i, value: v });
            }
            sum += v;
        }
        if (sum - 1.0).abs() > tolerances::WEIGHT_SUM {
            return Err(SimplexError::WeightSumOffUnit { sum });
        }
        Ok(Self { w })
    }

    /// The 1/N portfolio.
    pub fn equal_weight(n: usize) -> Result<Self, SimplexError> {
        if n == 0 {
            return Err(SimplexError::NoAssets);
        }
        Ok(Self {
            w: vec![1.0 / n as f64; n],
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.w
    }

    // Construction for samples coming off a normalization, where the
    // invariants hold up to rounding we already account for.
    pub(crate) fn from_normalized(w: Vec<f64>) -> Self {
        debug_assert!(Self::new(w.clone()).is_ok());
        Self { w }
    }
}

impl serde::Serialize for PortfolioWeights {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.w.serialize(serializer)
    }
}

/// Batch geometry and seeding for the samplers.
///
/// `bias_depth` is only consulted by the edge-vertex machinery: the
/// powers used are 2^p for p = 0..=bias_depth. The even samplers ignore
/// it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub n_assets: usize,
    pub base_count: usize,
    pub bias_depth: u32,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(
        n_assets: usize,
        base_count: usize,
        bias_depth: u32,
        seed: u64,
    ) -> Result<Self, SimplexError> {
        let config = Self {
            n_assets,
            base_count,
            bias_depth,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), SimplexError> {
        if self.n_assets == 0 {
            return Err(SimplexError::NoAssets);
        }
        if self.base_count == 0 {
            return Err(SimplexError::EmptyBatch);
        }
        if self.bias_depth > MAX_BIAS_DEPTH {
            return Err(SimplexError::BiasDepthTooLarge(self.bias_depth));
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// One linear inequality `a . w >= c`.
#[derive(Debug, Clone)]
pub struct LinearInequality {
    pub coefficients: Vec<f64>,
    pub bound: f64,
}

impl LinearInequality {
    pub fn holds(&self, w: &[f64]) -> bool {
        let lhs: f64 = self
            .coefficients
            .iter()
            .zip(w.iter())
            .map(|(a, x)| a * x)
            .sum();
        lhs >= self.bound
    }
}

/// Arbitrary boolean test on a weight vector; constraints need not be
/// linear.
pub type WeightPredicate = Box<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Bounds, linear inequalities and free-form predicates, all enforced by
/// rejection.
#[derive(Default)]
pub struct ConstraintSet {
    pub lower_bounds: Option<Vec<f64>>,
    pub upper_bounds: Option<Vec<f64>>,
    pub linear_inequalities: Vec<LinearInequality>,
    pub general_predicates: Vec<WeightPredicate>,
}

impl ConstraintSet {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_unconstrained(&self) -> bool {
        self.lower_bounds.is_none()
            && self.upper_bounds.is_none()
            && self.linear_inequalities.is_empty()
            && self.general_predicates.is_empty()
    }

    pub fn validate(&self, n_assets: usize) -> Result<(), SimplexError> {
        if let Some(lb) = &self.lower_bounds {
            if lb.len() != n_assets {
                return Err(SimplexError::DimensionMismatch {
                    expected: n_assets,
                    got: lb.len(),
                });
            }
        }
        if let Some(ub) = &self.upper_bounds {
            if ub.len() != n_assets {
                return Err(SimplexError::DimensionMismatch {
                    expected: n_assets,
                    got: ub.len(),
                });
            }
        }
        if let (Some(lb), Some(ub)) = (&self.lower_bounds, &self.upper_bounds) {
            for (i, (l, u)) in lb.iter().zip(ub.iter()).enumerate() {
                if l > u {
                    return Err(SimplexError::InvertedBounds(i));
                }
            }
        }
        for ineq in &self.linear_inequalities {
            if ineq.coefficients.len() != n_assets {
                return Err(SimplexError::DimensionMismatch {
                    expected: n_assets,
                    got: ineq.coefficients.len(),
                });
            }
        }
        Ok(())
    }

    pub fn is_satisfied(&self, w: &[f64]) -> bool {
        if let Some(lb) = &self.lower_bounds {
            if w.iter().zip(lb.iter()).any(|(x, l)| x < l) {
                return false;
            }
        }
        if let Some(ub) = &self.upper_bounds {
            if w.iter().zip(ub.iter()).any(|(x, u)| x > u) {
                return false;
            }
        }
        if !self.linear_inequalities.iter().all(|c| c.holds(w)) {
            return false;
        }
        self.general_predicates.iter().all(|p| p(w))
    }
}

impl fmt::Debug for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstraintSet")
            .field("lower_bounds", &self.lower_bounds)
            .field("upper_bounds", &self.upper_bounds)
            .field("linear_inequalities", &self.linear_inequalities)
            .field("general_predicates", &self.general_predicates.len())
            .finish()
    }
}

// ---------------------------------------------------------------------
// Sampling kernels: pure maps from hypercube uniforms to weight vectors.
// ---------------------------------------------------------------------

pub(crate) fn normalize_in_place(v: &mut [f64]) {
    let sum: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= sum;
    }
}

/// One edge-vertex biasing step: square every coordinate, renormalize.
/// The ratio is scale invariant, so renormalizing at each level is
/// mathematically identical to forming U^(2^p) directly but cannot
/// underflow: the largest coordinate never drops below 1/N before the
/// squaring.
pub(crate) fn square_and_renormalize(v: &mut [f64]) {
    for x in v.iter_mut() {
        *x *= *x;
    }
    normalize_in_place(v);
}

fn uniform_ratio_weights(u: &[f64]) -> Vec<f64> {
    let mut w = u.to_vec();
    normalize_in_place(&mut w);
    w
}

// Gaps of the sorted interior points, endpoints 0 and 1 included.
// `u` holds the N-1 interior uniforms.
fn gap_weights(u: &[f64]) -> Vec<f64> {
    let mut points = u.to_vec();
    points.sort_unstable_by(f64::total_cmp);
    let mut w = Vec::with_capacity(points.len() + 1);
    let mut prev = 0.0;
    for &p in &points {
        w.push(p - prev);
        prev = p;
    }
    w.push(1.0 - prev);
    w
}

// Same distribution without the sort: draw the interior points in
// descending order through the quantile of the running maximum. The
// p-maximum on (0, y) has quantile y * u^(1/p).
fn order_statistic_weights(u: &[f64]) -> Vec<f64> {
    if u.is_empty() {
        return vec![1.0];
    }
    let n = u.len() + 1;
    let mut descending = Vec::with_capacity(u.len());
    let mut y = 1.0;
    for (i, &ui) in u.iter().enumerate() {
        let remaining = (n - 1 - i) as f64;
        y *= ui.powf(1.0 / remaining);
        descending.push(y);
    }
    let mut w = Vec::with_capacity(n);
    w.push(1.0 - descending[0]);
    for pair in descending.windows(2) {
        w.push(pair[0] - pair[1]);
    }
    w.push(descending[descending.len() - 1]);
    w.reverse();
    w
}

// Exponential ratios: w_i = log U_i / sum_j log U_j. The exponential
// rate cancels out of the ratio.
fn exponential_weights(u: &[f64]) -> Vec<f64> {
    let mut w: Vec<f64> = u.iter().map(|x| x.ln()).collect();
    normalize_in_place(&mut w);
    w
}

fn draw_uniforms(rng: &mut ChaCha8Rng, buf: &mut Vec<f64>, count: usize) {
    buf.clear();
    for _ in 0..count {
        buf.push(rng.sample(Open01));
    }
}

// ---------------------------------------------------------------------
// Batch samplers.
// ---------------------------------------------------------------------

/// The naive ratio-of-uniforms scheme, `w_i = U_i / sum_j U_j`.
///
/// Deliberately biased toward the simplex center; retained as the p = 0
/// member of the edge-vertex family and for bias demonstrations.
pub fn sample_uniform_ratio(config: &SamplerConfig) -> Result<Vec<PortfolioWeights>, SimplexError> {
    config.validate()?;
    let mut rng = config.rng();
    let mut u = Vec::with_capacity(config.n_assets);
    let mut out = Vec::with_capacity(config.base_count);
    for _ in 0..config.base_count {
        draw_uniforms(&mut rng, &mut u, config.n_assets);
        out.push(PortfolioWeights::from_normalized(uniform_ratio_weights(&u)));
    }
    Ok(out)
}

/// Even sampler, method 1: sort N-1 uniforms and take the gaps.
pub fn sample_gap(config: &SamplerConfig) -> Result<Vec<PortfolioWeights>, SimplexError> {
    config.validate()?;
    let mut rng = config.rng();
    let mut u = Vec::with_capacity(config.n_assets - 1);
    let mut out = Vec::with_capacity(config.base_count);
    for _ in 0..config.base_count {
        draw_uniforms(&mut rng, &mut u, config.n_assets - 1);
        out.push(PortfolioWeights::from_normalized(gap_weights(&u)));
    }
    Ok(out)
}

/// Even sampler, method 2: sequential descending order statistics;
/// identical in distribution to [`sample_gap`] without the sort.
pub fn sample_order_statistics(
    config: &SamplerConfig,
) -> Result<Vec<PortfolioWeights>, SimplexError> {
    config.validate()?;
    let mut rng = config.rng();
    let mut u = Vec::with_capacity(config.n_assets - 1);
    let mut out = Vec::with_capacity(config.base_count);
    for _ in 0..config.base_count {
        draw_uniforms(&mut rng, &mut u, config.n_assets - 1);
        out.push(PortfolioWeights::from_normalized(order_statistic_weights(&u)));
    }
    Ok(out)
}

/// Even sampler, method 3: exponential ratios via `log U_i / sum log U_j`.
pub fn sample_exponential(config: &SamplerConfig) -> Result<Vec<PortfolioWeights>, SimplexError> {
    config.validate()?;
    let mut rng = config.rng();
    let mut u = Vec::with_capacity(config.n_assets);
    let mut out = Vec::with_capacity(config.base_count);
    for _ in 0..config.base_count {
        draw_uniforms(&mut rng, &mut u, config.n_assets);
        out.push(PortfolioWeights::from_normalized(exponential_weights(&u)));
    }
    Ok(out)
}

/// Draws the raw k x N hypercube batch feeding [`apply_ev_bias`].
pub fn sample_hypercube(config: &SamplerConfig) -> Result<Vec<Vec<f64>>, SimplexError> {
    config.validate()?;
    let mut rng = config.rng();
    Ok((0..config.base_count)
        .map(|_| (0..config.n_assets).map(|_| rng.sample(Open01)).collect())
        .collect())
}

/// Edge-vertex biasing: for each base row m and each p = 0..=bias_depth,
/// emits `w_i = U_im^(2^p) / sum_j U_jm^(2^p)` by iterated squaring with
/// renormalization at every level.
///
/// As p grows the mass concentrates on the row's largest coordinate;
/// exact ties split the mass equally among the tied set. Returns one
/// inner vector of bias_depth + 1 samples per base row.
pub fn apply_ev_bias(
    base_uniforms: &[Vec<f64>],
    bias_depth: u32,
) -> Result<Vec<Vec<PortfolioWeights>>, SimplexError> {
    if bias_depth > MAX_BIAS_DEPTH {
        return Err(SimplexError::BiasDepthTooLarge(bias_depth));
    }
    let n = match base_uniforms.first() {
        Some(row) => row.len(),
        None => return Ok(Vec::new()),
    };
    if n == 0 {
        return Err(SimplexError::NoAssets);
    }
    for (r, row) in base_uniforms.iter().enumerate() {
        if row.len() != n {
            return Err(SimplexError::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
        for (c, &v) in row.iter().enumerate() {
            if !(v > 0.0 && v < 1.0) {
                return Err(SimplexError::UniformOutOfRange { row: r, col: c });
            }
        }
    }
    let mut out = Vec::with_capacity(base_uniforms.len());
    let mut level = vec![0.0; n];
    for row in base_uniforms {
        level.copy_from_slice(row);
        normalize_in_place(&mut level);
        let mut per_row = Vec::with_capacity(bias_depth as usize + 1);
        per_row.push(PortfolioWeights::from_normalized(level.clone()));
        for _ in 1..=bias_depth {
            square_and_renormalize(&mut level);
            per_row.push(PortfolioWeights::from_normalized(level.clone()));
        }
        out.push(per_row);
    }
    Ok(out)
}

/// Rejects every candidate violating a bound, linear inequality or
/// predicate. Returns the survivors and the acceptance rate; an empty
/// survivor set over a non-empty batch signals infeasible-or-too-tight
/// so the caller can enlarge the batch or report infeasibility.
pub fn filter_constraints(
    candidates: &[PortfolioWeights],
    constraints: &ConstraintSet,
) -> Result<(Vec<PortfolioWeights>, f64), SimplexError> {
    if candidates.is_empty() {
        return Ok((Vec::new(), 1.0));
    }
    constraints.validate(candidates[0].len())?;
    let accepted: Vec<PortfolioWeights> = candidates
        .iter()
        .filter(|w| constraints.is_satisfied(w.as_slice()))
        .cloned()
        .collect();
    let rate = accepted.len() as f64 / candidates.len() as f64;
    if accepted.is_empty() {
        return Err(SimplexError::InfeasibleOrTooTight {
            submitted: candidates.len(),
        });
    }
    Ok((accepted, rate))
}
