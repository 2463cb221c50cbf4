//! Risk functionals mapping a vector of portfolio-return samples to a
//! scalar, plus the analytic special cases used to validate them:
//! closed-form Gaussian Omega, Student-t quantiles, and scaled-t
//! marginal VaR.
//!
//! Sign conventions: VaR and CVaR are reported as positive losses. The
//! empirical quantile is the plain order statistic at rank ceil(u J)
//! (no interpolation), and CVaR is the plain mean of the worst ceil(u J)
//! outcomes; both are isolated here so alternative estimators can be
//! added without touching callers. All moments are population moments
//! (divisor J) for consistency with the scenario engine.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::scenario::ScenarioMatrix;
use crate::simplex::PortfolioWeights;
use crate::special::{inv_reg_inc_beta, norm_cdf, norm_cdf_complement, norm_pdf};

#[derive(Debug, Error)]
pub enum RiskError {
    #[error("probability must lie strictly inside (0, 1), got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("powers p and q must be strictly positive, got p={p}, q={q}")]
    NonPositivePowers { p: f64, q: f64 },
    #[error("zero dispersion: sample standard deviation is 0")]
    ZeroDispersion,
    #[error("degenerate at threshold: every return equals the threshold")]
    DegenerateAtThreshold,
    #[error("no downside mass below the threshold")]
    NoDownsideMass,
    #[error("return sample needs at least 2 entries, got {0}")]
    TooFewSamples(usize),
    #[error("return at index {0} is not finite")]
    NonFiniteReturn(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degrees of freedom must exceed {min}, got {got}")]
    DegreesOfFreedomTooSmall { min: f64, got: f64 },
    #[error("sigma must be strictly positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("malformed risk spec {input:?}: {reason}")]
    MalformedSpec { input: String, reason: &'static str },
}

/// The objective to evaluate on a return sample.
///
/// Canonical text forms: `mv:<lambda>`, `variance`, `var:<u>`,
/// `cvar:<u>`, `sharpe:<b>`, `omega:<b>`, `phi:<b>,<p>,<q>`.
#[derive(Debug, Clone, PartialEq)]
pub enum RiskSpec {
    /// Population variance minus lambda times the sample mean. The
    /// optional expected-return vector is carried for callers that form
    /// the quadratic objective directly; the sample evaluation always
    /// uses the realized mean.
    MeanVariance {
        lambda: f64,
        expected_returns: Option<Vec<f64>>,
    },
    VarianceOnly,
    ValueAtRisk { tail: f64 },
    ConditionalValueAtRisk { tail: f64 },
    NegativeSharpe { benchmark: f64 },
    NegativeOmega { threshold: f64 },
    VariabilityRatio { threshold: f64, p: f64, q: f64 },
}

impl RiskSpec {
    pub fn validate(&self) -> Result<(), RiskError> {
        match self {
            Self::ValueAtRisk { tail } | Self::ConditionalValueAtRisk { tail } => {
                if !(*tail > 0.0 && *tail < 1.0) {
                    return Err(RiskError::ProbabilityOutOfRange(*tail));
                }
            }
            Self::VariabilityRatio { p, q, .. } => {
                if !(*p > 0.0 && *q > 0.0) {
                    return Err(RiskError::NonPositivePowers { p: *p, q: *q });
                }
            }
            _ => {}
        }
        Ok(())
    }
}

impl fmt::Display for RiskSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MeanVariance { lambda, .. } => write!(f, "mv:{lambda}"),
            Self::VarianceOnly => write!(f, "variance"),
            Self::ValueAtRisk { tail } => write!(f, "var:{tail}"),
            Self::ConditionalValueAtRisk { tail } => write!(f, "cvar:{tail}"),
            Self::NegativeSharpe { benchmark } => write!(f, "sharpe:{benchmark}"),
            Self::NegativeOmega { threshold } => write!(f, "omega:{threshold}"),
            Self::VariabilityRatio { threshold, p, q } => write!(f, "phi:{threshold},{p},{q}"),
        }
    }
}

impl FromStr for RiskSpec {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self, RiskError> {
        let malformed = |reason| RiskError::MalformedSpec {
            input: s.to_string(),
            reason,
        };
        let trimmed = s.trim();
        if trimmed == "variance" {
            return Ok(Self::VarianceOnly);
        }
        let (name, args) = trimmed
            .split_once(':')
            .ok_or_else(|| malformed("expected <name>:<args>"))?;
        let one = |args: &str, reason| -> Result<f64, RiskError> {
            args.trim().parse().map_err(|_| malformed(reason))
        };
        let spec = match name {
            "mv" => Self::MeanVariance {
                lambda: one(args, "lambda must be a number")?,
                expected_returns: None,
            },
            "var" => Self::ValueAtRisk {
                tail: one(args, "tail level must be a number")?,
            },
            "cvar" => Self::ConditionalValueAtRisk {
                tail: one(args, "tail level must be a number")?,
            },
            "sharpe" => Self::NegativeSharpe {
                benchmark: one(args, "benchmark must be a number")?,
            },
            "omega" => Self::NegativeOmega {
                threshold: one(args, "threshold must be a number")?,
            },
            "phi" => {
                let parts: Vec<&str> = args.split(',').collect();
                if parts.len() != 3 {
                    return Err(malformed("phi takes <b>,<p>,<q>"));
                }
                Self::VariabilityRatio {
                    threshold: one(parts[0], "threshold must be a number")?,
                    p: one(parts[1], "p must be a number")?,
                    q: one(parts[2], "q must be a number")?,
                }
            }
            _ => return Err(malformed("unknown risk function name")),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// J portfolio returns, `r_j = sum_i w_i x_ji`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSample {
    r: Vec<f64>,
}

impl ReturnSample {
    pub fn new(r: Vec<f64>) -> Result<Self, RiskError> {
        if r.len() < 2 {
            return Err(RiskError::TooFewSamples(r.len()));
        }
        if let Some(i) = r.iter().position(|x| !x.is_finite()) {
            return Err(RiskError::NonFiniteReturn(i));
        }
        Ok(Self { r })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
}

/// Projects the scenario rows onto the weights.
pub fn portfolio_returns(
    weights: &PortfolioWeights,
    scenarios: &ScenarioMatrix,
) -> Result<ReturnSample, RiskError> {
    if weights.len() != scenarios.asset_count() {
        return Err(RiskError::DimensionMismatch {
            expected: scenarios.asset_count(),
            got: weights.len(),
        });
    }
    let mut out = Vec::new();
    portfolio_returns_into(weights.as_slice(), scenarios, &mut out);
    ReturnSample::new(out)
}

// Hot path used per candidate inside the optimizer; dimensions are the
// caller's responsibility.
pub(crate) fn portfolio_returns_into(w: &[f64], scenarios: &ScenarioMatrix, out: &mut Vec<f64>) {
    out.clear();
    out.reserve(scenarios.scenario_count());
    for row in scenarios.rows() {
        let mut acc = 0.0;
        for (x, wi) in row.iter().zip(w.iter()) {
            acc += x * wi;
        }
        out.push(acc);
    }
}

fn mean(r: &[f64]) -> f64 {
    r.iter().sum::<f64>() / r.len() as f64
}

fn population_variance(r: &[f64]) -> f64 {
    let m = mean(r);
    r.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / r.len() as f64
}

/// Population variance minus lambda times the mean; lambda = 0 is pure
/// variance.
pub fn risk_mean_variance(r: &ReturnSample, lambda: f64) -> f64 {
    mean_variance_slice(r.as_slice(), lambda)
}

fn mean_variance_slice(r: &[f64], lambda: f64) -> f64 {
    population_variance(r) - lambda * mean(r)
}

// Rank of the tail order statistic, ceil(u J) in exact arithmetic. The
// small backoff keeps an exactly-integer u*J from rounding up.
fn tail_rank(tail: f64, j: usize) -> usize {
    let raw = (tail * j as f64 - 1e-9).ceil();
    (raw.max(1.0) as usize).min(j)
}

fn check_tail(tail: f64) -> Result<(), RiskError> {
    if !(tail > 0.0 && tail < 1.0) {
        return Err(RiskError::ProbabilityOutOfRange(tail));
    }
    Ok(())
}

/// Empirical VaR: the negated ceil(u J)-th smallest return. Positive
/// numbers denote losses.
pub fn empirical_var(r: &ReturnSample, tail: f64) -> Result<f64, RiskError> {
    let mut scratch = r.as_slice().to_vec();
    empirical_var_in_place(&mut scratch, tail)
}

fn empirical_var_in_place(r: &mut [f64], tail: f64) -> Result<f64, RiskError> {
    check_tail(tail)?;
    let m = tail_rank(tail, r.len());
    let (_, pivot, _) = r.select_nth_unstable_by(m - 1, f64::total_cmp);
    Ok(-*pivot)
}

/// Empirical CVaR: the negated mean of the ceil(u J) smallest returns.
pub fn empirical_cvar(r: &ReturnSample, tail: f64) -> Result<f64, RiskError> {
    let mut scratch = r.as_slice().to_vec();
    empirical_cvar_in_place(&mut scratch, tail)
}

fn empirical_cvar_in_place(r: &mut [f64], tail: f64) -> Result<f64, RiskError> {
    check_tail(tail)?;
    let m = tail_rank(tail, r.len());
    r.select_nth_unstable_by(m - 1, f64::total_cmp);
    let tail_sum: f64 = r[..m].iter().sum();
    Ok(-(tail_sum / m as f64))
}

/// Negated Sharpe ratio against a benchmark return b:
/// `-(mean - b) / popstddev`.
pub fn negative_sharpe(r: &ReturnSample, benchmark: f64) -> Result<f64, RiskError> {
    negative_sharpe_slice(r.as_slice(), benchmark)
}

fn negative_sharpe_slice(r: &[f64], benchmark: f64) -> Result<f64, RiskError> {
    let sd = population_variance(r).sqrt();
    if sd == 0.0 {
        return Err(RiskError::ZeroDispersion);
    }
    Ok(-(mean(r) - benchmark) / sd)
}

/// Omega ratio `E[(X-b)+] / E[(b-X)+]`.
///
/// Returns +infinity when there is gain mass but no downside mass: such
/// candidates are legitimately the best when b sits below every sampled
/// return, and the optimizer must be able to rank them.
pub fn omega(r: &ReturnSample, threshold: f64) -> Result<f64, RiskError> {
    omega_slice(r.as_slice(), threshold)
}

fn omega_slice(r: &[f64], threshold: f64) -> Result<f64, RiskError> {
    let mut up = 0.0;
    let mut down = 0.0;
    for &x in r {
        up += (x - threshold).max(0.0);
        down += (threshold - x).max(0.0);
    }
    if down == 0.0 {
        if up == 0.0 {
            return Err(RiskError::DegenerateAtThreshold);
        }
        return Ok(f64::INFINITY);
    }
    Ok(up / down)
}

/// Omega through the put-call-parity form `(mean - b) / E[(b-X)+] + 1`.
///
/// Kept as an independent implementation of the same quantity; the two
/// routes agreeing to 1e-12 relative is one of the standing checks.
pub fn omega_put_call(r: &ReturnSample, threshold: f64) -> Result<f64, RiskError> {
    let mut down = 0.0;
    for &x in r.as_slice() {
        down += (threshold - x).max(0.0);
    }
    down /= r.len() as f64;
    let gap = mean(r.as_slice()) - threshold;
    if down == 0.0 {
        if gap > 0.0 {
            return Ok(f64::INFINITY);
        }
        return Err(RiskError::DegenerateAtThreshold);
    }
    Ok(gap / down + 1.0)
}

/// One-sided variability ratio
/// `E[((X-b)+)^p]^(1/p) / E[((b-X)+)^q]^(1/q)`; (1,1) is Omega and
/// (1,2) the Sortino ratio.
pub fn variability_ratio(
    r: &ReturnSample,
    threshold: f64,
    p: f64,
    q: f64,
) -> Result<f64, RiskError> {
    variability_ratio_slice(r.as_slice(), threshold, p, q)
}

fn variability_ratio_slice(r: &[f64], threshold: f64, p: f64, q: f64) -> Result<f64, RiskError> {
    if !(p > 0.0 && q > 0.0) {
        return Err(RiskError::NonPositivePowers { p, q });
    }
    let j = r.len() as f64;
    let mut up = 0.0;
    let mut down = 0.0;
    for &x in r {
        let gain = (x - threshold).max(0.0);
        if gain > 0.0 {
            up += gain.powf(p);
        }
        let loss = (threshold - x).max(0.0);
        if loss > 0.0 {
            down += loss.powf(q);
        }
    }
    if down == 0.0 {
        return Err(RiskError::NoDownsideMass);
    }
    Ok((up / j).powf(1.0 / p) / (down / j).powf(1.0 / q))
}

// phi(z) - z * Phi_c(z), computed without cancellation on either side
// of zero. Strictly positive and strictly decreasing.
fn omega_kernel(z: f64) -> f64 {
    if z >= 0.0 {
        norm_pdf(z) - z * norm_cdf_complement(z)
    } else {
        norm_pdf(z) + (-z) * norm_cdf(-z)
    }
}

/// Closed-form Omega for Gaussian returns with the given mean and
/// standard deviation: `(phi(z) + z Phi(z) - z) / (phi(z) + z Phi(z))`
/// at `z = (b - mu) / sigma`, a strictly decreasing function of z.
pub fn gaussian_omega(mu: f64, sigma: f64, threshold: f64) -> Result<f64, RiskError> {
    if !(sigma > 0.0) {
        return Err(RiskError::NonPositiveSigma(sigma));
    }
    let z = (threshold - mu) / sigma;
    // Numerator phi(z) + z Phi(z) - z = kernel(z); denominator
    // phi(z) + z Phi(z) = kernel(-z) by symmetry of phi.
    Ok(omega_kernel(z) / omega_kernel(-z))
}

/// Quantile of the standard Student-t with n degrees of freedom, via the
/// inverse regularized incomplete beta:
/// `sgn(u - 1/2) sqrt(n (1 / I^-1_z(n/2, 1/2) - 1))` with z = 2 min(u, 1-u).
pub fn student_t_quantile(u: f64, n: f64) -> Result<f64, RiskError> {
    if !(u > 0.0 && u < 1.0) {
        return Err(RiskError::ProbabilityOutOfRange(u));
    }
    if !(n > 0.0) {
        return Err(RiskError::DegreesOfFreedomTooSmall { min: 0.0, got: n });
    }
    if u == 0.5 {
        return Ok(0.0);
    }
    let z = 2.0 * u.min(1.0 - u);
    let x = inv_reg_inc_beta(0.5 * n, 0.5, z);
    let t = (n * (1.0 / x - 1.0)).sqrt();
    Ok(if u < 0.5 { -t } else { t })
}

/// Signed VaR of the scaled-t marginal,
/// `mu + sigma sqrt((n-2)/n) F_n^-1(u)`; negative numbers denote a loss.
/// The sqrt((n-2)/n) factor converts the standard t (variance n/(n-2))
/// to unit variance so sigma is the true marginal standard deviation.
pub fn marginal_var_student(mu: f64, sigma: f64, n: f64, u: f64) -> Result<f64, RiskError> {
    if !(n > 2.0) {
        return Err(RiskError::DegreesOfFreedomTooSmall { min: 2.0, got: n });
    }
    let q = student_t_quantile(u, n)?;
    Ok(mu + sigma * ((n - 2.0) / n).sqrt() * q)
}

/// Dispatches the spec to the matching operation. `NegativeOmega`
/// returns `-omega(r, b)`.
pub fn evaluate(spec: &RiskSpec, r: &ReturnSample) -> Result<f64, RiskError> {
    spec.validate()?;
    let mut scratch = r.as_slice().to_vec();
    evaluate_in_place(spec, &mut scratch)
}

// Same dispatch on a scratch buffer the callee may reorder; the
// optimizer calls this once per candidate.
pub(crate) fn evaluate_in_place(spec: &RiskSpec, r: &mut [f64]) -> Result<f64, RiskError> {
    match spec {
        RiskSpec::MeanVariance { lambda, .. } => Ok(mean_variance_slice(r, *lambda)),
        RiskSpec::VarianceOnly => Ok(mean_variance_slice(r, 0.0)),
        RiskSpec::ValueAtRisk { tail } => empirical_var_in_place(r, *tail),
        RiskSpec::ConditionalValueAtRisk { tail } => empirical_cvar_in_place(r, *tail),
        RiskSpec::NegativeSharpe { benchmark } => negative_sharpe_slice(r, *benchmark),
        RiskSpec::NegativeOmega { threshold } => Ok(-omega_slice(r, *threshold)?),
        RiskSpec::VariabilityRatio { threshold, p, q } => {
            variability_ratio_slice(r, *threshold, *p, *q)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::CovarianceSpec;
    use crate::scenario::simulate_gaussian;
    use approx::assert_abs_diff_eq;

    fn sample(values: &[f64]) -> ReturnSample {
        ReturnSample::new(values.to_vec()).unwrap()
    }

    #[test]
    fn portfolio_returns_examples() {
        let scenarios = ScenarioMatrix::from_rows(vec![
            vec![2.0, 4.0],
            vec![-1.0, 3.0],
            vec![0.0, 0.0],
        ])
        .unwrap();
        let e1 = PortfolioWeights::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(
            portfolio_returns(&e1, &scenarios).unwrap().as_slice(),
            &[2.0, -1.0, 0.0]
        );
        let half = PortfolioWeights::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(
            portfolio_returns(&half, &scenarios).unwrap().as_slice(),
            &[3.0, 1.0, 0.0]
        );
        let zeros = ScenarioMatrix::from_rows(vec![vec![0.0, 0.0]; 3]).unwrap();
        assert_eq!(
            portfolio_returns(&half, &zeros).unwrap().as_slice(),
            &[0.0; 3]
        );
        let wrong = ScenarioMatrix::from_rows(vec![vec![1.0]; 3]).unwrap();
        assert!(portfolio_returns(&half, &wrong).is_err());
    }

    #[test]
    fn mean_variance_examples() {
        assert_abs_diff_eq!(
            risk_mean_variance(&sample(&[3.0, 3.0, 3.0]), 2.0),
            -6.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(risk_mean_variance(&sample(&[-1.0, 1.0]), 0.0), 1.0);
        assert_abs_diff_eq!(risk_mean_variance(&sample(&[0.0, 2.0]), 1.0), 0.0);
    }

    #[test]
    fn var_examples() {
        let r = sample(&[-3.0, -1.0, 0.0, 2.0, 5.0]);
        assert_eq!(empirical_var(&r, 0.2).unwrap(), 3.0);
        assert_eq!(empirical_var(&r, 0.4).unwrap(), 1.0);
        assert_eq!(empirical_var(&sample(&[1.5, 1.5]), 0.5).unwrap(), -1.5);
        assert!(empirical_var(&r, 0.0).is_err());
        assert!(empirical_var(&r, 1.0).is_err());
    }

    #[test]
    fn cvar_examples() {
        let r = sample(&[-3.0, -1.0, 0.0, 2.0, 5.0]);
        assert_eq!(empirical_cvar(&r, 0.4).unwrap(), 2.0);
        assert_eq!(empirical_cvar(&sample(&[2.0, 2.0]), 0.3).unwrap(), -2.0);
        for tail in [0.05, 0.2, 0.4, 0.8] {
            let cvar = empirical_cvar(&r, tail).unwrap();
            let var = empirical_var(&r, tail).unwrap();
            assert!(cvar >= var, "tail {tail}: cvar {cvar} < var {var}");
        }
    }

    #[test]
    fn sharpe_examples() {
        assert_abs_diff_eq!(negative_sharpe(&sample(&[1.0, 3.0]), 0.0).unwrap(), -2.0);
        // Scale invariance: doubling (r - b) leaves the ratio unchanged.
        let b = 0.5;
        let r1 = sample(&[1.0, 2.0, 4.0]);
        let doubled: Vec<f64> = r1.as_slice().iter().map(|x| b + 2.0 * (x - b)).collect();
        assert_abs_diff_eq!(
            negative_sharpe(&r1, b).unwrap(),
            negative_sharpe(&sample(&doubled), b).unwrap(),
            epsilon = 1e-14
        );
        assert!(matches!(
            negative_sharpe(&sample(&[2.0, 2.0]), 0.0),
            Err(RiskError::ZeroDispersion)
        ));
    }

    #[test]
    fn omega_examples() {
        assert_abs_diff_eq!(omega(&sample(&[-1.0, 1.0]), 0.0).unwrap(), 1.0);
        assert_eq!(omega(&sample(&[1.0, 3.0]), 0.0).unwrap(), f64::INFINITY);
        assert_abs_diff_eq!(omega(&sample(&[-2.0, 2.0]), -1.0).unwrap(), 3.0);
        assert!(matches!(
            omega(&sample(&[0.5, 0.5]), 0.5),
            Err(RiskError::DegenerateAtThreshold)
        ));
    }

    #[test]
    fn omega_put_call_examples() {
        assert_abs_diff_eq!(omega_put_call(&sample(&[-1.0, 1.0]), 0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(omega_put_call(&sample(&[-2.0, 2.0]), -1.0).unwrap(), 3.0);
        // Mean equal to threshold pins Omega at exactly 1.
        let r = sample(&[-3.0, 1.0, 2.0]);
        let m = r.as_slice().iter().sum::<f64>() / 3.0;
        assert_abs_diff_eq!(omega_put_call(&r, m).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn variability_examples() {
        let r = sample(&[-1.0, 1.0]);
        assert_abs_diff_eq!(
            variability_ratio(&r, 0.0, 1.0, 1.0).unwrap(),
            omega(&r, 0.0).unwrap(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            variability_ratio(&r, 0.0, 1.0, 2.0).unwrap(),
            0.5 / 0.5_f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(variability_ratio(&r, 0.0, 2.0, 2.0).unwrap(), 1.0);
        assert!(matches!(
            variability_ratio(&sample(&[1.0, 2.0]), 0.0, 1.0, 2.0),
            Err(RiskError::NoDownsideMass)
        ));
    }

    #[test]
    fn gaussian_omega_examples() {
        // b = mu pins z = 0 and Omega = 1.
        assert_abs_diff_eq!(gaussian_omega(0.3, 2.0, 0.3).unwrap(), 1.0, epsilon = 1e-15);
        // Deep-z limits at z = -/+ 8.
        assert!(gaussian_omega(0.0, 1.0, -8.0).unwrap() > 1e12);
        assert!(gaussian_omega(0.0, 1.0, 8.0).unwrap() < 1e-6);
        assert!(gaussian_omega(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn t_quantile_closed_forms() {
        assert_eq!(student_t_quantile(0.5, 7.0).unwrap(), 0.0);
        // Cauchy: tan(pi (u - 1/2)).
        assert_abs_diff_eq!(student_t_quantile(0.75, 1.0).unwrap(), 1.0, epsilon = 1e-12);
        // nu = 2: (2u - 1) / sqrt(2 u (1 - u)).
        assert_abs_diff_eq!(
            student_t_quantile(0.9, 2.0).unwrap(),
            0.8 / 0.18_f64.sqrt(),
            epsilon = 1e-12
        );
        assert!(student_t_quantile(0.0, 3.0).is_err());
        assert!(student_t_quantile(0.4, 0.0).is_err());
    }

    #[test]
    fn marginal_var_examples() {
        // u = 0.5 returns mu exactly.
        assert_eq!(marginal_var_student(0.42, 3.0, 9.0, 0.5).unwrap(), 0.42);
        assert!(matches!(
            marginal_var_student(0.0, 1.0, 2.0, 0.05),
            Err(RiskError::DegreesOfFreedomTooSmall { .. })
        ));
    }

    #[test]
    fn evaluate_dispatch() {
        let r = sample(&[-1.0, 1.0]);
        assert_abs_diff_eq!(
            evaluate(
                &RiskSpec::MeanVariance {
                    lambda: 0.0,
                    expected_returns: None
                },
                &r
            )
            .unwrap(),
            1.0
        );
        assert_abs_diff_eq!(
            evaluate(&RiskSpec::NegativeOmega { threshold: 0.0 }, &r).unwrap(),
            -1.0
        );
        let r5 = sample(&[-3.0, -1.0, 0.0, 2.0, 5.0]);
        assert_eq!(
            evaluate(&RiskSpec::ConditionalValueAtRisk { tail: 0.4 }, &r5).unwrap(),
            2.0
        );
    }

    #[test]
    fn spec_text_round_trip() {
        for text in ["mv:0.5", "variance", "var:0.025", "cvar:0.05", "sharpe:-1", "omega:-0.5", "phi:0,1,2"] {
            let spec: RiskSpec = text.parse().unwrap();
            let shown = spec.to_string();
            let again: RiskSpec = shown.parse().unwrap();
            assert_eq!(spec, again, "{text} -> {shown}");
        }
        assert!("omega:".parse::<RiskSpec>().is_err());
        assert!("nope:1".parse::<RiskSpec>().is_err());
        assert!("cvar:1.5".parse::<RiskSpec>().is_err());
        assert!("phi:0,1".parse::<RiskSpec>().is_err());
    }

    #[test]
    fn monte_carlo_omega_matches_closed_form() {
        // 10^6 Gaussian draws at mu 0, sigma 1, b -0.5, within 1% relative.
        let cov = CovarianceSpec::new(vec![vec![1.0]]).unwrap();
        let draws = simulate_gaussian(&[0.0], &cov, 1_000_000, 2024).unwrap();
        let r = ReturnSample::new(draws.rows().map(|row| row[0]).collect()).unwrap();
        let sampled = omega(&r, -0.5).unwrap();
        let exact = gaussian_omega(0.0, 1.0, -0.5).unwrap();
        assert!(
            (sampled / exact - 1.0).abs() < 0.01,
            "sampled {sampled} vs exact {exact}"
        );
    }

    #[test]
    fn return_sample_invariants() {
        assert!(ReturnSample::new(vec![1.0]).is_err());
        assert!(ReturnSample::new(vec![1.0, f64::NAN]).is_err());
    }
}
