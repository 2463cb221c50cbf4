//! The versioned tolerance table.
//!
//! Every threshold used by the validation suite and the `reproduce`
//! command is defined here, so a tolerance change is a one-line diff
//! with history. Values are absolute unless the name says otherwise.

/// Weight vectors must sum to one within this absolute slack.
pub const WEIGHT_SUM: f64 = 1e-12;

/// Covariance matrices must be symmetric within this elementwise slack.
pub const COVARIANCE_SYMMETRY: f64 = 1e-12;

/// Cholesky pivots in [-PSD_PIVOT, 0] are clamped to zero; anything
/// below -PSD_PIVOT is rejected as not positive semi-definite. Tolerates
/// matrices transcribed at 8 decimals.
pub const PSD_PIVOT: f64 = 1e-10;

/// Recomposition check: `L * L^T` must reproduce the input elementwise.
pub const CHOLESKY_RECOMPOSITION: f64 = 1e-10;

/// Correlation matrices must have unit diagonal within this slack.
pub const CORRELATION_DIAGONAL: f64 = 1e-12;

/// Relative agreement between the direct and put-call-parity Omega forms.
pub const OMEGA_IDENTITY_REL: f64 = 1e-10;

/// Closed-form Gaussian Omega versus the quadrature oracle.
pub const GAUSSIAN_OMEGA_QUADRATURE: f64 = 1e-8;

/// Student-t quantile versus the integrate-and-bisect oracle.
pub const T_QUANTILE_ORACLE: f64 = 1e-8;

/// Student-t quantile antisymmetry: F^-1(1-u) = -F^-1(u).
pub const T_QUANTILE_ANTISYMMETRY: f64 = 1e-12;

/// Student-t quantile at nu = 1e6 versus the normal quantile.
pub const T_QUANTILE_NORMAL_LIMIT: f64 = 1e-3;

/// Kolmogorov-Smirnov coefficient c(alpha) at alpha = 0.01. Critical
/// values are c/sqrt(n) (one-sample) and c*sqrt((n+m)/(n*m)) (two-sample).
pub const KS_COEFFICIENT_1PCT: f64 = 1.62762;

/// Three-asset minimum-variance weights, search versus closed form.
pub const THREE_ASSET_WEIGHTS_ABS: f64 = 0.01;

/// Three-asset minimum-variance objective, relative to the closed form.
pub const THREE_ASSET_OBJECTIVE_REL: f64 = 0.002;

/// Constrained three-asset objective, relative to the published optimum.
pub const CONSTRAINED_OBJECTIVE_REL: f64 = 0.001;

/// Grid-oracle weights versus the closed form (resolution 1000, polish 40).
pub const GRID_VS_ANALYTIC_WEIGHTS_ABS: f64 = 5e-4;

/// Six-asset stress case, weights versus the published optimum.
pub const SIX_ASSET_WEIGHTS_ABS: f64 = 0.005;

/// Optimal CVaR versus the published values at tails 0.1 and 0.05.
pub const RU_CVAR_ABS: f64 = 0.002;

/// Optimal CVaR at the 0.01 tail (deeper tail, wider band).
pub const RU_CVAR_DEEP_TAIL_ABS: f64 = 0.003;

/// CVaR-optimal weights versus the published minimum-variance weights.
pub const RU_CVAR_WEIGHTS_ABS: f64 = 0.03;

/// Grid-oracle reproduction of the published minimum-variance weights.
pub const RU_REFERENCE_WEIGHTS_ABS: f64 = 5e-4;

/// Grid-oracle reproduction of the published minimum variance.
pub const RU_REFERENCE_VARIANCE_ABS: f64 = 1e-6;

/// Omega-optimal weights versus the published table.
pub const ADMN_WEIGHTS_ABS: f64 = 0.06;

/// Optimal Omega versus the published table, relative. Wide because a
/// deep-threshold Omega is a ratio of small tail expectations.
pub const ADMN_OMEGA_REL: f64 = 0.15;

/// Above-mean threshold: minimum weight concentrated in a single asset.
pub const ADMN_CONCENTRATION_MIN: f64 = 0.99;

/// Marginal Student-t VaR versus the published six-entry table.
pub const MARGINAL_VAR_ABS: f64 = 5e-4;

/// Branch disagreement allowed at the closed-form region boundaries.
pub const THREE_ASSET_BOUNDARY_ABS: f64 = 1e-4;

/// A search result can never beat a known analytic optimum; allow this
/// much rounding slack in the comparison.
pub const OPTIMUM_LOWER_BOUND_SLACK: f64 = 1e-9;

/// Wall-clock ceilings in seconds, stated for an 8-core desktop. Runners
/// on fewer cores scale these by 8 / cores before asserting.
pub mod ceilings {
    pub const THREE_ASSET: f64 = 15.0;
    pub const CONSTRAINED: f64 = 10.0;
    pub const SIX_ASSET: f64 = 60.0;
    pub const RU_CVAR: f64 = 600.0;
    pub const RU_REFERENCE: f64 = 10.0;
    pub const ADMN_OMEGA: f64 = 300.0;
    pub const PROPERTY_SUITE: f64 = 120.0;
    pub const ASSUMED_CORES: usize = 8;
}
