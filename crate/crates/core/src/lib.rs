//! Monte Carlo portfolio optimization in a parallel environment.
//!
//! Long-only fully-invested portfolios are sampled on the unit simplex,
//! edge-vertex biased by iterated squaring so that boundary optima are
//! reachable, filtered by rejection against arbitrary constraints, and
//! scored under any risk functional of the sampled return distribution.
//! Workers run independent seeded searches merged best-of-best, so a
//! run is deterministic for a given master seed and worker count.
//!
//! Module map:
//! - [`simplex`]: samplers, edge-vertex biasing, constraint filtering;
//! - [`scenario`]: Gaussian / Student-t simulation, CSV ingestion,
//!   realized-covariance diagnostics;
//! - [`risk`]: the risk functionals and analytic validation formulas;
//! - [`optimizer`]: the search loop, worker merge, and the five-way
//!   consistency diagnostics;
//! - [`reference`]: closed-form and lattice-oracle ground truth plus
//!   the fixed benchmark problems;
//! - [`special`]: the scalar special functions behind the analytics;
//! - [`tolerances`]: the versioned tolerance table;
//! - [`io`]: round-trip-safe CSV output.

pub mod io;
pub mod optimizer;
pub mod reference;
pub mod risk;
pub mod scenario;
pub mod simplex;
pub mod special;
pub mod tolerances;

pub use optimizer::{
    optimize_single, run_workers, stability_diagnostics, ObjectiveSource, OptimizationProblem,
    OptimizationResult, StabilityReport,
};
pub use risk::{ReturnSample, RiskSpec};
pub use scenario::{CovarianceSpec, DistributionSpec, ScenarioMatrix};
pub use simplex::{ConstraintSet, PortfolioWeights, SamplerConfig};
