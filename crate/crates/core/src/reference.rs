//! Independent ground truth: the closed-form three-asset minimum
//! variance solution, an exhaustive simplex-lattice oracle with
//! deterministic pairwise-transfer polishing, and the fixed benchmark
//! problems (covariances, correlations, published optima) the search is
//! validated against.

use thiserror::Error;

use crate::scenario::CovarianceSpec;
use crate::simplex::{ConstraintSet, PortfolioWeights};

/// Canonical run parameters for the benchmark replays, shared by the
/// validation suite and the `reproduce` command so both exercise the
/// identical configuration.
pub mod replay {
    pub const MASTER_SEED: u64 = 20;
    pub const BIAS_DEPTH: u32 = 5;
    pub const THREE_ASSET_BASE: usize = 100_000;
    pub const THREE_ASSET_WORKERS: usize = 4;
    pub const SIX_ASSET_BASE: usize = 20_000;
    pub const SIX_ASSET_WORKERS: usize = 8;
    pub const RU_BASE: usize = 2_500;
    pub const RU_WORKERS: usize = 8;
    pub const RU_SCENARIOS: usize = 100_000;
    pub const RU_DEEP_TAIL_SCENARIOS: usize = 200_000;
    pub const RU_SCENARIO_SEED: u64 = 20;
    pub const ADMN_BASE: usize = 2_000;
    pub const ADMN_WORKERS: usize = 8;
    pub const ADMN_SCENARIOS: usize = 50_000;
    pub const ADMN_SCENARIO_SEED: u64 = 8;
}

#[derive(Debug, Error)]
pub enum ReferenceError {
    #[error("grid oracle supports at most {max} assets, got {got}")]
    TooManyAssets { max: usize, got: usize },
    #[error("resolution must be at least 1")]
    InvalidResolution,
    #[error("lattice has {size} points, above the ceiling {ceiling}")]
    LatticeTooLarge { size: u128, ceiling: u128 },
    #[error("no feasible lattice point")]
    NoFeasibleLatticePoint,
}

// ---------------------------------------------------------------------
// Benchmark problem data.
// ---------------------------------------------------------------------

/// Raw rows of the parametrized three-asset matrix. The closed-form
/// minimizer below is stated for the whole range `-1 <= r <= 1`, but
/// the matrix is only positive semi-definite for r above roughly
/// -0.79; outside that the minimization is of an indefinite quadratic
/// form over the compact simplex, which is still well posed.
pub fn three_asset_covariance_rows(r: f64) -> Vec<Vec<f64>> {
    vec![
        vec![64.0, 120.0 * r, 25.0],
        vec![120.0 * r, 225.0, 50.0],
        vec![25.0, 50.0, 100.0],
    ]
}

/// Parametrized three-asset covariance for correlation parameters where
/// the matrix is a genuine covariance (all the benchmark rows are).
pub fn three_asset_covariance(r: f64) -> CovarianceSpec {
    CovarianceSpec::new(three_asset_covariance_rows(r))
        .expect("three-asset matrix is PSD at the benchmark correlations")
}

/// The six-asset stress covariance whose optimum concentrates in two
/// assets with four exact zeros.
pub fn six_asset_covariance() -> CovarianceSpec {
    CovarianceSpec::new(vec![
        vec![0.0549686, 0.144599, -0.188442, 0.0846818, 0.21354, 0.0815392],
        vec![0.144599, 1.00269, -0.837786, 0.188534, 0.23907, -0.376582],
        vec![-0.188442, -0.837786, 1.65445, 0.404402, 0.34708, -0.350142],
        vec![0.0846818, 0.188534, 0.404402, 0.709815, 1.13685, -0.177787],
        vec![0.21354, 0.23907, 0.34708, 1.13685, 2.13408, 0.166434],
        vec![0.0815392, -0.376582, -0.350142, -0.177787, 0.166434, 0.890896],
    ])
    .expect("published stress matrix is positive definite")
}

/// Published optimal weights for [`six_asset_covariance`].
pub const SIX_ASSET_OPTIMAL_WEIGHTS: [f64; 6] = [0.883333, 0.0, 0.11667, 0.0, 0.0, 0.0];

/// Rockafellar-Uryasev three-asset test covariance.
pub fn ru_covariance() -> CovarianceSpec {
    CovarianceSpec::new(vec![
        vec![0.00324625, 0.00022983, 0.00420395],
        vec![0.00022983, 0.00049937, 0.00019247],
        vec![0.00420395, 0.00019247, 0.00764097],
    ])
    .expect("published RU covariance is positive definite")
}

/// Expected returns of the RU test problem.
pub const RU_EXPECTED_RETURNS: [f64; 3] = [0.010111, 0.0043532, 0.0137058];

/// Required expected portfolio return of the RU test problem. The
/// published optimal weights satisfy `mu . w = 0.011` exactly (binding),
/// so every comparison against them must impose the same floor.
pub const RU_REQUIRED_RETURN: f64 = 0.011;

/// The return-floor constraint `mu . w >= 0.011` of the RU problem.
pub fn ru_return_constraint() -> ConstraintSet {
    ConstraintSet {
        linear_inequalities: vec![crate::simplex::LinearInequality {
            coefficients: RU_EXPECTED_RETURNS.to_vec(),
            bound: RU_REQUIRED_RETURN,
        }],
        ..ConstraintSet::default()
    }
}

/// Published minimum-variance weights of the RU problem.
pub const RU_MIN_VARIANCE_WEIGHTS: [f64; 3] = [0.452013, 0.115573, 0.432414];

/// Published minimum variance of the RU problem.
pub const RU_MIN_VARIANCE: f64 = 0.00378529;

/// Published optimal CVaR by tail level (u, CVaR) for the RU problem.
pub const RU_OPTIMAL_CVAR: [(f64, f64); 3] =
    [(0.1, 0.096975), (0.05, 0.115908), (0.01, 0.152977)];

/// Unconditional correlation of the simplified three-index Omega model.
pub fn admn_correlation() -> CovarianceSpec {
    CovarianceSpec::new(vec![
        vec![1.0, 0.47105463, 0.35635569],
        vec![0.47105463, 1.0, 0.44091699],
        vec![0.35635569, 0.44091699, 1.0],
    ])
    .expect("published correlation is positive definite")
}

/// Holding-period means of the simplified Omega model.
pub const ADMN_MEANS: [f64; 3] = [0.18963989, 0.16829560, 0.2788619];

/// Holding-period standard deviations of the simplified Omega model.
pub const ADMN_SIGMAS: [f64; 3] = [2.3251341, 2.0430214, 1.8134084];

/// Degrees of freedom of the simplified Omega model.
pub const ADMN_DEGREES_OF_FREEDOM: f64 = 9.0;

/// Published marginal VaR entries (u, [asset A, B, C]).
pub const ADMN_MARGINAL_VAR: [(f64, [f64; 3]); 2] = [
    (0.05, [-3.5693, -3.13456, -2.65279]),
    (0.01, [-5.59593, -4.9153, -4.2334]),
];

/// Published Omega-optimal rows (threshold b, optimal Omega, weights).
pub const ADMN_OMEGA_TARGETS: [(f64, f64, [f64; 3]); 4] = [
    (-4.0, 662.7, [0.22, 0.26, 0.52]),
    (-3.0, 180.0, [0.20, 0.25, 0.55]),
    (-2.0, 37.4, [0.19, 0.26, 0.55]),
    (-1.0, 7.9, [0.19, 0.23, 0.58]),
];

// ---------------------------------------------------------------------
// Closed-form three-asset solution.
// ---------------------------------------------------------------------

/// Region boundaries of the piecewise closed form, taken verbatim from
/// the published solution; the continuity check in the tests guards
/// the transcription.
pub const THREE_ASSET_REGION_LOW: f64 = -0.383782;
pub const THREE_ASSET_REGION_HIGH: f64 = 0.425;

/// The exact minimizer of `w . C(r) . w` on the simplex for the
/// three-asset family, as a piecewise formula in the correlation
/// parameter; `w3 = 1 - w1 - w2`.
pub fn analytic_three_asset(r: f64) -> PortfolioWeights {
    assert!((-1.0..=1.0).contains(&r), "r must lie in [-1, 1], got {r}");
    let (w1, w2) = if r < THREE_ASSET_REGION_LOW {
        let w1 = (225.0 - 120.0 * r) / (289.0 - 240.0 * r);
        (w1, 1.0 - w1)
    } else if r <= THREE_ASSET_REGION_HIGH {
        let den = 576.0 * r * r + 240.0 * r - 1001.0;
        (
            5.0 * (48.0 * r - 125.0) / den,
            9.0 * (40.0 * r - 17.0) / den,
        )
    } else {
        (0.657895, 0.0)
    };
    let w3 = (1.0 - w1 - w2).max(0.0);
    PortfolioWeights::new(vec![w1, w2, w3]).expect("closed form stays on the simplex")
}

// ---------------------------------------------------------------------
// Grid oracle.
// ---------------------------------------------------------------------

/// Lattice geometry for the oracle: points `w_i = k_i / resolution` with
/// `sum k_i = resolution`.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub n_assets: usize,
    pub resolution: usize,
    pub polish_steps: usize,
}

/// Hard cap on enumerated lattice points.
pub const LATTICE_CEILING: u128 = 20_000_000;

const MAX_GRID_ASSETS: usize = 8;

impl GridSpec {
    pub fn new(n_assets: usize, resolution: usize, polish_steps: usize) -> Result<Self, ReferenceError> {
        let spec = Self {
            n_assets,
            resolution,
            polish_steps,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// A resolution that keeps the lattice near a million points, which
    /// polishing then refines.
    pub fn for_dimension(n_assets: usize) -> Result<Self, ReferenceError> {
        let resolution = match n_assets {
            0 | 1 => 1,
            2 => 100_000,
            3 => 1000,
            4 => 180,
            5 => 70,
            6 => 40,
            7 => 28,
            _ => 22,
        };
        Self::new(n_assets, resolution, 40)
    }

    pub fn validate(&self) -> Result<(), ReferenceError> {
        if self.n_assets == 0 || self.n_assets > MAX_GRID_ASSETS {
            return Err(ReferenceError::TooManyAssets {
                max: MAX_GRID_ASSETS,
                got: self.n_assets,
            });
        }
        if self.resolution == 0 {
            return Err(ReferenceError::InvalidResolution);
        }
        let size = self.lattice_size();
        if size > LATTICE_CEILING {
            return Err(ReferenceError::LatticeTooLarge {
                size,
                ceiling: LATTICE_CEILING,
            });
        }
        Ok(())
    }

    /// C(resolution + n - 1, n - 1).
    pub fn lattice_size(&self) -> u128 {
        let n = self.n_assets as u128;
        let m = self.resolution as u128;
        let mut acc: u128 = 1;
        for i in 1..n {
            acc = acc.saturating_mul(m + i) / i;
        }
        acc
    }
}

// Lexicographically-smaller-wins tie break shared with the optimizer.
fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

pub(crate) fn better_candidate(value: f64, weights: &[f64], best: &Option<(f64, Vec<f64>)>) -> bool {
    match best {
        None => true,
        Some((bv, bw)) => value < *bv || (value == *bv && lex_less(weights, bw)),
    }
}

fn enumerate_lattice(
    n: usize,
    resolution: usize,
    mut visit: impl FnMut(&[f64]),
) {
    let inv = 1.0 / resolution as f64;
    let mut w = vec![0.0; n];
    // Depth-first over compositions of `resolution` into n parts.
    fn recurse(
        w: &mut Vec<f64>,
        level: usize,
        remaining: usize,
        inv: f64,
        visit: &mut impl FnMut(&[f64]),
    ) {
        if level == w.len() - 1 {
            w[level] = remaining as f64 * inv;
            visit(w);
            return;
        }
        for k in 0..=remaining {
            w[level] = k as f64 * inv;
            recurse(w, level + 1, remaining - k, inv, visit);
        }
    }
    if n == 1 {
        visit(&[1.0]);
        return;
    }
    recurse(&mut w, 0, resolution, inv, &mut visit);
}

/// Exhaustive lattice minimum of `objective` over the constrained
/// simplex, refined by deterministic pairwise-transfer coordinate
/// descent: each round sweeps all ordered coordinate pairs moving mass
/// delta (feasibility-checked, strictly-improving moves only), then
/// halves delta.
///
/// A plain pairwise move cannot travel along an active linear
/// inequality, so each round also sweeps compensated transfer pairs
/// that hold one inequality's value constant; without them the descent
/// stalls short of any boundary optimum.
pub fn grid_oracle<F>(
    objective: F,
    grid: &GridSpec,
    constraints: &ConstraintSet,
) -> Result<(PortfolioWeights, f64), ReferenceError>
where
    F: Fn(&[f64]) -> f64,
{
    grid.validate()?;
    let n = grid.n_assets;
    let mut best: Option<(f64, Vec<f64>)> = None;
    enumerate_lattice(n, grid.resolution, |w| {
        if constraints.is_satisfied(w) {
            let value = objective(w);
            if better_candidate(value, w, &best) {
                best = Some((value, w.to_vec()));
            }
        }
    });
    let (mut value, mut weights) = best.ok_or(ReferenceError::NoFeasibleLatticePoint)?;

    let mut delta = 1.0 / grid.resolution as f64;
    let mut trial = weights.clone();
    let try_move = |weights: &mut Vec<f64>,
                        value: &mut f64,
                        trial: &mut Vec<f64>,
                        moves: &[(usize, f64)]| {
        trial.copy_from_slice(weights);
        for &(idx, step) in moves {
            trial[idx] += step;
        }
        if trial.iter().any(|&x| x < 0.0) || !constraints.is_satisfied(trial) {
            return false;
        }
        let v = objective(trial);
        if v < *value {
            *value = v;
            weights.copy_from_slice(trial);
            true
        } else {
            false
        }
    };
    for _ in 0..grid.polish_steps {
        // Sweep each move family to stall at this step size, then halve.
        for _ in 0..64 {
            let mut improved = false;
            for from in 0..n {
                for to in 0..n {
                    if to == from || weights[from] < delta {
                        continue;
                    }
                    improved |= try_move(
                        &mut weights,
                        &mut value,
                        &mut trial,
                        &[(from, -delta), (to, delta)],
                    );
                }
            }
            for ineq in &constraints.linear_inequalities {
                let a = &ineq.coefficients;
                for from in 0..n {
                    for to in 0..n {
                        if to == from {
                            continue;
                        }
                        for from2 in 0..n {
                            for to2 in 0..n {
                                if to2 == from2 || (from2, to2) == (from, to) {
                                    continue;
                                }
                                // Second transfer scaled so a . w stays
                                // constant across the combined move.
                                let den = a[from2] - a[to2];
                                if den == 0.0 {
                                    continue;
                                }
                                let scale = (a[to] - a[from]) / den;
                                if !(scale > 0.0 && scale < 1e6) {
                                    continue;
                                }
                                improved |= try_move(
                                    &mut weights,
                                    &mut value,
                                    &mut trial,
                                    &[
                                        (from, -delta),
                                        (to, delta),
                                        (from2, -scale * delta),
                                        (to2, scale * delta),
                                    ],
                                );
                            }
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }
        delta *= 0.5;
    }
    let weights = PortfolioWeights::new(weights).expect("transfers preserve the simplex");
    Ok((weights, value))
}

/// Grid-oracle minimum variance of the RU problem under its return
/// floor, cross-checked in the tests against the published weights and
/// variance.
pub fn ru_min_variance_reference() -> (PortfolioWeights, f64) {
    let cov = ru_covariance();
    let grid = GridSpec::new(3, 1000, 40).expect("fixed grid is valid");
    grid_oracle(|w| cov.quadratic_form(w), &grid, &ru_return_constraint())
        .expect("the published optimum is feasible")
}
