//! Scenario matrices realizing the multivariate return distribution:
//! Gaussian and multivariate Student-t simulation, CSV ingestion, and
//! input-versus-realized covariance diagnostics.

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use thiserror::Error;

use crate::io::write_matrix_csv;
use crate::tolerances;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("J >= 2 required, got {0}")]
    TooFewScenarios(usize),
    #[error("at least one asset column required")]
    NoAssets,
    #[error("entry at row {row}, column {col} is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("covariance matrix is not square: row {row} has {got} entries, expected {expected}")]
    NotSquare { row: usize, expected: usize, got: usize },
    #[error("covariance matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("not positive semi-definite: pivot {pivot} at index {index}")]
    NotPositiveSemiDefinite { index: usize, pivot: f64 },
    #[error("correlation diagonal entry {index} is not 1")]
    NotUnitDiagonal { index: usize },
    #[error("nu must exceed 2, got {0}")]
    DegreesOfFreedomTooSmall(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty file")]
    EmptyFile,
    #[error("ragged rows: row {row} has {got} cells, expected {expected}")]
    RaggedRows { row: usize, expected: usize, got: usize },
    #[error("non-numeric cell at row {row}, column {col}: {content:?}")]
    NonNumericCell { row: usize, col: usize, content: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// J x N matrix of simulated or ingested per-period asset returns,
/// row-major. Immutable once built; share it read-only across workers.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMatrix {
    data: Vec<f64>,
    scenario_count: usize,
    asset_count: usize,
}

impl ScenarioMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, ScenarioError> {
        let j = rows.len();
        if j < 2 {
            return Err(ScenarioError::TooFewScenarios(j));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(ScenarioError::NoAssets);
        }
        let mut data = Vec::with_capacity(j * n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(ScenarioError::RaggedRows {
                    row: r,
                    expected: n,
                    got: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(ScenarioError::NonFinite { row: r, col: c });
                }
                data.push(v);
            }
        }
        Ok(Self {
            data,
            scenario_count: j,
            asset_count: n,
        })
    }

    pub fn scenario_count(&self) -> usize {
        self.scenario_count
    }

    pub fn asset_count(&self) -> usize {
        self.asset_count
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let start = j * self.asset_count;
        &self.data[start..start + self.asset_count]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.asset_count)
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.asset_count];
        for row in self.rows() {
            for (m, &x) in means.iter_mut().zip(row.iter()) {
                *m += x;
            }
        }
        let inv = 1.0 / self.scenario_count as f64;
        for m in &mut means {
            *m *= inv;
        }
        means
    }
}

/// Symmetric positive semi-definite covariance matrix (validated on
/// construction: symmetry within 1e-12, Cholesky with clamped pivots).
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSpec {
    matrix: Vec<Vec<f64>>,
}

impl CovarianceSpec {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self, ScenarioError> {
        let n = matrix.len();
        if n == 0 {
            return Err(ScenarioError::NoAssets);
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(ScenarioError::NotSquare {
                    row: i,
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(ScenarioError::NonFinite { row: i, col: j });
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (matrix[i][j] - matrix[j][i]).abs() > tolerances::COVARIANCE_SYMMETRY {
                    return Err(ScenarioError::NotSymmetric { i, j });
                }
            }
        }
        let spec = Self { matrix };
        cholesky_factor(&spec)?;
        Ok(spec)
    }

    pub fn dimension(&self) -> usize {
        self.matrix.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    /// `w . C . w`.
    pub fn quadratic_form(&self, w: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (row, &wi) in self.matrix.iter().zip(w.iter()) {
            let mut inner = 0.0;
            for (&c, &wj) in row.iter().zip(w.iter()) {
                inner += c * wj;
            }
            acc += wi * inner;
        }
        acc
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.matrix
            .iter()
            .flatten()
            .fold(0.0_f64, |m, &x| m.max(x.abs()))
    }
}

/// How to realize the scenario matrix.
#[derive(Debug, Clone)]
pub enum DistributionSpec {
    Gaussian {
        mean: Vec<f64>,
        covariance: CovarianceSpec,
    },
    /// Standard multivariate t: one chi-square mixing draw per scenario,
    /// scaled so the marginal standard deviation equals `sigma[i]`.
    StudentT {
        mean: Vec<f64>,
        sigma: Vec<f64>,
        correlation: CovarianceSpec,
        degrees_of_freedom: f64,
    },
    Empirical {
        path: PathBuf,
    },
}

impl DistributionSpec {
    /// Produces the J x N matrix. `Empirical` loads the file as-is and
    /// ignores `scenario_count` and `seed`.
    pub fn realize(&self, scenario_count: usize, seed: u64) -> Result<ScenarioMatrix, ScenarioError> {
        match self {
            Self::Gaussian { mean, covariance } => {
                simulate_gaussian(mean, covariance, scenario_count, seed)
            }
            Self::StudentT {
                mean,
                sigma,
                correlation,
                degrees_of_freedom,
            } => simulate_student_t(
                mean,
                sigma,
                correlation,
                *degrees_of_freedom,
                scenario_count,
                seed,
            ),
            Self::Empirical { path } => load_scenarios(path),
        }
    }
}

/// Lower-triangular L with `L . L^T = C`.
///
/// Pivots in [-1e-10, 0] are clamped to zero (tolerating matrices
/// transcribed at limited precision); anything lower is rejected.
pub fn cholesky_factor(spec: &CovarianceSpec) -> Result<Vec<Vec<f64>>, ScenarioError> {
    let n = spec.dimension();
    let c = spec.rows();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut d = c[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if d < -tolerances::PSD_PIVOT {
            return Err(ScenarioError::NotPositiveSemiDefinite { index: j, pivot: d });
        }
        let diag = d.max(0.0).sqrt();
        l[j][j] = diag;
        for i in (j + 1)..n {
            let mut s = c[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = if diag > 0.0 { s / diag } else { 0.0 };
        }
    }
    Ok(l)
}

/// Correlated Gaussian scenarios: each row is `mean + L z` with z
/// standard normal. Deterministic in `seed`.
pub fn simulate_gaussian(
    mean: &[f64],
    covariance: &CovarianceSpec,
    scenario_count: usize,
    seed: u64,
) -> Result<ScenarioMatrix, ScenarioError> {
    let n = covariance.dimension();
    if mean.len() != n {
        return Err(ScenarioError::DimensionMismatch {
            expected: n,
            got: mean.len(),
        });
    }
    if scenario_count < 2 {
        return Err(ScenarioError::TooFewScenarios(scenario_count));
    }
    let l = cholesky_factor(covariance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(scenario_count * n);
    let mut z = vec![0.0; n];
    for _ in 0..scenario_count {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        for i in 0..n {
            let mut x = mean[i];
            for k in 0..=i {
                x += l[i][k] * z[k];
            }
            data.push(x);
        }
    }
    Ok(ScenarioMatrix {
        data,
        scenario_count,
        asset_count: n,
    })
}

/// Standard multivariate Student-t scenarios.
///
/// Each row is `mu + D L z sqrt(nu / s)` with one chi-square draw `s`
/// per row, L the Cholesky factor of the correlation, and
/// `D = diag(sigma_i sqrt((nu - 2) / nu))`, so the marginal standard
/// deviation of coordinate i converges to `sigma[i]`. Note other
/// conventions set the scale parameter itself to sigma; this one does
/// not.
pub fn simulate_student_t(
    mean: &[f64],
    sigma: &[f64],
    correlation: &CovarianceSpec,
    degrees_of_freedom: f64,
    scenario_count: usize,
    seed: u64,
) -> Result<ScenarioMatrix, ScenarioError> {
    if !(degrees_of_freedom > 2.0) {
        return Err(ScenarioError::DegreesOfFreedomTooSmall(degrees_of_freedom));
    }
    let n = correlation.dimension();
    if mean.len() != n {
        return Err(ScenarioError::DimensionMismatch {
            expected: n,
            got: mean.len(),
        });
    }
    if sigma.len() != n {
        return Err(ScenarioError::DimensionMismatch {
            expected: n,
            got: sigma.len(),
        });
    }
    if let Some(index) = (0..n).find(|&i| (correlation.get(i, i) - 1.0).abs() > tolerances::CORRELATION_DIAGONAL)
    {
        return Err(ScenarioError::NotUnitDiagonal { index });
    }
    if scenario_count < 2 {
        return Err(ScenarioError::TooFewScenarios(scenario_count));
    }
    let l = cholesky_factor(correlation)?;
    let nu = degrees_of_freedom;
    let scale: Vec<f64> = sigma.iter().map(|s| s * ((nu - 2.0) / nu).sqrt()).collect();
    let chi2 = ChiSquared::new(nu).expect("nu > 2 checked above");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(scenario_count * n);
    let mut z = vec![0.0; n];
    for _ in 0..scenario_count {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        let s: f64 = chi2.sample(&mut rng);
        let mix = (nu / s).sqrt();
        for i in 0..n {
            let mut t = 0.0;
            for k in 0..=i {
                t += l[i][k] * z[k];
            }
            data.push(mean[i] + scale[i] * t * mix);
        }
    }
    Ok(ScenarioMatrix {
        data,
        scenario_count,
        asset_count: n,
    })
}

/// Reads a rectangular numeric CSV into a scenario matrix.
pub fn load_scenarios(path: &Path) -> Result<ScenarioMatrix, ScenarioError> {
    let rows = read_numeric_csv(path)?;
    ScenarioMatrix::from_rows(rows)
}

/// Writes the matrix back out at full precision; `load_scenarios` on the
/// result is bit-identical.
pub fn save_scenarios(path: &Path, scenarios: &ScenarioMatrix) -> Result<(), ScenarioError> {
    write_matrix_csv(path, scenarios.rows(), None)?;
    Ok(())
}

/// Strict rectangular numeric CSV parse shared by scenario and
/// covariance ingestion.
pub fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>, ScenarioError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut expected = None;
    for (r, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if let Some(expected) = expected {
            if cells.len() != expected {
                return Err(ScenarioError::RaggedRows {
                    row: r,
                    expected,
                    got: cells.len(),
                });
            }
        } else {
            expected = Some(cells.len());
        }
        let mut row = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| ScenarioError::NonNumericCell {
                row: r,
                col: c,
                content: cell.trim().to_string(),
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(ScenarioError::EmptyFile);
    }
    Ok(rows)
}

/// Population covariance of the scenario rows (divisor J, not J - 1), so
/// `w . C . w` equals the population variance of the projected returns
/// exactly and the consistency diagnostics compare like with like.
pub fn realized_covariance(scenarios: &ScenarioMatrix) -> CovarianceSpec {
    let n = scenarios.asset_count();
    let j = scenarios.scenario_count() as f64;
    let means = scenarios.column_means();
    let mut cov = vec![vec![0.0; n]; n];
    for row in scenarios.rows() {
        for a in 0..n {
            let da = row[a] - means[a];
            for b in a..n {
                cov[a][b] += da * (row[b] - means[b]);
            }
        }
    }
    for a in 0..n {
        for b in a..n {
            let v = cov[a][b] / j;
            cov[a][b] = v;
            cov[b][a] = v;
        }
    }
    CovarianceSpec::new(cov).expect("sample covariance is symmetric PSD up to rounding")
}

/// The max-abs elementwise gap between two covariance matrices.
pub fn covariance_discrepancy(
    input: &CovarianceSpec,
    realized: &CovarianceSpec,
) -> Result<f64, ScenarioError> {
    if input.dimension() != realized.dimension() {
        return Err(ScenarioError::DimensionMismatch {
            expected: input.dimension(),
            got: realized.dimension(),
        });
    }
    let mut delta = 0.0_f64;
    for (ri, rr) in input.rows().iter().zip(realized.rows().iter()) {
        for (a, b) in ri.iter().zip(rr.iter()) {
            delta = delta.max((b - a).abs());
        }
    }
    Ok(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ru_covariance_rows() -> Vec<Vec<f64>> {
        vec![
            vec![0.00324625, 0.00022983, 0.00420395],
            vec![0.00022983, 0.00049937, 0.00019247],
            vec![0.00420395, 0.00019247, 0.00764097],
        ]
    }

    #[test]
    fn cholesky_diagonal_case() {
        let spec = CovarianceSpec::new(vec![vec![4.0, 0.0], vec![0.0, 9.0]]).unwrap();
        let l = cholesky_factor(&spec).unwrap();
        assert_eq!(l, vec![vec![2.0, 0.0], vec![0.0, 3.0]]);
    }

    #[test]
    fn cholesky_identity() {
        let spec = CovarianceSpec::new(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let l = cholesky_factor(&spec).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(l[i][j], if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn cholesky_recomposes_ru_covariance() {
        let spec = CovarianceSpec::new(ru_covariance_rows()).unwrap();
        let l = cholesky_factor(&spec).unwrap();
        let n = spec.dimension();
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += l[i][k] * l[j][k];
                }
                assert_abs_diff_eq!(
                    acc,
                    spec.get(i, j),
                    epsilon = crate::tolerances::CHOLESKY_RECOMPOSITION
                );
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let err = CovarianceSpec::new(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap_err();
        assert!(matches!(err, ScenarioError::NotPositiveSemiDefinite { .. }));
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let err = CovarianceSpec::new(vec![vec![1.0, 0.5], vec![0.4, 1.0]]).unwrap_err();
        assert!(matches!(err, ScenarioError::NotSymmetric { i: 0, j: 1 }));
    }

    #[test]
    fn zero_covariance_rows_equal_mean() {
        let spec = CovarianceSpec::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let m = simulate_gaussian(&[0.3, -0.7], &spec, 5, 1).unwrap();
        for row in m.rows() {
            assert_eq!(row, &[0.3, -0.7]);
        }
    }

    #[test]
    fn gaussian_rejects_single_scenario() {
        let spec = CovarianceSpec::new(vec![vec![1.0]]).unwrap();
        let err = simulate_gaussian(&[0.0], &spec, 1, 0).unwrap_err();
        assert!(matches!(err, ScenarioError::TooFewScenarios(1)));
    }

    #[test]
    fn student_t_zero_sigma_rows_equal_mean() {
        let rho = CovarianceSpec::new(vec![vec![1.0, 0.2], vec![0.2, 1.0]]).unwrap();
        let m = simulate_student_t(&[1.0, 2.0], &[0.0, 0.0], &rho, 9.0, 4, 3).unwrap();
        for row in m.rows() {
            assert_eq!(row, &[1.0, 2.0]);
        }
    }

    #[test]
    fn student_t_requires_nu_above_two() {
        let rho = CovarianceSpec::new(vec![vec![1.0]]).unwrap();
        let err = simulate_student_t(&[0.0], &[1.0], &rho, 2.0, 10, 0).unwrap_err();
        assert!(matches!(err, ScenarioError::DegreesOfFreedomTooSmall(_)));
    }

    #[test]
    fn student_t_requires_unit_diagonal() {
        let rho = CovarianceSpec::new(vec![vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let err = simulate_student_t(&[0.0, 0.0], &[1.0, 1.0], &rho, 9.0, 10, 0).unwrap_err();
        assert!(matches!(err, ScenarioError::NotUnitDiagonal { index: 0 }));
    }

    #[test]
    fn realized_covariance_two_row_example() {
        let m = ScenarioMatrix::from_rows(vec![vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let c = realized_covariance(&m);
        assert_eq!(c.rows(), &[vec![1.0, 0.0], vec![0.0, 0.0]]);
    }

    #[test]
    fn realized_covariance_constant_rows_is_zero() {
        let m = ScenarioMatrix::from_rows(vec![vec![1.5, -2.0]; 10]).unwrap();
        let c = realized_covariance(&m);
        assert_eq!(c.max_abs_entry(), 0.0);
    }

    #[test]
    fn discrepancy_examples() {
        let a = CovarianceSpec::new(ru_covariance_rows()).unwrap();
        assert_eq!(covariance_discrepancy(&a, &a).unwrap(), 0.0);

        let b = CovarianceSpec::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let mut rows = b.rows().to_vec();
        rows[0][0] += 0.1;
        let c = CovarianceSpec::new(rows).unwrap();
        assert_abs_diff_eq!(covariance_discrepancy(&b, &c).unwrap(), 0.1, epsilon = 1e-15);

        let d = CovarianceSpec::new(vec![vec![1.01, -0.2], vec![-0.2, 1.0]]).unwrap();
        assert_abs_diff_eq!(covariance_discrepancy(&b, &d).unwrap(), 0.2, epsilon = 1e-15);
        assert!(covariance_discrepancy(&a, &b).is_err());
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();

        let good = dir.path().join("good.csv");
        std::fs::write(&good, "1,2\n3,4\n").unwrap();
        let m = load_scenarios(&good).unwrap();
        assert_eq!(m.row(0), &[1.0, 2.0]);
        assert_eq!(m.row(1), &[3.0, 4.0]);

        let ragged = dir.path().join("ragged.csv");
        std::fs::write(&ragged, "1,2,3\n4,5\n").unwrap();
        assert!(matches!(
            load_scenarios(&ragged).unwrap_err(),
            ScenarioError::RaggedRows { row: 1, expected: 3, got: 2 }
        ));

        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "1,2\n3,x\n").unwrap();
        assert!(matches!(
            load_scenarios(&bad).unwrap_err(),
            ScenarioError::NonNumericCell { row: 1, col: 1, .. }
        ));

        let empty = dir.path().join("empty.csv");
        std::fs::write(&empty, "").unwrap();
        assert!(matches!(
            load_scenarios(&empty).unwrap_err(),
            ScenarioError::EmptyFile
        ));

        let cov = CovarianceSpec::new(ru_covariance_rows()).unwrap();
        let sim = simulate_gaussian(&[0.0, 0.0, 0.0], &cov, 50, 9).unwrap();
        let path = dir.path().join("roundtrip.csv");
        save_scenarios(&path, &sim).unwrap();
        let back = load_scenarios(&path).unwrap();
        assert_eq!(back, sim);
    }

    #[test]
    fn simulation_is_deterministic() {
        let cov = CovarianceSpec::new(ru_covariance_rows()).unwrap();
        let a = simulate_gaussian(&[0.1, 0.2, 0.3], &cov, 100, 42).unwrap();
        let b = simulate_gaussian(&[0.1, 0.2, 0.3], &cov, 100, 42).unwrap();
        assert_eq!(a, b);

        let rho = CovarianceSpec::new(vec![
            vec![1.0, 0.4, 0.3],
            vec![0.4, 1.0, 0.4],
            vec![0.3, 0.4, 1.0],
        ])
        .unwrap();
        let c = simulate_student_t(&[0.0; 3], &[1.0; 3], &rho, 9.0, 100, 42).unwrap();
        let d = simulate_student_t(&[0.0; 3], &[1.0; 3], &rho, 9.0, 100, 42).unwrap();
        assert_eq!(c, d);
    }
}
