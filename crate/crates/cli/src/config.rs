//! Flat `key = value` configuration documents. Matrices are referenced
//! by CSV path, resolved relative to the document's directory. Lines
//! starting with `#` are comments; a key may repeat where noted
//! (`inequality`).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mcpope::scenario::{read_numeric_csv, CovarianceSpec, DistributionSpec};
use mcpope::simplex::{ConstraintSet, LinearInequality};

pub fn parse_kv(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!(
                "{}:{}: expected `key = value`, got {line:?}",
                path.display(),
                lineno + 1
            );
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn single<'a>(pairs: &'a [(String, String)], key: &str, path: &Path) -> Result<Option<&'a str>> {
    let mut found = None;
    for (k, v) in pairs {
        if k == key {
            if found.is_some() {
                bail!("{}: key {key:?} given more than once", path.display());
            }
            found = Some(v.as_str());
        }
    }
    Ok(found)
}

fn required<'a>(pairs: &'a [(String, String)], key: &str, path: &Path) -> Result<&'a str> {
    single(pairs, key, path)?
        .with_context(|| format!("{}: missing required key {key:?}", path.display()))
}

fn parse_vector(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|cell| {
            cell.trim()
                .parse::<f64>()
                .with_context(|| format!("{what}: non-numeric entry {:?}", cell.trim()))
        })
        .collect()
}

fn resolve(base: &Path, relative: &str) -> PathBuf {
    let p = Path::new(relative);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or_else(|| Path::new(".")).join(p)
    }
}

fn load_square_csv(path: &Path) -> Result<CovarianceSpec> {
    let rows = read_numeric_csv(path)
        .with_context(|| format!("cannot read matrix {}", path.display()))?;
    CovarianceSpec::new(rows).with_context(|| format!("invalid matrix {}", path.display()))
}

/// Distribution document:
///
/// ```text
/// kind = gaussian | student_t | empirical
/// mean = 0.01, 0.004, 0.014          # gaussian, student_t
/// covariance_csv = cov.csv           # gaussian
/// sigma = 2.33, 2.04, 1.81           # student_t
/// correlation_csv = rho.csv          # student_t
/// nu = 9                             # student_t
/// path = returns.csv                 # empirical
/// ```
pub fn load_distribution(path: &Path) -> Result<DistributionSpec> {
    let pairs = parse_kv(path)?;
    let kind = required(&pairs, "kind", path)?;
    match kind {
        "gaussian" => {
            let mean = parse_vector(required(&pairs, "mean", path)?, "mean")?;
            let covariance =
                load_square_csv(&resolve(path, required(&pairs, "covariance_csv", path)?))?;
            Ok(DistributionSpec::Gaussian { mean, covariance })
        }
        "student_t" => {
            let mean = parse_vector(required(&pairs, "mean", path)?, "mean")?;
            let sigma = parse_vector(required(&pairs, "sigma", path)?, "sigma")?;
            let correlation =
                load_square_csv(&resolve(path, required(&pairs, "correlation_csv", path)?))?;
            let nu: f64 = required(&pairs, "nu", path)?
                .parse()
                .context("nu must be a number")?;
            Ok(DistributionSpec::StudentT {
                mean,
                sigma,
                correlation,
                degrees_of_freedom: nu,
            })
        }
        "empirical" => Ok(DistributionSpec::Empirical {
            path: resolve(path, required(&pairs, "path", path)?),
        }),
        other => bail!("{}: unknown distribution kind {other:?}", path.display()),
    }
}

/// Constraint document:
///
/// ```text
/// lower_bounds = 0, 0, 0
/// upper_bounds = 1, 1, 0.5
/// inequality = 1, 0, 0 >= 0.3333     # a . w >= c, repeatable
/// ```
pub fn load_constraints(path: &Path) -> Result<ConstraintSet> {
    let pairs = parse_kv(path)?;
    let mut constraints = ConstraintSet::none();
    for (key, value) in &pairs {
        match key.as_str() {
            "lower_bounds" => constraints.lower_bounds = Some(parse_vector(value, "lower_bounds")?),
            "upper_bounds" => constraints.upper_bounds = Some(parse_vector(value, "upper_bounds")?),
            "inequality" => {
                let Some((lhs, rhs)) = value.split_once(">=") else {
                    bail!("{}: inequality must look like `a1, a2 >= c`", path.display());
                };
                constraints.linear_inequalities.push(LinearInequality {
                    coefficients: parse_vector(lhs, "inequality coefficients")?,
                    bound: rhs.trim().parse().context("inequality bound must be a number")?,
                });
            }
            other => bail!("{}: unknown constraint key {other:?}", path.display()),
        }
    }
    Ok(constraints)
}

/// Optional run-level defaults for `optimize`; explicit flags override
/// every value set here.
#[derive(Debug, Default)]
pub struct RunDefaults {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub base_samples: Option<usize>,
    pub bias_depth: Option<u32>,
    pub risk: Option<String>,
    pub scenarios: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

pub fn load_run_defaults(path: &Path) -> Result<RunDefaults> {
    let pairs = parse_kv(path)?;
    let mut defaults = RunDefaults::default();
    for (key, value) in &pairs {
        match key.as_str() {
            "seed" => defaults.seed = Some(value.parse().context("seed must be a u64")?),
            "workers" => defaults.workers = Some(value.parse().context("workers must be a count")?),
            "base_samples" => {
                defaults.base_samples = Some(value.parse().context("base_samples must be a count")?)
            }
            "bias_depth" => {
                defaults.bias_depth = Some(value.parse().context("bias_depth must be a count")?)
            }
            "risk" => defaults.risk = Some(value.clone()),
            "scenarios" => defaults.scenarios = Some(resolve(path, value)),
            "output" => defaults.output = Some(resolve(path, value)),
            other => bail!("{}: unknown run key {other:?}", path.display()),
        }
    }
    Ok(defaults)
}
