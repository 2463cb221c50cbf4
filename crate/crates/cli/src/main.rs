//! `mcpope`: sample random portfolios, simulate scenario matrices,
//! search for risk-optimal weights, run consistency diagnostics, and
//! replay the published benchmarks.
//!
//! Exit codes: 0 success (all comparison rows pass), 1 a reproduce
//! tolerance failed, 2 bad input or I/O.

mod config;
mod reproduce;

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mcpope::io::{format_full_precision, write_matrix, write_matrix_csv};
use mcpope::optimizer::{
    run_workers, stability_diagnostics, ObjectiveSource, OptimizationProblem, StabilityReport,
};
use mcpope::risk::RiskSpec;
use mcpope::scenario::{load_scenarios, read_numeric_csv, save_scenarios, CovarianceSpec, ScenarioMatrix};
use mcpope::simplex::{
    apply_ev_bias, sample_exponential, sample_gap, sample_hypercube, sample_order_statistics,
    sample_uniform_ratio, ConstraintSet, PortfolioWeights, SamplerConfig,
};

#[derive(Parser)]
#[command(name = "mcpope", version, about = "Monte Carlo portfolio optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw random long-only fully-invested portfolios as CSV.
    Sample(SampleArgs),
    /// Simulate a scenario matrix from a distribution config.
    Simulate(SimulateArgs),
    /// Search for the risk-minimizing portfolio.
    Optimize(OptimizeArgs),
    /// Run the five-way consistency diagnostics for a quadratic problem.
    Diagnose(DiagnoseArgs),
    /// Replay a published benchmark and emit a comparison table.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SampleMethod {
    /// Uniform ratios U_i / sum U_j (center-biased).
    Ratio,
    /// Sorted-gap even sampler.
    Gap,
    /// Sequential order-statistics even sampler.
    Order,
    /// Exponential-ratio even sampler.
    Exp,
    /// Edge-vertex biased family: emits (bias_depth + 1) rows per base draw.
    Ev,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    method: SampleMethod,
    /// Number of assets.
    #[arg(short = 'n', long = "assets")]
    assets: usize,
    /// Number of base draws.
    #[arg(short = 'k', long = "count")]
    count: usize,
    #[arg(long, default_value_t = 5)]
    bias_depth: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Prepend a header row of asset labels.
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Distribution config document.
    #[arg(long)]
    distribution: PathBuf,
    /// Number of scenarios J.
    #[arg(long, default_value_t = 10_000)]
    scenarios_count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Scenario matrix CSV (alternative to --distribution).
    #[arg(long)]
    scenarios: Option<PathBuf>,
    /// Distribution config to simulate scenarios from.
    #[arg(long)]
    distribution: Option<PathBuf>,
    /// Scenario count when simulating via --distribution.
    #[arg(long, default_value_t = 10_000)]
    scenarios_count: usize,
    /// Risk spec: mv:<l>, variance, var:<u>, cvar:<u>, sharpe:<b>,
    /// omega:<b>, phi:<b>,<p>,<q>.
    #[arg(long)]
    risk: Option<String>,
    /// Constraint config document.
    #[arg(long)]
    constraints: Option<PathBuf>,
    /// Run config document with defaults; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Base portfolio draws per worker.
    #[arg(long)]
    base_samples: Option<usize>,
    /// Edge-vertex bias depth P (powers 2^0 .. 2^P).
    #[arg(long)]
    bias_depth: Option<u32>,
    /// Drop the equal-weight baseline candidate.
    #[arg(long)]
    no_baseline: bool,
    /// Merge an equally sized even-sampler pool into the candidate set.
    #[arg(long)]
    even_pool: bool,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Input covariance CSV.
    #[arg(long)]
    covariance: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Expected returns as a comma list (enables the return term).
    #[arg(long)]
    expected_returns: Option<String>,
    #[arg(long)]
    scenarios: Option<PathBuf>,
    #[arg(long)]
    distribution: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    scenarios_count: usize,
    #[arg(long)]
    constraints: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    base_samples: usize,
    #[arg(long, default_value_t = 5)]
    bias_depth: u32,
    /// Output JSON path (stdout table always printed).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(value_enum)]
    case: reproduce::ReproduceCase,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    base_samples: Option<usize>,
    #[arg(long)]
    bias_depth: Option<u32>,
    /// Restrict ru-cvar to one tail level (0.1, 0.05 or 0.01).
    #[arg(long)]
    quantile: Option<f64>,
    /// Override the scenario count.
    #[arg(long)]
    scenarios_count: Option<usize>,
    /// Comparison table CSV path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Sample(args) => sample(args).map(|()| 0),
        Command::Simulate(args) => simulate(args).map(|()| 0),
        Command::Optimize(args) => optimize(args).map(|()| 0),
        Command::Diagnose(args) => diagnose(args).map(|()| 0),
        Command::Reproduce(args) => reproduce_cmd(args),
    }
}

fn sample(args: SampleArgs) -> Result<()> {
    let config = SamplerConfig::new(args.assets, args.count, args.bias_depth, args.seed)?;
    let batch: Vec<PortfolioWeights> = match args.method {
        SampleMethod::Ratio => sample_uniform_ratio(&config)?,
        SampleMethod::Gap => sample_gap(&config)?,
        SampleMethod::Order => sample_order_statistics(&config)?,
        SampleMethod::Exp => sample_exponential(&config)?,
        SampleMethod::Ev => {
            let base = sample_hypercube(&config)?;
            apply_ev_bias(&base, config.bias_depth)?
                .into_iter()
                .flatten()
                .collect()
        }
    };
    let header: Option<Vec<String>> = args
        .header
        .then(|| (1..=args.assets).map(|i| format!("asset_{i}")).collect());
    let rows = batch.iter().map(|w| w.as_slice());
    match &args.output {
        Some(path) => write_matrix_csv(path, rows, header.as_deref())?,
        None => {
            let stdout = std::io::stdout();
            write_matrix(&mut stdout.lock(), rows, header.as_deref())?;
        }
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let spec = config::load_distribution(&args.distribution)?;
    let scenarios = spec.realize(args.scenarios_count, args.seed)?;
    save_scenarios(&args.output, &scenarios)?;
    eprintln!(
        "wrote {} x {} scenario matrix to {}",
        scenarios.scenario_count(),
        scenarios.asset_count(),
        args.output.display()
    );
    Ok(())
}

fn load_scenarios_arg(
    scenarios: &Option<PathBuf>,
    distribution: &Option<PathBuf>,
    scenario_count: usize,
    seed: u64,
) -> Result<ScenarioMatrix> {
    match (scenarios, distribution) {
        (Some(path), None) => Ok(load_scenarios(path)?),
        (None, Some(cfg)) => Ok(config::load_distribution(cfg)?.realize(scenario_count, seed)?),
        (Some(_), Some(_)) => bail!("give either --scenarios or --distribution, not both"),
        (None, None) => bail!("one of --scenarios or --distribution is required"),
    }
}

fn optimize(args: OptimizeArgs) -> Result<()> {
    let defaults = match &args.config {
        Some(path) => config::load_run_defaults(path)?,
        None => config::RunDefaults::default(),
    };
    let seed = args.seed.or(defaults.seed).unwrap_or(0);
    let workers = args.workers.or(defaults.workers).unwrap_or(1);
    let base_samples = args.base_samples.or(defaults.base_samples).unwrap_or(10_000);
    let bias_depth = args.bias_depth.or(defaults.bias_depth).unwrap_or(5);
    let risk_text = args
        .risk
        .clone()
        .or(defaults.risk)
        .context("--risk is required (none given on the command line or in --config)")?;
    let spec: RiskSpec = risk_text.parse()?;
    let scenarios_path = args.scenarios.clone().or(defaults.scenarios);
    let scenarios = load_scenarios_arg(
        &scenarios_path,
        &args.distribution,
        args.scenarios_count,
        seed,
    )?;
    let constraints = match &args.constraints {
        Some(path) => config::load_constraints(path)?,
        None => ConstraintSet::none(),
    };
    let sampler = SamplerConfig::new(scenarios.asset_count(), base_samples, bias_depth, seed)?;
    let problem = OptimizationProblem::new(
        ObjectiveSource::Distributional { scenarios, spec },
        constraints,
        sampler,
    )?
    .with_baseline(!args.no_baseline)
    .with_even_pool(args.even_pool);
    let result = run_workers(&problem, workers, seed)?;
    let json = serde_json::to_string_pretty(&result)?;
    match args.output.or(defaults.output) {
        Some(path) => {
            std::fs::write(&path, json + "\n")?;
            eprintln!("wrote result to {}", path.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn diagnose(args: DiagnoseArgs) -> Result<()> {
    let covariance = CovarianceSpec::new(read_numeric_csv(&args.covariance)?)?;
    let expected_returns = args
        .expected_returns
        .as_deref()
        .map(|text| -> Result<Vec<f64>> {
            text.split(',')
                .map(|c| c.trim().parse::<f64>().context("non-numeric expected return"))
                .collect()
        })
        .transpose()?;
    let scenarios = load_scenarios_arg(
        &args.scenarios,
        &args.distribution,
        args.scenarios_count,
        args.seed,
    )?;
    let constraints = match &args.constraints {
        Some(path) => config::load_constraints(path)?,
        None => ConstraintSet::none(),
    };
    let sampler = SamplerConfig::new(
        scenarios.asset_count(),
        args.base_samples,
        args.bias_depth,
        args.seed,
    )?;
    let report = stability_diagnostics(
        &covariance,
        args.lambda,
        expected_returns.as_deref(),
        &scenarios,
        &sampler,
        &constraints,
    )?;
    print_report(&report);
    if let Some(path) = &args.output {
        std::fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
        eprintln!("wrote report to {}", path.display());
    }
    Ok(())
}

fn print_report(report: &StabilityReport) {
    println!("computation            objective      weights");
    for c in &report.computations {
        let weights: Vec<String> = c
            .weights
            .as_slice()
            .iter()
            .map(|w| format!("{w:.6}"))
            .collect();
        println!("{:<22} {:<14.8} [{}]", format!("{:?}", c.kind), c.objective, weights.join(", "));
    }
    println!("pairwise max-abs weight gaps:");
    for (a, b, gap) in &report.pairwise_weight_gaps {
        println!("  {:?} vs {:?}: {gap:.6}", a, b);
    }
    println!("covariance discrepancy: {}", report.covariance_discrepancy);
    if report.degenerate_scenarios {
        println!("warning: degenerate scenarios (realized covariance is zero)");
    }
}

fn reproduce_cmd(args: ReproduceArgs) -> Result<i32> {
    let opts = reproduce::CaseOptions {
        seed: args.seed,
        workers: args.workers,
        base_samples: args.base_samples,
        bias_depth: args.bias_depth,
        quantile: args.quantile,
        scenario_count: args.scenarios_count,
    };
    let rows = reproduce::run_case(args.case, &opts)?;
    if rows.is_empty() {
        bail!("no comparison rows produced; check --quantile");
    }
    let all_pass = match &args.output {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            let ok = reproduce::write_rows(&mut file, &rows)?;
            file.flush()?;
            eprintln!("wrote comparison table to {}", path.display());
            ok
        }
        None => {
            let stdout = std::io::stdout();
            reproduce::write_rows(&mut stdout.lock(), &rows)?
        }
    };
    // Keep the on-screen summary short but decisive.
    let failed: Vec<&reproduce::ComparisonRow> = rows.iter().filter(|r| !r.pass()).collect();
    if all_pass {
        eprintln!("all {} rows pass", rows.len());
        Ok(0)
    } else {
        for row in &failed {
            eprintln!(
                "FAIL {}: |{} - {}| = {} > {}",
                row.quantity,
                format_full_precision(row.computed_value),
                row.paper_value,
                row.abs_diff(),
                row.tolerance
            );
        }
        eprintln!("{} of {} rows failed", failed.len(), rows.len());
        Ok(1)
    }
}
