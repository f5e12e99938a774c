//! `casefit` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | a validation check failed |
//! | 2 | malformed configuration or data |
//! | 3 | the fit did not converge (report still written) |
//! | 4 | rank failure |
//! | 5 | more than 1% of simulation replicates excluded (report still written) |

mod config;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use casefit::io::{read_dataset, to_canonical_json, write_dataset, write_matrix_csv, write_table_csv};
use casefit::sampling::{ecdf_pairs, MAX_EXCLUDED_FRACTION};
use casefit::validate::{list_checks, run_suite, Sabotage, DEFAULT_SEED};
use casefit::{
    chi2_cdf, curvature_diagnostic, f_cdf, fit_linear, fit_nonlinear, flaw_bound, monte_carlo_study, parameter_region,
    sample_outcome, tangent_frame, ConfidenceRegion, Error, Estimate, FitOptions, MonteCarloReport, ModelFunction, Parameter,
    RandomVariableModel, Registry, TangentFrame,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::{pick, FileConfig};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_RANK: u8 = 4;
const EXIT_EXCLUDED: u8 = 5;

#[derive(Parser, Debug)]
#[command(name = "casefit", version, about = "Least-squares fitting with flaw/residual inference")]
struct Cli {
    /// TOML file with default values for any flag (flags take precedence).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a registry model to a case table and report inference.
    Fit(FitArgs),
    /// Monte Carlo study of the flaw/residual decomposition.
    Simulate(SimulateArgs),
    /// Run the built-in invariant suite.
    Validate(ValidateArgs),
    /// List registry models.
    Models,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    model: Option<String>,
    /// CSV with a header row, predictor columns and an `x_obs` column.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Comma-separated starting point for nonlinear models.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    theta0: Option<Vec<f64>>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Iteration cap for nonlinear fits (default 100).
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory receiving jacobian.csv, tangent_basis.csv, complement_basis.csv.
    #[arg(long)]
    dump_matrices: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    model: Option<String>,
    /// Optional CSV supplying the design; an `x_obs` column is ignored.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    theta_star: Option<Vec<f64>>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory receiving empirical vs theoretical CDF tables.
    #[arg(long)]
    emit_plot_data: Option<PathBuf>,
    /// Write replicate 0 as a case table that `fit` can read.
    #[arg(long)]
    emit_data: Option<PathBuf>,
    /// Keep the per-replicate records in the JSON report.
    #[arg(long)]
    dump_replicates: bool,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Print the check inventory and exit.
    #[arg(long)]
    list: bool,
    /// Fault injection for demonstrating the suite: `none` or `jacobian`.
    #[arg(long, default_value = "none")]
    sabotage: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_BAD_INPUT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Rank(_) => EXIT_RANK,
            Error::Numerical(_) | Error::Domain(_) | Error::Eval(_) => EXIT_NOT_CONVERGED,
            _ => EXIT_BAD_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = FileConfig::load(cli.config.as_deref()).and_then(|file| match cli.command {
        Command::Fit(args) => run_fit(args, &file),
        Command::Simulate(args) => run_simulate(args, &file),
        Command::Validate(args) => run_validate(args, &file),
        Command::Models => run_models(),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn alpha_of(flag: Option<f64>, file: &FileConfig) -> Result<f64, Failure> {
    let alpha = pick(flag, file.alpha).unwrap_or(0.05);
    if alpha > 0.0 && alpha < 1.0 {
        Ok(alpha)
    } else {
        Err(Failure::input(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(|e| Failure::input(format!("cannot open {}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure { code: EXIT_BAD_INPUT, message: format!("cannot write {}: {e}", path.display()) })
}

fn emit(json: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(json.as_bytes())
                .and_then(|_| w.flush())
                .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::input(format!("cannot create {}: {e}", dir.display())))
}

#[derive(Serialize)]
struct FitReport<'a> {
    model: &'a str,
    n: usize,
    q: usize,
    alpha: f64,
    estimate: &'a Estimate,
    frame: &'a TangentFrame,
    region: Option<ConfidenceRegion>,
    marginal_intervals: Option<Vec<[f64; 2]>>,
    flaw_bound: Option<f64>,
    curvature: f64,
}

fn run_fit(args: FitArgs, file: &FileConfig) -> Outcome {
    let name = pick(args.model, file.model.clone()).ok_or_else(|| Failure::input("fit needs --model"))?;
    let data_path = pick(args.data, file.data.clone()).ok_or_else(|| Failure::input("fit needs --data"))?;
    let alpha = alpha_of(args.alpha, file)?;
    let out = pick(args.out, file.out.clone());
    let dump = pick(args.dump_matrices, file.dump_matrices.clone());

    let data = read_dataset(open(&data_path)?).map_err(|e| Failure::input(format!("{}: {e}", data_path.display())))?;
    let x_obs = data
        .x_obs
        .ok_or_else(|| Failure::input(format!("{}: missing required column `x_obs`", data_path.display())))?;
    let model = Registry::builtin().build(&name, data.design).map_err(|e| Failure::input(e.to_string()))?;

    let mut opts = FitOptions::default();
    if let Some(cap) = pick(args.max_iterations, file.max_iterations) {
        opts.max_iterations = cap;
    }
    opts.validate().map_err(|e| Failure::input(e.to_string()))?;
    let estimate = fit_model(&model, &x_obs, pick(args.theta0, file.theta0.clone()), &opts)?;
    let frame = tangent_frame(&model, &estimate.theta_hat)?;
    let (n, q) = (model.n(), model.q());

    let (region, flaw) = if n > q && estimate.converged {
        (Some(parameter_region(&frame, &estimate, alpha)?), Some(flaw_bound(estimate.sse, q, n, alpha)?))
    } else {
        (None, None)
    };
    let marginal_intervals = match &region {
        Some(r) => Some(r.marginal_intervals()?.into_iter().map(|(lo, hi)| [lo, hi]).collect()),
        None => None,
    };
    let curvature = curvature_diagnostic(&model, &frame)?;

    if let Some(dir) = dump {
        ensure_dir(&dir)?;
        for (file_name, m) in [
            ("jacobian.csv", &frame.jacobian),
            ("tangent_basis.csv", &frame.tangent_onb),
            ("complement_basis.csv", &frame.complement_onb),
        ] {
            write_matrix_csv(create(&dir.join(file_name))?, m)?;
        }
    }

    let report = FitReport {
        model: model.name(),
        n,
        q,
        alpha,
        estimate: &estimate,
        frame: &frame,
        region,
        marginal_intervals,
        flaw_bound: flaw,
        curvature,
    };
    emit(&to_canonical_json(&report)?, out.as_deref())?;
    if estimate.converged {
        Ok(0)
    } else {
        eprintln!("warning: fit did not converge ({:?})", estimate.termination);
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn fit_model(model: &ModelFunction, x_obs: &nalgebra::DVector<f64>, theta0: Option<Vec<f64>>, opts: &FitOptions) -> Result<Estimate, Failure> {
    if x_obs.len() != model.n() {
        return Err(Failure::input(format!("{} observations for {} cases", x_obs.len(), model.n())));
    }
    if model.is_linear() {
        return Ok(fit_linear(model.design().matrix(), x_obs)?);
    }
    let start = match theta0 {
        Some(v) if v.len() != model.q() => {
            return Err(Failure::input(format!("--theta0 has {} entries, model `{}` has {} parameters", v.len(), model.name(), model.q())))
        }
        Some(v) => Parameter::from_slice(&v).map_err(|e| Failure::input(e.to_string()))?,
        None => Parameter::new(model.bounds().midpoint()).map_err(|e| Failure::input(e.to_string()))?,
    };
    Ok(fit_nonlinear(model, x_obs, &start, opts)?)
}

fn run_simulate(args: SimulateArgs, file: &FileConfig) -> Outcome {
    let name = pick(args.model, file.model.clone()).ok_or_else(|| Failure::input("simulate needs --model"))?;
    let theta_star = pick(args.theta_star, file.theta_star.clone()).ok_or_else(|| Failure::input("simulate needs --theta-star"))?;
    let sigma = pick(args.sigma, file.sigma).ok_or_else(|| Failure::input("simulate needs --sigma"))?;
    let replicates = pick(args.replicates, file.replicates).ok_or_else(|| Failure::input("simulate needs --replicates"))?;
    let seed = pick(args.seed, file.seed).unwrap_or(DEFAULT_SEED);
    let alpha = alpha_of(args.alpha, file)?;
    let out = pick(args.out, file.out.clone());
    let plot_dir = pick(args.emit_plot_data, file.emit_plot_data.clone());
    let data_out = pick(args.emit_data, file.emit_data.clone());

    let registry = Registry::builtin();
    let model = match pick(args.data, file.data.clone()) {
        Some(path) => {
            let data = read_dataset(open(&path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            registry.build(&name, data.design)
        }
        None => registry.build_default(&name),
    }
    .map_err(|e| Failure::input(e.to_string()))?;
    let theta_star = Parameter::from_slice(&theta_star).map_err(|e| Failure::input(e.to_string()))?;
    let rv = RandomVariableModel::new(model, theta_star, sigma, seed).map_err(|e| Failure::input(e.to_string()))?;
    let mut report = monte_carlo_study(&rv, replicates, alpha, &FitOptions::default()).map_err(|e| Failure::input(e.to_string()))?;

    if let Some(path) = data_out {
        write_dataset(create(&path)?, rv.model.design(), &sample_outcome(&rv, 0))?;
    }
    if let Some(dir) = plot_dir {
        write_plot_data(&report, &dir)?;
    }
    if !args.dump_replicates {
        report.per_replicate.clear();
    }
    emit(&to_canonical_json(&report)?, out.as_deref())?;

    let fraction = report.excluded as f64 / report.replicates as f64;
    if fraction > MAX_EXCLUDED_FRACTION {
        eprintln!("error: {} of {} replicates excluded", report.excluded, report.replicates);
        return Ok(EXIT_EXCLUDED);
    }
    Ok(0)
}

fn write_plot_data(report: &MonteCarloReport, dir: &Path) -> Result<(), Failure> {
    ensure_dir(dir)?;
    let (n, q) = (report.n as u32, report.q as u32);
    let (err, flaw, res) = report.scaled_norms();
    let f_stats: Vec<f64> = report.included().filter_map(|r| r.f_stat).collect();
    let header = ["x", "empirical_cdf", "theoretical_cdf"];
    let tables: [(&str, &[f64], Box<dyn Fn(f64) -> f64>); 4] = [
        ("error_norm2.csv", &err, Box::new(move |x| chi2_cdf(n, x).unwrap_or(f64::NAN))),
        ("flaw_norm2.csv", &flaw, Box::new(move |x| chi2_cdf(q, x).unwrap_or(f64::NAN))),
        ("residual_norm2.csv", &res, Box::new(move |x| chi2_cdf(n - q, x).unwrap_or(f64::NAN))),
        ("f_stat.csv", &f_stats, Box::new(move |x| f_cdf(q, n - q, x).unwrap_or(f64::NAN))),
    ];
    for (file_name, samples, cdf) in tables {
        let rows: Vec<Vec<f64>> = ecdf_pairs(samples, cdf).into_iter().map(|r| r.to_vec()).collect();
        write_table_csv(create(&dir.join(file_name))?, &header, &rows)?;
    }
    Ok(())
}

fn run_validate(args: ValidateArgs, file: &FileConfig) -> Outcome {
    if args.list {
        for (name, description) in list_checks() {
            println!("{name}\t{description}");
        }
        return Ok(0);
    }
    let sabotage: Sabotage = args.sabotage.parse().map_err(|e: Error| Failure::input(e.to_string()))?;
    let seed = pick(args.seed, file.seed).unwrap_or(DEFAULT_SEED);
    let report = run_suite(seed, sabotage);
    emit(&to_canonical_json(&report)?, pick(args.out, file.out.clone()).as_deref())?;
    for c in report.failures() {
        eprintln!("FAILED {}: {}", c.name, c.detail);
    }
    Ok(if report.passed { 0 } else { EXIT_CHECK_FAILED })
}

fn run_models() -> Outcome {
    let registry = Registry::builtin();
    for name in registry.names() {
        let design = registry.default_design(name)?;
        println!("{name}\t{}\t(default design {} x {})", registry.describe(name)?, design.n(), design.m());
    }
    Ok(0)
}
