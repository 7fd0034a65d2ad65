//! `dqml` command-line front end.

mod commands;
mod data;
mod diagnose;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use dqml::QmlError;

/// Exit codes: 0 success, 2 usage/parse/IO, 3 infeasible problem,
/// 4 diagnostic failure, 5 numerical failure.
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_DIAGNOSTIC: u8 = 4;
pub const EXIT_NUMERICAL: u8 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "dqml",
    version,
    about = "Quadratic matrix learning: train, evaluate and diagnose"
)]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "DQML_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic Gaussian dataset as CSV plus a `.meta` sidecar.
    Synth(SynthArgs),
    /// Train one quadratic matrix per class and write a model file.
    Train(TrainArgs),
    /// Evaluate a model on a dataset, or run the repeated-split protocol.
    Eval(EvalArgs),
    /// Write the quadratic-form features of every sample as CSV.
    Features(FeaturesArgs),
    /// Predict a label for every sample.
    Classify(ClassifyArgs),
    /// Check gradients, duality gap, KKT conditions and oracle agreement.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub classes: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub dim: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub per_class: u64,
    /// Distance of each class mean from the origin.
    #[arg(long, default_value_t = 5.0)]
    pub sep: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

/// Where samples come from: a CSV file (`label,v1,...`) or a directory of
/// per-class image folders.
#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// The CSV file starts with a header row.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
    /// Tolerance on the projected-gradient infinity norm.
    #[arg(long, default_value_t = 1e-7)]
    pub grad_tol: f64,
    /// Quasi-Newton history length.
    #[arg(long, default_value_t = 10)]
    pub memory: usize,
}

impl SolverArgs {
    pub fn config(&self) -> anyhow::Result<dqml::SolverConfig> {
        let cfg = dqml::SolverConfig {
            max_iterations: self.max_iterations,
            grad_tol: self.grad_tol,
            memory: self.memory,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct LambdaArgs {
    /// Fixed regularization weight.
    #[arg(long, value_parser = positive_f64)]
    pub lambda: Option<f64>,
    /// Comma-separated λ values chosen by stratified cross-validation.
    #[arg(long, value_parser = parse_grid)]
    pub cv_grid: Option<Grid>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub lambda: LambdaArgs,
    #[arg(long, default_value_t = 10, value_parser = parse_folds)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Max,
    NnCosine,
    Both,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Trained model to evaluate (ignored with --protocol).
    #[arg(long, required_unless_present = "protocol")]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = RuleArg::Both)]
    pub rule: RuleArg,
    /// Retrain on fresh random splits and report mean ± std error.
    #[arg(long)]
    pub protocol: bool,
    /// Training samples per class in each split.
    #[arg(long, required_if_eq("protocol", "true"))]
    pub m_train: Option<usize>,
    #[arg(long, default_value_t = 30)]
    pub reps: usize,
    /// Fixed λ for every repetition instead of cross-validation.
    #[arg(long, value_parser = positive_f64, conflicts_with = "cv_grid")]
    pub lambda: Option<f64>,
    #[arg(long, value_parser = parse_grid, default_value = "0.1,0.3,1,3,10")]
    pub cv_grid: Grid,
    #[arg(long, default_value_t = 10, value_parser = parse_folds)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Machine-readable JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Output CSV (`label,f1,...,fC`); standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = RuleArg::NnCosine)]
    pub rule: RuleArg,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Number of random problems to check.
    #[arg(long, conflicts_with = "data")]
    pub random_instances: Option<usize>,
    /// Dimension of the random problems.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    pub dim: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Check every class problem of this dataset instead.
    #[arg(long, required_unless_present = "random_instances")]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub header: bool,
    /// λ for the problems (random instances cycle through 0.1, 1, 10 when absent).
    #[arg(long, value_parser = positive_f64)]
    pub lambda: Option<f64>,
    /// Compare against the exhaustive grid oracle (dimension 2 only).
    #[arg(long)]
    pub grid_oracle: bool,
    #[arg(long, default_value_t = 0.01, value_parser = positive_f64)]
    pub step: f64,
    /// Compare against the penalty-method oracle.
    #[arg(long)]
    pub penalty_oracle: bool,
    /// Corrupt the analytic gradient (negative control for the harness).
    #[arg(long, hide = true)]
    pub perturb_grad: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

fn positive_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s} must be positive"))
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let values = s
        .split(',')
        .map(positive_f64)
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("grid is empty".into());
    }
    Ok(Grid(values))
}

fn parse_folds(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(k) if k >= 2 => Ok(k),
        _ => Err(format!("{s}: need an integer of at least 2")),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<QmlError>()) {
        Some(e) if e.is_infeasible() => EXIT_INFEASIBLE,
        Some(e) if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Synth(a) => commands::synth(&a),
        Command::Train(a) => commands::train(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Features(a) => commands::features(&a),
        Command::Classify(a) => commands::classify(&a),
        Command::Diagnose(a) => diagnose::run(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .context("cannot start worker threads")
        .and_then(|pool| pool.install(|| run(cli.command)));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
