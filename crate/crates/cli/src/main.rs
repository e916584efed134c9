//! `plaplab`: thresholds, radial solves, inequality checks and existence sweeps
//! for `Δ_p u + a u^σ = 0`.
//!
//! Exit codes: 0 success or check passed, 1 check failed or sweep found
//! contradictions, 2 invalid input, 3 numerical or I/O failure.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;

#[derive(Parser)]
#[command(
    name = "plaplab",
    version,
    about = "Radial experiments for Δ_p u + a u^σ = 0"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print threshold constants and, with `--a` and `--sigma`, the regime flags.
    Thresholds(ThresholdArgs),
    /// Shoot the radial solution from `u(0) = u0` and write it to a file.
    Solve(SolveArgs),
    /// Run one inequality check on a solution file.
    Check(CheckArgs),
    /// Classify a (p, σ) grid and compare with the predicted nonexistence region.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct EquationArgs {
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<f64>,
}

#[derive(Args)]
struct ThresholdArgs {
    #[command(flatten)]
    eq: EquationArgs,
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ShootingArgs {
    #[arg(long = "K")]
    k: Option<f64>,
    #[arg(long)]
    u0: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    zero_threshold: Option<f64>,
    #[arg(long)]
    blowup_threshold: Option<f64>,
    #[arg(long)]
    min_step: Option<f64>,
    #[arg(long)]
    output_points: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    eq: EquationArgs,
    #[command(flatten)]
    shooting: ShootingArgs,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    Gradient,
    Harnack,
    Bochner,
    Bochner2,
    Caccioppoli,
    Sobolev,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimateArg {
    Window,
    Threshold,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(value_enum)]
    kind: CheckKind,
    /// Solution CSV as written by `solve`.
    #[arg(long)]
    solution: PathBuf,
    /// Ball radius; Bochner checks use it to truncate the record.
    #[arg(long = "R")]
    radius: Option<f64>,
    /// Gradient estimate to read the check against.
    #[arg(long, value_enum)]
    estimate: Option<EstimateArg>,
    /// Caccioppoli exponent (default 2·b_min) or Sobolev test-function exponent (default 2).
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    tol_rel: Option<f64>,
    #[arg(long)]
    pass_fraction: Option<f64>,
    #[arg(long)]
    quadrature_points: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Grid description (flat `key = value`).
    #[arg(long)]
    config: PathBuf,
    /// Table CSV.
    #[arg(long)]
    out: PathBuf,
    /// Summary JSON; stdout when absent.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    r_max: Option<f64>,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("LAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::Invalid(format!(
            "LAB_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Failed(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = init_threads().and_then(|()| match cli.command {
        Command::Thresholds(args) => commands::thresholds(args),
        Command::Solve(args) => commands::solve(args),
        Command::Check(args) => commands::check(args),
        Command::Sweep(args) => commands::sweep(args),
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
