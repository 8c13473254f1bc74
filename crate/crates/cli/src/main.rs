//! `cf-lab`: batch experiments on crest-factor concentration.
//!
//! Subcommands: `bounds` (closed-form tables), `simulate` (Monte Carlo
//! tails vs. bounds), `martingale` (Doob trace construction and
//! verification), `scaling` (crest-factor growth across n).
//!
//! Exit codes: 0 success / no violations, 1 usage error, 2 feasibility
//! or resource limit, 3 bound violation, 4 I/O failure.

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod report;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Feasibility(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Feasibility(_) => 2,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Feasibility(m) | CliError::Io(m) => m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Mc,
}

#[derive(Parser)]
#[command(
    name = "cf-lab",
    version,
    about = "Crest-factor concentration experiments for OFDM signals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the four concentration bounds on a deviation grid.
    Bounds(BoundsArgs),
    /// Sample crest factors and compare empirical tails with the bounds.
    Simulate(SimulateArgs),
    /// Build and verify the Doob martingale of the crest factor.
    Martingale(MartingaleArgs),
    /// Mean/median crest-factor growth across sub-carrier counts.
    Scaling(ScalingArgs),
}

#[derive(clap::Args)]
pub struct BoundsArgs {
    /// Comma-separated deviations; default 0.25,0.5,...,4.0.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    alphas: Option<Vec<f64>>,
    /// Jump bound d of the general refined bound (needs --sigma2, --n).
    #[arg(long)]
    d: Option<f64>,
    /// Conditional-variance bound σ² of the general refined bound.
    #[arg(long)]
    sigma2: Option<f64>,
    /// Step count n of the general refined bound.
    #[arg(long)]
    n: Option<usize>,
    /// Directory for bounds.csv / bounds.json / manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
}

#[derive(clap::Args)]
pub struct SimulateArgs {
    /// Number of sub-carriers.
    #[arg(long)]
    n: usize,
    /// PSK constellation size M.
    #[arg(long = "mod", default_value_t = 4)]
    modulation: usize,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated deviations; default 0.25,0.5,...,4.0.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    alphas: Option<Vec<f64>>,
    /// Peak-search oversampling factor L.
    #[arg(long, default_value_t = 16)]
    oversample: usize,
    /// Worker threads; defaults to available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Directory for tails.csv / summary.json / manifest.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
}

#[derive(clap::Args)]
pub struct MartingaleArgs {
    /// Verify the PSK variance identity for these M values and exit.
    #[arg(
        long = "psk-identity",
        value_delimiter = ',',
        conflicts_with_all = ["n", "mode", "inner_samples"]
    )]
    psk_identity: Option<Vec<usize>>,
    /// Number of sub-carriers.
    #[arg(long, required_unless_present = "psk_identity")]
    n: Option<usize>,
    /// PSK constellation size M.
    #[arg(long = "mod", default_value_t = 4)]
    modulation: usize,
    /// exact: enumerate all codewords; mc: Monte Carlo estimates.
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Completions per conditional expectation in mc mode.
    #[arg(long = "inner-samples", default_value_t = 10_000)]
    inner_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Peak-search oversampling factor L.
    #[arg(long, default_value_t = 16)]
    oversample: usize,
    /// Worker threads; defaults to available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Directory for trace.csv / summary.json / manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
}

#[derive(clap::Args)]
pub struct ScalingArgs {
    /// Comma-separated ascending sub-carrier counts (at least 3).
    #[arg(long = "n-list", value_delimiter = ',')]
    n_list: Vec<usize>,
    /// PSK constellation size M.
    #[arg(long = "mod", default_value_t = 4)]
    modulation: usize,
    /// Trials per sub-carrier count.
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Peak-search oversampling factor L.
    #[arg(long, default_value_t = 16)]
    oversample: usize,
    /// Worker threads; defaults to available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Directory for scaling.csv / summary.json / manifest.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };

    let result = match &cli.command {
        Command::Bounds(args) => commands::cmd_bounds(args),
        Command::Simulate(args) => commands::cmd_simulate(args),
        Command::Martingale(args) => commands::cmd_martingale(args),
        Command::Scaling(args) => commands::cmd_scaling(args),
    };

    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.code()
        }
    }
}
