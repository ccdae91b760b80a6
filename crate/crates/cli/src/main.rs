//! `eglb`: run, compare and check equity-aware load balancing on traces.
//!
//! Exit codes: 0 success, 1 a bound check failed, 2 usage or input error.

mod commands;
mod io;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eglb_planner::Algorithm;

#[derive(Parser)]
#[command(name = "eglb", version, about = "Equity-aware geographical load balancing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm and write report.json, schedule.csv and duals.csv.
    Run(RunArgs),
    /// Run every algorithm and tabulate cost, water and carbon.
    Compare(CompareArgs),
    /// Generate a synthetic trace directory from a profile.
    Gen(GenArgs),
    /// Re-check the performance and multiplier bounds of a stored eGLB run.
    VerifyBound(VerifyArgs),
}

#[derive(Args, Clone)]
pub struct Common {
    /// Trace directory.
    #[arg(long)]
    pub trace: PathBuf,
    /// Learning rate of the online algorithm.
    #[arg(long, default_value_t = 1.7e-4)]
    pub eta: f64,
    /// Weight of the worst regional carbon footprint, USD per ton.
    #[arg(long = "mu-c", default_value_t = 1500.0)]
    pub mu_c: f64,
    /// Weight of the worst regional water footprint, USD per m³.
    #[arg(long = "mu-w", default_value_t = 60.0)]
    pub mu_w: f64,
    /// Divide each region's footprint by its capacity before taking the max.
    #[arg(long)]
    pub normalize: bool,
    /// MPC look-ahead in slots.
    #[arg(long, default_value_t = 24)]
    pub window: usize,
    /// Multi-model fleet description (JSON).
    #[arg(long)]
    pub hetero: Option<PathBuf>,
    /// Per-ton carbon price of GLB-C2 and GLB-All [default: --mu-c].
    #[arg(long = "w-carbon")]
    pub w_carbon: Option<f64>,
    /// Per-m³ water price of GLB-All [default: --mu-w].
    #[arg(long = "w-water")]
    pub w_water: Option<f64>,
    /// Relative duality gap at which the offline solver stops.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Column-generation iteration limit of the offline solver.
    #[arg(long = "max-iters", default_value_t = 400)]
    pub max_iters: usize,
}

#[derive(Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_parser = parse_algo)]
    pub algo: Algorithm,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    /// Directory for compare.csv, compare.txt and compare.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct GenArgs {
    #[arg(long)]
    pub days: usize,
    #[arg(long)]
    pub seed: u64,
    /// Synthesis profile (JSON).
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Extend the trace to this many days with perturbed workload copies.
    #[arg(long = "augment-days")]
    pub augment_days: Option<usize>,
    /// Relative workload perturbation of the appended copies.
    #[arg(long, default_value_t = 0.25)]
    pub perturbation: f64,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Output directory of `eglb run --algo eglb`.
    #[arg(long)]
    pub run: PathBuf,
}

fn parse_algo(s: &str) -> Result<Algorithm, String> {
    s.parse::<Algorithm>().map_err(|e| {
        let names: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
        format!("{e}; expected one of {}", names.join(", "))
    })
}

/// Why a command did not succeed.
pub enum Failure {
    /// A bound check evaluated to false.
    Check(String),
    /// Bad arguments, unreadable input, or a solver error.
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<eglb_core::Error> for Failure {
    fn from(e: eglb_core::Error) -> Self {
        Failure::Input(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => commands::run(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Gen(a) => commands::gen(&a),
        Command::VerifyBound(a) => commands::verify_bound(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
