mod commands;
mod envelope;
mod scan;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::envelope::Failure;

#[derive(Debug, Parser)]
#[command(name = "trimoment", version, about = "Third-order spin moments and the tripartite parameter S")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full moment report for one state
    Compute(StateArgs),
    /// Identity suite, cancellation sweep, route and product-state checks
    Verify(VerifyArgs),
    /// S and moments over a one-parameter family, as CSV
    Scan(ScanArgs),
    /// Simulated projective measurements of Jx' and Jy'
    Sample(SampleArgs),
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Output path; standard output if omitted
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative tolerance for direct vs sum route agreement
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance_rel: f64,
    /// Absolute floor for route agreement
    #[arg(long, default_value_t = 1e-12)]
    pub tolerance_abs: f64,
}

#[derive(Debug, Args, Clone)]
pub struct StateArgs {
    #[command(flatten)]
    pub common: Common,
    /// State JSON file, or "-" for standard input
    #[arg(long, short)]
    pub input: String,
    /// Expected number of atoms; mismatches are rejected
    #[arg(long = "n")]
    pub n_atoms: Option<usize>,
    /// Allow product-basis expansions beyond the default size cap
    #[arg(long)]
    pub allow_large_n: bool,
    /// Rescale the coefficients to unit norm
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Args, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Base trial count for the randomized sweeps
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, hide = true)]
    pub corrupt_identity: Option<String>,
}

#[derive(Debug, Args, Clone)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    /// Grid as inline JSON, e.g. {"n_atoms":3,"indices":[0,1],"alpha":{"start":0,"stop":1.5707963267948966,"points":11}}
    #[arg(long)]
    pub grid: String,
    /// Override the grid's number of atoms
    #[arg(long = "n")]
    pub n_atoms: Option<usize>,
}

#[derive(Debug, Args, Clone)]
pub struct SampleArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Shots per measured operator
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compute(a) => commands::compute(a),
        Command::Verify(a) => commands::verify(a),
        Command::Scan(a) => scan::run(a),
        Command::Sample(a) => commands::sample(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            eprintln!("trimoment: {message}");
            ExitCode::from(code)
        }
    }
}
