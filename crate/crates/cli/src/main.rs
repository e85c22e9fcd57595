//! `solvcirc`: batch front-end for solvable brickwork circuit experiments.
//!
//! Exit codes: 0 success, 1 quantitative failure, 2 configuration error,
//! 3 capacity error.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Common;
use crate::config::ExperimentConfig;
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "solvcirc",
    version,
    about = "Solvable brickwork circuits with exact boundary channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solvable-condition residuals of a gate against an MPS (JSON).
    Check(CommonArgs),
    /// Materialize a gate and write it as a gate file (JSON).
    GenGate(CommonArgs),
    /// Run the boundary-channel engine (CSV).
    Evolve(CommonArgs),
    /// Compare the engine against the brute-force chain (CSV).
    Oracle(CommonArgs),
    /// Replica traces and entanglement velocities (CSV).
    Renyi(CommonArgs),
    /// Influence-matrix fixed-point residual (JSON).
    FixedPoint(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Pass/fail threshold; each command has its own default.
    #[arg(long)]
    tol: Option<f64>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when absent and the config names none.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> CliResult<()> {
    let (args, f): (&CommonArgs, fn(&Common) -> CliResult<()>) = match &cli.command {
        Command::Check(a) => (a, commands::check),
        Command::GenGate(a) => (a, commands::gen_gate),
        Command::Evolve(a) => (a, commands::evolve),
        Command::Oracle(a) => (a, commands::oracle),
        Command::Renyi(a) => (a, commands::renyi),
        Command::FixedPoint(a) => (a, commands::fixed_point),
    };
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    f(&Common {
        config_path: args.config.clone(),
        config,
        tol: args.tol,
        out: args.out.clone(),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // --help and --version are not errors
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("solvcirc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
