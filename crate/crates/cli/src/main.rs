//! `suple`: spectra, landscapes, training, evaluation and reward comparisons.
//!
//! Exit codes: 0 on success, 1 on runtime or numerical failure, 2 on usage
//! errors (bad flags, malformed values, invalid configs).

mod commands;
mod failure;

use clap::{Args, Parser, Subcommand};
use failure::Failure;
use std::path::PathBuf;
use std::process::ExitCode;

/// Truncated Lyapunov spectra and Lyapunov-exponent rewards.
#[derive(Debug, Parser)]
#[command(name = "suple", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Config file in `key=value` format.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override a config entry; repeatable, applied after the config file.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output location [default: $SUPLE_OUT, else `results`].
    #[arg(short, long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for parallel evaluation.
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Truncated Lyapunov spectrum and both intrinsic rewards at one state.
    Spectrum(commands::SpectrumArgs),
    /// Intrinsic-reward landscape over a two-dimensional slice, as CSV and PPM.
    Landscape(commands::LandscapeArgs),
    /// Train one agent on one reward.
    Train(commands::TrainArgs),
    /// Evaluate a trained checkpoint.
    Eval(commands::EvalArgs),
    /// Run a multi-reward, multi-seed comparison plan.
    Compare(commands::CompareArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Landscape(a) => commands::landscape(a),
        Command::Train(a) => commands::train(a),
        Command::Eval(a) => commands::eval(a),
        Command::Compare(a) => commands::compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
