//! Command-line front end over the simulator: level traces, paired ledger
//! benches, footprint and carry-depth accounting, residency stress sweeps,
//! and the encrypted-classification pipeline.
//!
//! Exit codes follow one contract across every subcommand: 0 clean, 2 when
//! a modeled failure (level exhaustion or a budget miss) appears in the
//! output with the partial rows still emitted, 64 for usage, flag, config,
//! or input-format errors, 66 for a missing input file.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Config;

pub const EXIT_MODELED_FAILURE: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_MISSING_INPUT: u8 = 66;

/// Terminal command failure, carrying the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    MissingInput(String),
    Runtime(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::MissingInput(_) => EXIT_MISSING_INPUT,
            Failure::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::MissingInput(m) | Failure::Runtime(m) => f.write_str(m),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "hssmlab",
    version,
    about = "Leveled-ciphertext cost simulator for encrypted sequence circuits"
)]
struct Cli {
    /// Optional key=value config file; flags win over config values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one circuit and emit its per-operation level trace as CSV.
    Trace(commands::TraceArgs),
    /// Run a (kind, length, repeat) grid and emit one ledger row per run.
    Bench(commands::BenchArgs),
    /// Ciphertext residency per family as a function of sequence length.
    Footprint(commands::FootprintArgs),
    /// Carry-depth curves: encrypted carry versus public-scalar carry.
    Depth(commands::DepthArgs),
    /// Hold a family's working set against a residency budget.
    Stress(commands::StressArgs),
    /// Train a model and verify encrypted decisions against plaintext.
    Classify(commands::ClassifyArgs),
}

fn dispatch(cli: &Cli) -> Result<u8, Failure> {
    let cfg = Config::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Trace(args) => commands::trace(args, &cfg),
        Command::Bench(args) => commands::bench(args, &cfg),
        Command::Footprint(args) => commands::footprint(args),
        Command::Depth(args) => commands::depth(args),
        Command::Stress(args) => commands::stress(args, &cfg),
        Command::Classify(args) => commands::classify(args, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("hssmlab: {failure}");
            ExitCode::from(failure.code())
        }
    }
}
