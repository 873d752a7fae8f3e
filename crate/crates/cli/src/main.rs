//! `qmiss`: closed-form deficiencies, coupled miss-count simulations and
//! occupation-time diagnostics from the command line.
//!
//! Exit codes: 0 success, 1 an experiment failed against its closed-form
//! target, 2 usage or parameter error.

mod args;
mod commands;
mod presets;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::args::{ArdClosedArgs, ArdMcArgs, QlawArgs, SecondOrderArgs, ZooArgs};

/// Master seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Environment variable naming the default results directory.
pub const RESULTS_DIR_ENV: &str = "QMISS_RESULTS_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "qmiss",
    version,
    about = "Count epsilon-misses of estimator sequences and compare them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a closed-form deficiency curve over a grid and report its argmin.
    ArdClosed(ArdClosedArgs),
    /// Coupled Monte Carlo estimate of E(Q_1 - Q_2) over an epsilon grid.
    ArdMc(ArdMcArgs),
    /// Mean occupation time of Brownian motion outside the cone |W(s)| < s / sigma.
    Qlaw(QlawArgs),
    /// Table of variance denominators singled out by different principles.
    Zoo(ZooArgs),
    /// Distribution of eps (Q_eps(c) - Q_eps(0)) against the reference pair law.
    Secondorder(SecondOrderArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    TargetMissed,
}

/// `--out-dir`, else `$QMISS_RESULTS_DIR`, else `./results`.
pub fn results_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(RESULTS_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ArdClosed(a) => commands::ard_closed(a),
        Command::ArdMc(a) => commands::ard_mc(a),
        Command::Qlaw(a) => commands::qlaw(a),
        Command::Zoo(a) => commands::zoo(a),
        Command::Secondorder(a) => commands::secondorder(a),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::TargetMissed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qmiss: {e:#}");
            ExitCode::from(2)
        }
    }
}
