//! Experiment runner for `vnag-core`: simulations, second-variation sweeps,
//! minimizer/saddle classification and the built-in figure reproductions.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use commands::reproduce::Figure;
pub use config::ExperimentConfig;
pub use error::{CliError, Result};
pub use output::{Outcome, ReportRecord};

#[derive(Debug, Parser)]
#[command(name = "vnag", version, about = "Second variations and conjugate points of accelerated gradient flows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a flow and check its Euler-Lagrange residual.
    Simulate(RunArgs),
    /// Evaluate δ²J for configured or swept perturbations.
    SecondVariation(RunArgs),
    /// Minimizer or saddle verdicts over a sweep of intervals.
    Classify(RunArgs),
    /// Regenerate one of the built-in experiments.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for random perturbations; overrides the config's `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Record wall-clock time in report.json (makes reports differ run to run).
    #[arg(long)]
    pub timing: bool,
}

pub const DEFAULT_OUT: &str = "out";

/// Runs one command and writes its artifacts. Returns the written paths.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let start = Instant::now();
    let (mut outcome, dir, timing) = match cli.command {
        Command::Simulate(a) => run_config(a, "simulate", commands::simulate::run)?,
        Command::SecondVariation(a) => run_config(a, "second-variation", commands::variation::run)?,
        Command::Classify(a) => run_config(a, "classify", commands::classify::run)?,
        Command::Reproduce(a) => {
            let seed = a.common.seed.unwrap_or(0);
            let outcome = commands::reproduce::run(a.figure, seed)?;
            let dir = a
                .common
                .out
                .unwrap_or_else(|| Path::new(DEFAULT_OUT).join(a.figure.name()));
            (outcome, dir, a.common.timing)
        }
    };
    if timing {
        outcome.report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
    }
    outcome.write(&dir)
}

fn run_config(
    args: RunArgs,
    name: &str,
    f: fn(&ExperimentConfig) -> Result<Outcome>,
) -> Result<(Outcome, PathBuf, bool)> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.common.seed {
        cfg.seed = Some(seed);
    }
    let dir = args
        .common
        .out
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| Path::new(DEFAULT_OUT).join(name));
    Ok((f(&cfg)?, dir, args.common.timing))
}
