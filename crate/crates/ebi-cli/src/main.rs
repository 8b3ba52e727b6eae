//! `ebi` — simulate dependent time series, evaluate concentration bounds on
//! them, validate coverage by Monte Carlo, and rank hyperparameter grids by
//! risk bound.
//!
//! Every subcommand is deterministic given its effective configuration
//! (flags over `--config` file values over defaults), and every output
//! embeds that configuration. Exit codes: 0 on success (including sweeps
//! containing infeasible block lengths), 2 for invalid configuration, 3 for
//! runtime or data failures.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{CliError, ConfigMap};

#[derive(Parser, Debug)]
#[command(
    name = "ebi",
    version,
    about = "Empirical Bernstein bounds for dependent time series"
)]
struct Cli {
    /// Worker threads for parallel sections (defaults to one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Flat key=value config file; explicit flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a reference process and write its trajectory CSV.
    Simulate(commands::SimulateArgs),
    /// Evaluate a concentration bound on a trajectory, at one block length
    /// or over a sweep.
    Bound(commands::BoundArgs),
    /// Monte-Carlo coverage check of a covariance bound on the
    /// Ornstein–Uhlenbeck process.
    Coverage(commands::CoverageArgs),
    /// Rank a (length scale × regularization) grid by its risk bound.
    ModelSelect(commands::ModelSelectArgs),
    /// Estimate the true covariance-operator error of a trajectory.
    TrueError(commands::TrueErrorArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Config("`--jobs` must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size the worker pool: {e}")))?;
    }
    let cfg = ConfigMap::load(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate(args) => commands::run_simulate(args, &cfg),
        Command::Bound(args) => commands::run_bound(args, &cfg),
        Command::Coverage(args) => commands::run_coverage(args, &cfg),
        Command::ModelSelect(args) => commands::run_model_select(args, &cfg),
        Command::TrueError(args) => commands::run_true_error(args, &cfg),
    }
}
