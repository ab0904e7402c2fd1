//! `aklt`: batch front end for sampling, statistics, percolation, reduction
//! to a square grid and the exact oracles.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error,
//! 3 verification failed.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};

use commands::Failure;
use config::{Flags, RunConfig};

#[derive(Parser)]
#[command(name = "aklt", version, about = "AKLT-to-cluster-state reduction toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Per-sample graph observables from Metropolis chains.
    Sample,
    /// Aggregates, 1/L extrapolations and the largest-domain fit.
    Stats,
    /// Site or bond dilution spanning curves and thresholds.
    Percolate,
    /// Carve, clean and contract sampled graphs to square grids.
    Reduce,
    /// Exact distributions and oracle verdicts on small instances.
    Oracle,
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = RunConfig::resolve(&cli.flags)?;
    match cli.command {
        Command::Sample => commands::sample(&cfg),
        Command::Stats => commands::stats(&cfg),
        Command::Percolate => commands::percolate(&cfg),
        Command::Reduce => commands::reduce(&cfg),
        Command::Oracle => commands::oracle(&cfg),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
