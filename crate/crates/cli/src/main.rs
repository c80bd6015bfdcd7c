//! `inof`: ingest graphs, run opinion-formation experiments and analyze them.

mod analyze;
mod common;
mod distance;
mod ingest;
mod manifest;
mod simulate;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "inof", version, about = "Opinion formation on directed networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse an edge list (and titles) into a binary graph cache
    Ingest(ingest::IngestArgs),
    /// Run Monte Carlo slots and write per-slot statistics
    Simulate(simulate::SimulateArgs),
    /// Derive histograms, fluctuations and correlators from a results directory
    Analyze(analyze::AnalyzeArgs),
    /// Hop distances from the fixed groups and the distance profile
    Distance(distance::DistanceArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Ingest(a) => ingest::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Analyze(a) => analyze::run(a),
        Command::Distance(a) => distance::run(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
