//! Command-line driver for the ε-HALP solver and the irrigation benchmarks.

mod commands;
mod config;
mod error;
mod io;
mod report;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{evaluate, generate, infeasibility, scaleup, solve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "halp", version, about = "Approximate linear programming for hybrid factored MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write an irrigation benchmark model and its basis.
    Generate(generate::GenerateArgs),
    /// Solve the ε-HALP at one or more grid resolutions.
    Solve(solve::SolveArgs),
    /// Roll out greedy policies and baselines on a shared set of initial states.
    Evaluate(evaluate::EvaluateArgs),
    /// Time solves over growing benchmark instances.
    Scaleup(scaleup::ScaleupArgs),
    /// Measure how far a solution is from satisfying every constraint.
    Infeasibility(infeasibility::InfeasibilityArgs),
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("HALP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: HALP_THREADS ignored: {e}");
        }
    }
    let result = match &cli.command {
        Command::Generate(a) => generate::run(a),
        Command::Solve(a) => solve::run(a),
        Command::Evaluate(a) => evaluate::run(a),
        Command::Scaleup(a) => scaleup::run(a),
        Command::Infeasibility(a) => infeasibility::run(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
