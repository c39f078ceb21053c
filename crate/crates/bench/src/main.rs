//! Benchmark CLI for composite minimax solvers.
//!
//! Three subcommands: `run` executes one solver configuration and writes a
//! trace, `grid` sweeps a stepsize grid per method under an oracle-call
//! budget, `check` runs the self-check battery against independent
//! references. Usage errors and refused configurations exit 2; a failed
//! check exits 1; a diverging run is still a completed run and exits 0.

mod check;
mod grid;
mod output;
mod problems;
mod run;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "minimax-bench",
    about = "Benchmark gradient descent-ascent solvers on composite minimax problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver configuration and write trace.csv and run.json
    Run(run::RunArgs),
    /// Sweep a stepsize grid and write heatmap.csv
    Grid(grid::GridArgs),
    /// Verify analytic components against independent references
    Check(check::CheckArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => run::execute(args).map(|()| true),
        Command::Grid(args) => grid::execute(args).map(|()| true),
        Command::Check(args) => check::execute(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
