//! `twinfield`: bounds, rate curves, Monte Carlo runs and phase-drift demos.

mod commands;
mod config;
mod error;
mod format;
mod table1;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{bounds, emit, phase_demo, rate_curve, simulate, table1 as table1_cmd};
use error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "twinfield", version, about = "Twin-field QKD key rates, bounds and simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate capacity bounds at a transmittance or fiber length.
    Bounds(bounds::BoundsArgs),
    /// Key rate and bounds against distance, as CSV.
    RateCurve(rate_curve::RateCurveArgs),
    /// Monte Carlo run of one protocol, as a TOML report.
    Simulate(simulate::SimulateArgs),
    /// Reported field trials against the repeaterless bound.
    Table1(table1_cmd::Table1Args),
    /// Phase-drift compensation residuals and interference error.
    PhaseDemo(phase_demo::PhaseDemoArgs),
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Bounds(a) => emit(None, &bounds::run(a)?),
        Command::RateCurve(a) => emit(a.output.as_deref(), &rate_curve::run(a)?),
        Command::Simulate(a) => emit(a.output.as_deref(), &simulate::run(a)?),
        Command::Table1(a) => emit(a.output.as_deref(), &table1_cmd::run(a)?),
        Command::PhaseDemo(a) => emit(a.output.as_deref(), &phase_demo::run(a)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
