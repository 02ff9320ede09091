//! `corrspec`: correlation-matrix spectra, mode decomposition and sector
//! networks from daily closing prices or a simulated two-factor market.

// `!(a < b)` style checks are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod bundle;
mod commands;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use corrspec_core::ErrorKind;

use args::{AnalysisArgs, InputArgs};
use commands::{FactorArgs, OutputArgs, SweepArgs};

#[derive(Debug, Parser)]
#[command(name = "corrspec", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full report from a price file.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Full report from a simulated two-factor market, with population eigenvalues alongside.
    Simulate {
        #[command(flatten)]
        model: FactorArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Largest two eigenvalues over a grid of factor strengths.
    Sweep {
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Spectrum of time-shuffled returns against the random-matrix law.
    Surrogate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<corrspec_core::Error>() {
            return match e.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::Data => 3,
                ErrorKind::Infeasible => 4,
            };
        }
        if cause.is::<std::io::Error>() {
            return 3;
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze { input, analysis, out } => commands::analyze(input, analysis, out),
        Command::Simulate { model, analysis, out } => commands::simulate(model, analysis, out),
        Command::Sweep { sweep, out } => commands::run_sweep(sweep, out),
        Command::Surrogate { input, out } => commands::surrogate(input, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
