//! Command-line front door for the kinex laboratory: deterministic
//! simulation runs, sample and table analysis, and analytic curve data.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod analyze;
mod config;
mod laws;
mod manifest;
mod simulate;

/// Errors carry their exit code: bad flags, config, or input exit 2;
/// failures inside a validly configured run exit 1.
#[derive(Debug)]
pub enum AppError {
    Usage(String),
    Runtime(String),
}

pub type AppResult<T> = std::result::Result<T, AppError>;

pub fn usage<E: std::fmt::Display>(err: E) -> AppError {
    AppError::Usage(err.to_string())
}

pub fn runtime<E: std::fmt::Display>(err: E) -> AppError {
    AppError::Runtime(err.to_string())
}

#[derive(Parser)]
#[command(
    name = "kinex",
    version,
    about = "Kinetic-exchange economy laboratory",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a model; write snapshots, an entropy trajectory, and a manifest
    Simulate(simulate::SimulateArgs),
    /// Fit laws to a sample file or cumulative table; write report data
    Analyze(analyze::AnalyzeArgs),
    /// Tabulate an analytic law as (r, pdf, ccdf) plot data
    Laws(laws::LawsArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate::run(&args),
        Command::Analyze(args) => analyze::run(&args),
        Command::Laws(args) => laws::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
