//! `stepanov`: almost-periodicity scans on function specs and scenario runs.
//!
//! Exit codes: 0 success, 2 bad input, 3 numerical failure, 4 failed check.

mod analyze;
mod artifacts;
mod report;
mod solve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use stepanov_core::corpus::SolverChoice;
use stepanov_core::MetricKind;

#[derive(Debug, Parser)]
#[command(
    name = "stepanov",
    version,
    about = "Stepanov almost periodicity scans and mild-solution SDE runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Command {
    /// Distances, almost period scans, integrability defect and ergodic means of a function spec.
    Analyze(AnalyzeArgs),
    /// Run a registered (or JSON) scenario and score its expected checks.
    Solve(SolveArgs),
    /// Verify an output directory against its manifest and print the summary.
    Report(ReportArgs),
}

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalyzeArgs {
    /// JSON file: a function spec, or `{function, compare?, window?}`.
    #[arg(long)]
    pub spec: PathBuf,
    /// `uniform`, `sp:<p>` or `smeasure`; repeatable.
    #[arg(long = "metric", value_parser = parse_metric, default_value = "uniform")]
    pub metrics: Vec<MetricKind>,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long)]
    pub tau_min: Option<f64>,
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub tau_step: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Mass of the small sets in the Stepanov integrability defect.
    #[arg(long, default_value_t = 1e-3)]
    pub delta_mass: f64,
    #[arg(long, default_value_t = 1.0)]
    pub defect_p: f64,
    /// Radii for Lebesgue ergodic means; `[-r, r]` must lie in the window.
    #[arg(long, value_delimiter = ',')]
    pub radii: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolveArgs {
    /// Registry name or path to a scenario JSON file.
    #[arg(long)]
    pub scenario: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t1: Option<f64>,
    /// Shifts for the law-level test; defaults to those the scenario checks.
    #[arg(long, value_delimiter = ',')]
    pub tau: Vec<f64>,
    /// Acceptance level for `--tau` shifts; defaults to the scenario's own.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, value_enum, default_value_t = SolverArg::Picard)]
    pub solver: SolverArg,
    /// Members written to the ensemble CSV.
    #[arg(long, default_value_t = 100)]
    pub csv_members: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverArg {
    Picard,
    Euler,
}

impl From<SolverArg> for SolverChoice {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Picard => SolverChoice::Picard,
            SolverArg::Euler => SolverChoice::ExponentialEuler,
        }
    }
}

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportArgs {
    /// Output directory holding `manifest.json`.
    pub dir: PathBuf,
    /// Re-run the recorded command into this directory and compare checksums.
    #[arg(long)]
    pub replay: Option<PathBuf>,
}

fn parse_metric(s: &str) -> Result<MetricKind, String> {
    s.parse().map_err(|e: stepanov_core::Error| e.to_string())
}

/// An error carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: 2,
            error: error.into(),
        }
    }

    pub fn check(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: 4,
            error: error.into(),
        }
    }
}

impl From<stepanov_core::Error> for Failure {
    fn from(e: stepanov_core::Error) -> Self {
        Self {
            code: if e.is_numerical() { 3 } else { 2 },
            error: e.into(),
        }
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;

pub fn run(command: &Command) -> CliResult {
    match command {
        Command::Analyze(a) => analyze::run(a, command),
        Command::Solve(s) => solve::run(s, command),
        Command::Report(r) => report::run(r),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
