//! `d2p`: phase solving, noisy simulation, figure data and invariant checks.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

mod commands;
mod manifest;

pub const DEFAULT_SEED: u64 = 20240101;

#[derive(Parser, Debug)]
#[command(name = "d2p", version, about = "Deterministic Grover search under coherent phase noise")]
struct Cli {
    /// Worker threads for Monte Carlo runs (results do not depend on it).
    #[arg(long, global = true, env = "D2P_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "command", content = "params")]
pub enum Command {
    /// Solve the two designed phases for a schedule template.
    Phases(PhasesArgs),
    /// Monte Carlo success probability of one algorithm under noise.
    Simulate(SimulateArgs),
    /// Regenerate the dataset behind a figure.
    Reproduce(ReproduceArgs),
    /// Run an invariant suite.
    Verify(VerifyArgs),
    /// Re-run the command recorded in a manifest.
    #[serde(skip)]
    Rerun(RerunArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Template {
    Improved,
    D2p,
    Positioned,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmArg {
    Original,
    D2p,
    Improved,
    Positioned,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Text,
    Json,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct PhasesArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = Template::Improved)]
    pub template: Template,
    /// Length of the alternating schedule (default: max(2, ceil(k0))).
    #[arg(long)]
    pub kd: Option<usize>,
    /// First designed step for the positioned template, 1..=k-1.
    #[arg(long)]
    pub position: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub algorithm: AlgorithmArg,
    #[arg(long)]
    pub lambda: f64,
    /// e.g. "gaussian:mu=0,var=0.04@reflection" or "none".
    #[arg(long, default_value = "none")]
    pub noise: String,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, env = "D2P_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub kd: Option<usize>,
    #[arg(long)]
    pub position: Option<usize>,
    /// Output file; a `<out>.manifest.json` is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ReproduceArgs {
    /// 1c, 3b, 3c, 4a, 4b, 5a, 5b, 6a, 6b, 7a, 7b, or "all".
    #[arg(long)]
    pub figure: String,
    /// Overrides the per-figure sample count.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, env = "D2P_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// unitarity, reduction, determinism, uniqueness, closedforms, theorem2,
    /// geometry, or "all".
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, env = "D2P_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write outputs here instead of the recorded location.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unparseable specs, out-of-domain parameters.
    Input(String),
    /// The solver or geometry could not produce a result.
    Solver(String),
    /// Some verification check failed.
    Checks,
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Checks | Failure::Io(_) => 1,
        }
    }
}

impl From<d2p_core::Error> for Failure {
    fn from(e: d2p_core::Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Solver(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.into())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli.command, None) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Input(m) => eprintln!("error: {m}"),
                Failure::Solver(m) => eprintln!("solver failure: {m}"),
                Failure::Checks => eprintln!("verification failed"),
                Failure::Io(e) => eprintln!("error: {e:#}"),
            }
            ExitCode::from(f.code())
        }
    }
}
