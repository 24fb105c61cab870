//! `epi-lab`: command-line driver for the entropy experiments.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::NList;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] epi_lab_core::Error),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "epi-lab", version, about = "Numerical checks of entropy power inequalities for weighted sums")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid_lo: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid_hi: Option<f64>,
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,
    /// Flat `key = value` file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PerturbationChoice {
    Explicit,
    Zero,
}

impl std::str::FromStr for PerturbationChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <PerturbationChoice as ValueEnum>::from_str(s, true)
    }
}

/// Test densities. All except `counterexample` have mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DensityChoice {
    Counterexample,
    Gaussian,
    Uniform,
    Logistic,
}

impl std::str::FromStr for DensityChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <DensityChoice as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    #[arg(long, value_enum)]
    pub density: Option<DensityChoice>,
    /// Two-column `x,value` CSV on a uniform grid; overrides `--density`.
    #[arg(long)]
    pub density_file: Option<PathBuf>,
    /// Mollifier width of the counterexample.
    #[arg(long)]
    pub eta: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute J = J1 - J2 for the explicit perturbation.
    VerifyJ {
        #[arg(long, value_enum)]
        g: Option<PerturbationChoice>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Build the counterexample density and tabulate the entropy gaps.
    Counterexample {
        #[arg(long, value_enum)]
        density: Option<CounterexampleBase>,
        #[arg(long)]
        eta: Option<f64>,
        /// Fixes epsilon instead of searching for it.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Fixes the fourth-moment tilt; requires `--epsilon`.
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        n_list: Option<NList>,
        /// Gaps at or below this are not counted as positive.
        #[arg(long)]
        gap_tol: Option<f64>,
    },
    /// Search for violations of Schur-concavity of the weighted-sum entropy.
    SchurScan {
        #[command(flatten)]
        density: DensityArgs,
        /// Number of weights.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// Monte Carlo check of the complex-unconditional inequality.
    HadamardCheck {
        #[arg(long)]
        n: Option<usize>,
        /// Sampler kind; all kinds when omitted.
        #[arg(long)]
        kind: Option<String>,
        /// Sample count.
        #[arg(long)]
        m: Option<usize>,
        /// Neighbour order of the entropy estimator.
        #[arg(long)]
        k: Option<usize>,
        /// Also estimate the Fourier subadditivity step (slow for n >= 4).
        #[arg(long)]
        chain: bool,
        /// Write the sampled batch as CSV.
        #[arg(long)]
        export_batch: Option<PathBuf>,
    },
    /// Fit the decay of the Edgeworth approximation error.
    EdgeworthFit {
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n_list: Option<NList>,
        /// Exit 0 only if the fitted exponent is at most this.
        #[arg(long, allow_hyphen_values = true)]
        max_exponent: Option<f64>,
    },
    /// Moments, entropy and shape diagnostics of a density.
    DensityInfo {
        #[command(flatten)]
        density: DensityArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CounterexampleBase {
    Counterexample,
    Gaussian,
}

impl std::str::FromStr for CounterexampleBase {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <CounterexampleBase as ValueEnum>::from_str(s, true)
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("EPI_LAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("EPI_LAB_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| commands::run(&cli)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
