//! Flag definitions. Every value flag is optional at parse time so the
//! config file can supply it; command handlers report precise diagnostics
//! for anything still missing after the merge.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::output::Format;

#[derive(Parser)]
#[command(
    name = "rero",
    version,
    about = "Reconstruction-robustness bounds, noise calibration and attack simulation for DP-SGD"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Flat key = value config file mirroring the flag names; flags override it
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output format for the data stream
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Evaluate an (eta, gamma) reconstruction-robustness certificate
    Bound(BoundArgs),
    /// Calibrate the noise multiplier to an (eta, gamma) risk target
    Calibrate(CalibrateArgs),
    /// Risk corridor [0, eta(gamma_prior)] against a candidate-set bound
    Corridor(CorridorArgs),
    /// Monte Carlo simulation of the inversion attack on one DP-SGD step
    Simulate(SimulateArgs),
    /// Evaluate bounds, calibration or simulations over a parameter grid
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Mse,
    Psnr,
}

#[derive(Debug, clap::Args)]
pub struct BoundArgs {
    /// Reconstruction metric the certificate refers to
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    /// Target dimension N
    #[arg(long)]
    pub n: Option<u64>,
    /// Noise multiplier
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Smallest dataset norm, zero vector excluded
    #[arg(long)]
    pub min_norm: Option<f64>,
    /// DP-SGD clip norm (context only; the closed forms do not use it)
    #[arg(long)]
    pub clip_norm: Option<f64>,
    /// MSE threshold (metric mse)
    #[arg(long)]
    pub eta: Option<f64>,
    /// PSNR threshold in dB (metric psnr)
    #[arg(long)]
    pub eta_db: Option<f64>,
    /// Dataset value range, max entry minus min entry (metric psnr)
    #[arg(long)]
    pub data_range: Option<f64>,
}

#[derive(Debug, clap::Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub min_norm: Option<f64>,
    /// MSE threshold to protect against
    #[arg(long)]
    pub eta: Option<f64>,
    /// Acceptable success probability, strictly inside (0, 1)
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, clap::Args)]
pub struct CorridorArgs {
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub min_norm: Option<f64>,
    #[arg(long)]
    pub clip_norm: Option<f64>,
    /// Success probability granted by the identification-based bound
    #[arg(long)]
    pub gamma_prior: Option<f64>,
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    /// Explicit target entries, comma-separated
    #[arg(long)]
    pub target: Option<String>,
    /// Synthetic target dimension (with --norm)
    #[arg(long)]
    pub n: Option<usize>,
    /// Synthetic target norm (with --n)
    #[arg(long)]
    pub norm: Option<f64>,
    /// Rows of the inserted linear layer
    #[arg(long)]
    pub m_rows: Option<usize>,
    #[arg(long)]
    pub clip_norm: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Norm of non-contributory gradient components
    #[arg(long)]
    pub rest_norm: Option<f64>,
    /// Per-row loss derivatives, comma-separated; one value broadcasts
    #[arg(long)]
    pub loss_derivatives: Option<String>,
    /// Count bias derivatives into the global gradient norm
    #[arg(long)]
    pub bias_rows: bool,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed; all randomness derives from it
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write per-trial CSV (trial, mse, psnr) to this path
    #[arg(long, value_name = "PATH")]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct SweepArgs {
    /// Swept variable: sigma|eta|gamma|m|rest-norm
    #[arg(long)]
    pub variable: Option<String>,
    /// Grid: comma list, lin:start:stop:count, or log:start:stop:count
    #[arg(long)]
    pub grid: Option<String>,
    /// Quantity per grid point: gamma|sigma|eta|mse
    #[arg(long)]
    pub emit: Option<String>,
    /// Subset and order of output columns, comma-separated
    #[arg(long)]
    pub columns: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub min_norm: Option<f64>,
    #[arg(long)]
    pub clip_norm: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub norm: Option<f64>,
    #[arg(long)]
    pub m_rows: Option<usize>,
    #[arg(long)]
    pub rest_norm: Option<f64>,
    #[arg(long)]
    pub loss_derivatives: Option<String>,
    #[arg(long)]
    pub bias_rows: bool,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}
