//! `conformal-aoa`: simulate conformal metasurface apertures and estimate angles of arrival.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "conformal-aoa", version, about)]
pub struct Cli {
    /// Experiment configuration (TOML). Defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory; created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,

    /// Overrides `rng_seed`, and `sweep.master_seed` for sweeps.
    #[arg(long, global = true, value_name = "INT")]
    pub seed: Option<u64>,

    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true, value_name = "INT")]
    pub workers: Option<usize>,

    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub plot: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep both apertures at the reference distance and write their pattern files.
    Simulate(SimulateArgs),
    /// Cross-correlate two pattern files into a sensing matrix.
    BuildMatrix(BuildMatrixArgs),
    /// Estimate the angle of arrival for one measurement.
    Estimate(EstimateArgs),
    /// Normalized singular values of a sensing matrix.
    Svd(SvdArgs),
    /// Monte-Carlo campaign over bands, distances and SNRs.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Write packed binary copies next to the CSV files.
    #[arg(long)]
    pub binary: bool,
}

#[derive(Debug, Args)]
pub struct BuildMatrixArgs {
    #[arg(long, value_name = "FILE")]
    pub port1: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub port2: PathBuf,
    #[arg(long)]
    pub binary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Cgs,
    MatchedFilter,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Sensing matrix (CSV or binary). Simulated from the configuration when omitted together
    /// with `--measurement`.
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,

    /// Measurement vector CSV (`freq_hz,re,im`).
    #[arg(long, value_name = "FILE", conflicts_with = "simulate_source")]
    pub measurement: Option<PathBuf>,

    /// Synthesise the measurement: `ANGLE_DEG,DISTANCE_M[,SNR_DB[,NOISE_SEED]]`, SNR `inf`
    /// for noiseless.
    #[arg(long, value_name = "SPEC", required_unless_present = "measurement")]
    pub simulate_source: Option<String>,

    #[arg(long, value_enum, default_value = "cgs")]
    pub method: MethodArg,
}

#[derive(Debug, Args)]
pub struct SvdArgs {
    #[arg(long, value_name = "FILE")]
    pub matrix: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Trials per cell; each trial estimates every grid angle once.
    #[arg(long)]
    pub trials: Option<usize>,

    /// Comma-separated SNR values in dB; `inf` for noiseless.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub snr_db: Option<Vec<f64>>,

    /// Comma-separated source distances in metres.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub distances: Option<Vec<f64>>,

    /// Refuse sweeps needing more than this many estimations.
    #[arg(long, value_name = "INT")]
    pub max_estimations: Option<u64>,

    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
