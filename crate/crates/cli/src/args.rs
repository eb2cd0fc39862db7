use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use robust_psd::mc::ExperimentMethod;
use robust_psd::spectrum::QuantileRule;
use robust_psd::taper::{EdofMode, TaperKind};
use robust_psd::theory::BiasMethod;
use serde::Serialize;

use crate::output::OutFormat;

#[derive(Debug, Parser)]
#[command(
    name = "robust-psd",
    version,
    about = "Welch percentile PSD estimation, theory tables and simulations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the PSD of a sampled signal.
    Estimate(EstimateArgs),
    /// Closed-form bias, variance, EDOF and optimum tables.
    #[command(subcommand)]
    Theory(TheoryCommand),
    /// Monte Carlo experiments on white Gaussian noise.
    #[command(subcommand)]
    Simulate(SimulateCommand),
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        Ok(x) => Err(format!("must be a positive finite number, got {x}")),
        Err(e) => Err(e.to_string()),
    }
}

fn unit_closed(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if (0.0..=1.0).contains(&x) => Ok(x),
        Ok(x) => Err(format!("must lie in [0, 1], got {x}")),
        Err(e) => Err(e.to_string()),
    }
}

fn unit_open(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x < 1.0 => Ok(x),
        Ok(x) => Err(format!("must lie in (0, 1), got {x}")),
        Err(e) => Err(e.to_string()),
    }
}

fn overlap_fraction(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if (0.0..1.0).contains(&x) => Ok(x),
        Ok(x) => Err(format!("must lie in [0, 1), got {x}")),
        Err(e) => Err(e.to_string()),
    }
}

fn segment_length(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 2 => Ok(n),
        Ok(n) => Err(format!("must be >= 2, got {n}")),
        Err(e) => Err(e.to_string()),
    }
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        Ok(n) => Err(format!("must be >= 1, got {n}")),
        Err(e) => Err(e.to_string()),
    }
}

fn sample_count(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x >= 1.0 => Ok(x),
        Ok(x) => Err(format!("must be >= 1, got {x}")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    F64le,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sided {
    One,
    Two,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Input file, or `-` for standard input.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "f64le")]
    pub format: InputFormat,
    /// Sampling frequency.
    #[arg(long, default_value = "1", value_parser = positive)]
    pub fs: f64,
    /// Segment length N_s.
    #[arg(long, default_value = "256", value_parser = segment_length)]
    pub nseg: usize,
    /// Overlap as a fraction of the segment length.
    #[arg(long, default_value = "0.5", value_parser = overlap_fraction)]
    pub overlap: f64,
    #[arg(long, default_value = "hann")]
    pub window: TaperKind,
    #[arg(long, default_value = "0.5", value_parser = unit_closed)]
    pub quantile: f64,
    #[arg(long, default_value = "harmonic")]
    pub bias_method: BiasMethod,
    /// Report the WOSA mean instead of a percentile.
    #[arg(long)]
    pub mean: bool,
    #[arg(long, value_enum, default_value = "two")]
    pub sided: Sided,
    #[arg(long, value_enum, default_value = "csv")]
    pub out_format: OutFormat,
    #[arg(long, default_value = "linear")]
    pub quantile_rule: QuantileRule,
    /// Subtract each segment's mean before tapering.
    #[arg(long)]
    pub detrend: bool,
    #[arg(long, default_value = "squared")]
    pub edof_mode: EdofMode,
    /// Use the raw segment count K in the bias factor instead of ν/2.
    #[arg(long)]
    pub no_edof: bool,
}

#[derive(Debug, Subcommand)]
pub enum TheoryCommand {
    /// Bias factors of every method.
    Bias(GridArgs),
    /// Closed-form and limiting variances.
    Variance(VarianceArgs),
    /// Equivalent degrees of freedom of overlapped segments.
    Edof(EdofArgs),
    /// Quantile minimising the limiting variance.
    Optimum(OptimumArgs),
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Segment counts (may be fractional, e.g. ν/2).
    #[arg(long, value_delimiter = ',', required = true, value_parser = sample_count)]
    pub k_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5", value_parser = unit_closed)]
    pub q_list: Vec<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub out_format: OutFormat,
}

#[derive(Debug, Args)]
pub struct VarianceArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// True PSD level P.
    #[arg(long, default_value = "1", value_parser = positive)]
    pub psd: f64,
}

#[derive(Debug, Args)]
pub struct EdofArgs {
    #[arg(long, default_value = "hann")]
    pub window: TaperKind,
    #[arg(long, default_value = "256", value_parser = segment_length)]
    pub nseg: usize,
    #[arg(long, default_value = "0.5", value_parser = overlap_fraction)]
    pub overlap: f64,
    #[arg(long = "k-list", visible_alias = "k", value_delimiter = ',', required = true, value_parser = at_least_one)]
    pub k_list: Vec<usize>,
    #[arg(long, visible_alias = "edof-mode", default_value = "squared")]
    pub mode: EdofMode,
    #[arg(long, value_enum, default_value = "csv")]
    pub out_format: OutFormat,
}

#[derive(Debug, Args)]
pub struct OptimumArgs {
    #[arg(long = "k-list", visible_alias = "k", value_delimiter = ',', default_value = "1000", value_parser = sample_count)]
    pub k_list: Vec<f64>,
    /// Spacing of the quantile grid step, step·2, …, 1 − step.
    #[arg(long, default_value = "0.01", value_parser = unit_open)]
    pub q_step: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub out_format: OutFormat,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Bias of each requested method per (K, q).
    Bias(SimArgs),
    /// Variance of the digamma-corrected estimate per (K, q).
    Variance(SimArgs),
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value = "10000", value_parser = at_least_one)]
    pub trials: usize,
    #[arg(long, default_value = "0")]
    pub seed: u64,
    #[arg(long, default_value = "256", value_parser = segment_length)]
    pub nseg: usize,
    #[arg(long, default_value = "0.5", value_parser = overlap_fraction)]
    pub overlap: f64,
    #[arg(long, default_value = "hann")]
    pub window: TaperKind,
    #[arg(long, default_value = "3", value_parser = at_least_one)]
    pub k_min: usize,
    #[arg(long, default_value = "40", value_parser = at_least_one)]
    pub k_max: usize,
    /// Explicit segment counts; overrides --k-min/--k-max.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["k_min", "k_max"], value_parser = at_least_one)]
    pub k_list: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', default_value = "0.5", value_parser = unit_open)]
    pub q_list: Vec<f64>,
    /// Methods for `simulate bias`: none, allen, harmonic, digamma, limit, mean.
    #[arg(long, value_delimiter = ',')]
    pub bias_methods: Option<Vec<ExperimentMethod>>,
    #[arg(long, default_value = "squared")]
    pub edof_mode: EdofMode,
    #[arg(long, default_value = "linear")]
    pub quantile_rule: QuantileRule,
    /// Noise standard deviation σ.
    #[arg(long, default_value = "1", value_parser = positive)]
    pub sigma: f64,
    #[arg(long, default_value = "1", value_parser = positive)]
    pub fs: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub out_format: OutFormat,
    /// Suppress progress on standard error.
    #[arg(long)]
    pub quiet: bool,
}
