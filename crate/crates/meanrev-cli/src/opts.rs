//! Command-line surface.
//!
//! Every long option may also be supplied through `--config FILE` as a
//! `key = value` line (dashes become underscores); explicit flags win.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Trend/mean-reversion toolkit: simulate long-memory price paths, measure
/// de-trended predictability curves, fit the model, and report the implied
/// oscillation band.
#[derive(Debug, Parser)]
#[command(name = "meanrev", version, about)]
pub struct Cli {
    /// INI-style config file supplying defaults for any long option.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for parallel sections (defaults to all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// Extra progress information on stderr.
    #[arg(long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate price paths from the model and write a price CSV.
    Simulate(SimulateOpts),
    /// Measure the de-trended predictability curve of a price CSV.
    Curve(CurveOpts),
    /// Tabulate theoretical slopes and autocorrelations.
    Theory(TheoryOpts),
    /// Fit model parameters to a measured curve.
    Calibrate(CalibrateOpts),
    /// Derive band width and time scales from parameters or a fit.
    Report(ReportOpts),
}

/// Model parameters in human units. Unset fields fall back to the preset
/// (`futures` when no preset is named).
#[derive(Debug, Args)]
pub struct ParamOpts {
    /// Parameter preset: `futures` or `spot`.
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,

    /// Trend variance ratio g (dimensionless, >= 0).
    #[arg(long, value_name = "G", allow_negative_numbers = true)]
    pub g: Option<f64>,

    /// Mean-reversion time 1/kappa in years.
    #[arg(long, value_name = "YEARS", allow_negative_numbers = true)]
    pub kappa_inv: Option<f64>,

    /// Trend memory 1/gamma in trading days.
    #[arg(long, value_name = "DAYS", allow_negative_numbers = true)]
    pub gamma_inv: Option<f64>,

    /// Diffusive variance scale sigma^2 (log-price units squared).
    #[arg(long, value_name = "VAR", allow_negative_numbers = true)]
    pub sigma2: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateOpts {
    #[command(flatten)]
    pub params: ParamOpts,

    /// Number of independent paths [default: 1].
    #[arg(long, value_name = "N")]
    pub paths: Option<usize>,

    /// Length of each path in years [default: 30].
    #[arg(long, value_name = "YEARS", allow_negative_numbers = true)]
    pub years: Option<f64>,

    /// Observation frequency: `daily` or `monthly` [default: daily].
    #[arg(long, value_name = "FREQ")]
    pub freq: Option<String>,

    /// Master RNG seed; path p uses stream p [default: 42].
    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,

    /// Unrecorded transitions before sampling starts [default: 0].
    #[arg(long, value_name = "STEPS")]
    pub burn_in: Option<usize>,

    /// Deterministic annual log-price drift added on top of the model
    /// [default: 0].
    #[arg(long, value_name = "RATE", allow_negative_numbers = true)]
    pub drift: Option<f64>,

    /// First observation date [default: 1950-01-01].
    #[arg(long, value_name = "DATE")]
    pub start_date: Option<String>,

    /// Output price CSV (`date,symbol,price`).
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    /// Also dump raw de-trended log prices (`path_id,step,t_years,pi`).
    #[arg(long, value_name = "FILE")]
    pub emit_paths: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurveOpts {
    /// Input price CSV (`date,symbol,price`).
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,

    /// Long-trend window T in years [default: 20].
    #[arg(long, value_name = "YEARS", allow_negative_numbers = true)]
    pub t_years: Option<f64>,

    /// Future/past horizon ratio [default: 0.2].
    #[arg(long, value_name = "RATIO", allow_negative_numbers = true)]
    pub ratio: Option<f64>,

    /// Outlier threshold in normalized units [default: 4].
    #[arg(long, value_name = "SIGMA", allow_negative_numbers = true)]
    pub cut: Option<f64>,

    /// Past horizons in native units, comma-separated
    /// [default: frequency-specific grid].
    #[arg(long, value_name = "LIST")]
    pub grid: Option<String>,

    /// Shrink the trend window when history is shorter than T instead of
    /// skipping those anchors.
    #[arg(long)]
    pub no_min_history: bool,

    /// Normalize returns per contract instead of per pooled horizon.
    #[arg(long)]
    pub per_symbol_norm: bool,

    /// Write the curve as CSV.
    #[arg(long, value_name = "FILE")]
    pub out_csv: Option<PathBuf>,

    /// Write the curve as JSON.
    #[arg(long, value_name = "FILE")]
    pub out_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TheoryOpts {
    #[command(flatten)]
    pub params: ParamOpts,

    /// Future/past horizon ratio [default: 0.2].
    #[arg(long, value_name = "RATIO", allow_negative_numbers = true)]
    pub ratio: Option<f64>,

    /// Past horizons in native units, comma-separated
    /// [default: frequency-specific grid].
    #[arg(long, value_name = "LIST")]
    pub grid: Option<String>,

    /// Native unit: `daily` or `monthly` [default: daily].
    #[arg(long, value_name = "FREQ")]
    pub freq: Option<String>,

    /// Write CSV here instead of printing a table.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateOpts {
    /// Measured curve (`.json` as written by `curve --out-json`, anything
    /// else parsed as the CSV schema).
    #[arg(long, value_name = "FILE")]
    pub curve: PathBuf,

    /// Future/past horizon ratio the curve was built with [default: 0.2].
    #[arg(long, value_name = "RATIO", allow_negative_numbers = true)]
    pub ratio: Option<f64>,

    /// Point weighting: `stderr` or `uniform` [default: stderr].
    #[arg(long, value_name = "MODE")]
    pub weights: Option<String>,

    #[command(flatten)]
    pub init: ParamOpts,

    /// Write the calibration result JSON here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportOpts {
    /// Calibration result JSON; when absent, parameters come from the
    /// flags/preset below.
    #[arg(long, value_name = "FILE")]
    pub calibration: Option<PathBuf>,

    #[command(flatten)]
    pub params: ParamOpts,

    /// Future/past horizon ratio for the sign-change scan
    /// [default: the calibration's ratio, else 0.2].
    #[arg(long, value_name = "RATIO", allow_negative_numbers = true)]
    pub ratio: Option<f64>,

    /// One-day return volatility anchoring the overall scale (required).
    #[arg(long, value_name = "VOL", allow_negative_numbers = true)]
    pub daily_vol: Option<f64>,

    /// Also write the report as JSON.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}
