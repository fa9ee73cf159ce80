//! The measurement pipeline: causal de-trending, pooled return pairs,
//! outlier filtering, and linear/cubic predictability regressions.
//!
//! The pipeline turns raw price series into *predictability curves*:
//!
//! 1. For each anchor date `t`, estimate the long-term trend causally from a
//!    trailing window of `T` years: `μ_t = (log p(t) − log p(t−T)) / T`.
//! 2. Build de-trended past/future log returns at horizons `(τ<, τ>)`:
//!    `x̃ = log p(t) − log p(t−τ<) − μ_t·τ<` and
//!    `ỹ = log p(t+τ>) − log p(t) − μ_t·τ>`. The future return is de-trended
//!    with the *same* causal `μ_t`, so no future data enters `x̃` or `μ_t`.
//! 3. Pool pairs across contracts and dates per `τ<` (overlapping anchors),
//!    normalize `x` and `y` to unit variance per sub-pool, drop outliers
//!    beyond the cut (in normalized units), and fit a linear and a cubic
//!    regression of `y` on `x`.
//!
//! Because both variables are normalized, the linear slope equals the
//! Pearson correlation of the pool. Overlapping anchor windows make the
//! naive OLS standard error an *understatement* of the true uncertainty;
//! the stderr is reported as-is and callers that need honest error bars
//! should aggregate per-contract (cluster) statistics instead.

mod pipeline;
mod series;

use chrono::NaiveDate;
use thiserror::Error;

use crate::units::Frequency;

pub use pipeline::{
    build_pairs, fit_cubic, fit_linear, long_trend, predictability_curve, CubicFit, CurveEntry,
    DetrendConfig, LinearFit, PredictabilityCurve, ReturnPair, DAILY_TAU_GRID, MONTHLY_TAU_GRID,
    MIN_PAIRS_CUBIC, MIN_PAIRS_LINEAR,
};
pub use series::{Observation, PriceSeries, SeriesKind};

/// Errors from series construction and the measurement pipeline.
#[derive(Debug, Error)]
pub enum EmpiricsError {
    /// A series has no observations.
    #[error("series '{symbol}' has no observations")]
    EmptySeries { symbol: String },
    /// A price is zero, negative, or non-finite (its log is required).
    #[error("series '{symbol}' has non-positive price {price} on {date}")]
    NonPositivePrice { symbol: String, date: NaiveDate, price: f64 },
    /// Observation dates are not strictly increasing.
    #[error("series '{symbol}' has non-increasing date order at {date}")]
    NonMonotonicDates { symbol: String, date: NaiveDate },
    /// The declared frequency disagrees with the median observation spacing.
    #[error(
        "series '{symbol}' declared {frequency} but median spacing is {median_days} calendar days"
    )]
    FrequencyInconsistent { symbol: String, frequency: Frequency, median_days: i64 },
    /// A configuration field is outside its domain.
    #[error("invalid config: {name} = {value} ({requirement})")]
    InvalidConfig { name: &'static str, value: f64, requirement: &'static str },
    /// Series of different frequencies were mixed in one pool.
    #[error("pool mixes frequencies: expected {expected}, found {found} in '{symbol}'")]
    MixedPoolFrequency { expected: Frequency, found: Frequency, symbol: String },
    /// The pool contains no series.
    #[error("empty pool: at least one price series is required")]
    EmptyPool,
    /// The τ< grid is empty.
    #[error("empty horizon grid: at least one tau_lt is required")]
    EmptyGrid,
    /// Too few pairs survived the outlier filter.
    #[error("insufficient data: need {needed} pairs after filtering, have {available}")]
    InsufficientData { needed: usize, available: usize },
    /// The regression design matrix is (near-)singular.
    #[error("degenerate design: {reason}")]
    DegenerateDesign { reason: &'static str },
    /// `long_trend` was asked about a date with no observation.
    #[error("no observation on {date} in series '{symbol}'")]
    NoObservation { symbol: String, date: NaiveDate },
    /// The trailing trend window reaches before the start of the series.
    #[error(
        "insufficient history in '{symbol}': no observation within tolerance of {window_years} \
         years before {date}"
    )]
    InsufficientHistory { symbol: String, date: NaiveDate, window_years: f64 },
}
