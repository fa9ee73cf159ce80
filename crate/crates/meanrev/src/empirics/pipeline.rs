//! De-trended return pairs and predictability regressions.

use std::sync::Arc;

use chrono::{Days, NaiveDate};
use nalgebra::{Matrix4, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EmpiricsError, PriceSeries};
use crate::units::{Frequency, CALENDAR_DAYS_PER_YEAR};

/// Default past-horizon grid for daily pools, in trading days.
pub const DAILY_TAU_GRID: [f64; 10] =
    [10.0, 20.0, 40.0, 80.0, 160.0, 320.0, 480.0, 640.0, 960.0, 1280.0];

/// Default past-horizon grid for monthly pools, in months.
pub const MONTHLY_TAU_GRID: [f64; 9] = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0, 60.0];

/// Minimum pairs (after outlier filtering) for a linear fit.
pub const MIN_PAIRS_LINEAR: usize = 10;

/// Minimum pairs (after outlier filtering) for a cubic fit.
pub const MIN_PAIRS_CUBIC: usize = 20;

/// A sub-pool whose raw-return standard deviation falls below this is
/// degenerate (e.g. an exactly linear log-price); its normalized values are
/// emitted as zeros.
const DEGENERATE_STD: f64 = 1e-10;

/// Calendar-day slack allowed when locating the observation nearest to (and
/// not after) `t − T`: five trading days for daily data (spanning weekends
/// and odd holidays) and one month for monthly data.
const TREND_TOLERANCE_DAYS: (i64, i64) = (9, 35);

/// Configuration of the de-trending and pooling stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetrendConfig {
    /// Long-trend window `T` in years.
    pub t_years: f64,
    /// Past horizons `τ<` in native units (trading days for daily series,
    /// months for monthly series).
    pub tau_lt_grid: Vec<f64>,
    /// Future/past horizon ratio `a = τ>/τ<`, `0 < a ≤ 1`.
    pub ratio: f64,
    /// Outlier threshold on |x| and |y| in normalized units.
    pub outlier_cut: f64,
    /// When true (default), anchors without the full `T` window are skipped;
    /// when false, the window shrinks to the available history (exploratory
    /// use), never below `τ< + τ>`.
    pub min_history: bool,
    /// Normalize per contract instead of per pooled sub-pool (off by
    /// default: the regression is fit on the pooled sub-pool, so that is
    /// where unit variance is imposed).
    pub normalize_per_symbol: bool,
}

impl DetrendConfig {
    /// Standard defaults for daily pools: `T = 20` years, the 10…1280
    /// trading-day grid, `τ> = τ</5`, outliers beyond 4σ dropped.
    pub fn default_daily() -> Self {
        Self {
            t_years: 20.0,
            tau_lt_grid: DAILY_TAU_GRID.to_vec(),
            ratio: 0.2,
            outlier_cut: 4.0,
            min_history: true,
            normalize_per_symbol: false,
        }
    }

    /// Defaults for monthly pools: the 5…60 month grid, other settings as
    /// [`DetrendConfig::default_daily`].
    pub fn default_monthly() -> Self {
        Self {
            tau_lt_grid: MONTHLY_TAU_GRID.to_vec(),
            ..Self::default_daily()
        }
    }

    /// Domain checks; `frequency` fixes the native-unit conversion of the
    /// grid for the `T > max(τ<)·(1 + ratio)` constraint.
    pub fn validate(&self, frequency: Frequency) -> Result<(), EmpiricsError> {
        if !(self.ratio > 0.0 && self.ratio <= 1.0) {
            return Err(EmpiricsError::InvalidConfig {
                name: "ratio",
                value: self.ratio,
                requirement: "must satisfy 0 < ratio <= 1",
            });
        }
        if !(self.t_years > 0.0) || !self.t_years.is_finite() {
            return Err(EmpiricsError::InvalidConfig {
                name: "t_years",
                value: self.t_years,
                requirement: "must be finite and > 0",
            });
        }
        if !(self.outlier_cut > 0.0) {
            return Err(EmpiricsError::InvalidConfig {
                name: "outlier_cut",
                value: self.outlier_cut,
                requirement: "must be > 0",
            });
        }
        for &tau in &self.tau_lt_grid {
            if !(tau >= 1.0) || !tau.is_finite() {
                return Err(EmpiricsError::InvalidConfig {
                    name: "tau_lt_grid",
                    value: tau,
                    requirement: "horizons must be finite and >= 1 native unit",
                });
            }
            let tau_years = frequency.years_from_native(tau);
            if self.t_years <= tau_years * (1.0 + self.ratio) {
                return Err(EmpiricsError::InvalidConfig {
                    name: "t_years",
                    value: self.t_years,
                    requirement: "must exceed max(tau_lt) * (1 + ratio) in years",
                });
            }
        }
        Ok(())
    }
}

/// One normalized de-trended (past, future) return observation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPair {
    /// Normalized de-trended past return.
    pub x: f64,
    /// Normalized de-trended future return.
    pub y: f64,
    /// Contract the pair came from.
    pub symbol: Arc<str>,
    /// Anchor date `t`.
    pub t: NaiveDate,
}

/// Result of a linear fit of `y` on `x` (with intercept).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    /// Regression slope (equals the Pearson correlation on unit-variance
    /// pools).
    pub slope: f64,
    /// Naive OLS standard error of the slope. Overlapping anchor windows
    /// autocorrelate residuals, so this understates the true uncertainty;
    /// it is reported uncorrected.
    pub stderr: f64,
    /// Pairs kept by the outlier filter.
    pub n_kept: usize,
}

/// Result of a cubic fit `y = c0 + c1·x + c2·x² + c3·x³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicFit {
    /// Coefficients `(c0, c1, c2, c3)`.
    pub coeffs: [f64; 4],
    /// Naive OLS standard errors of the coefficients (same overlap caveat
    /// as [`LinearFit::stderr`]).
    pub stderrs: [f64; 4],
    /// Pairs kept by the outlier filter.
    pub n_kept: usize,
}

/// Per-`τ<` regression statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveEntry {
    /// Past horizon in native units (trading days or months).
    pub tau_lt_native: f64,
    /// Past horizon in years.
    pub tau_lt_years: f64,
    /// Pairs built before outlier filtering.
    pub n_raw: usize,
    /// Pairs surviving the outlier filter.
    pub n_kept: usize,
    /// Linear fit, absent when the entry had insufficient or degenerate
    /// data.
    pub linear: Option<LinearFit>,
    /// Cubic fit, absent when the entry had insufficient or degenerate
    /// data.
    pub cubic: Option<CubicFit>,
}

impl CurveEntry {
    /// An entry with no usable fit.
    pub fn is_empty(&self) -> bool {
        self.linear.is_none() && self.cubic.is_none()
    }
}

/// Regression statistics per past horizon: the object plotted as a
/// predictability curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictabilityCurve {
    /// Frequency of the pool the curve was measured on.
    pub frequency: Frequency,
    /// One entry per `τ<` in the configured grid, in grid order.
    pub entries: Vec<CurveEntry>,
}

impl PredictabilityCurve {
    /// True when no grid entry produced a fit (e.g. constant prices or far
    /// too little history).
    pub fn all_empty(&self) -> bool {
        self.entries.iter().all(CurveEntry::is_empty)
    }

    /// Number of entries with a linear fit.
    pub fn fitted_len(&self) -> usize {
        self.entries.iter().filter(|e| e.linear.is_some()).count()
    }
}

/// Calendar target `t − years`, via the mean Gregorian year length.
fn date_minus_years(t: NaiveDate, years: f64) -> NaiveDate {
    let days = (years * CALENDAR_DAYS_PER_YEAR).round() as i64;
    t - Days::new(days.max(0) as u64)
}

fn trend_tolerance_days(frequency: Frequency) -> i64 {
    match frequency {
        Frequency::Daily => TREND_TOLERANCE_DAYS.0,
        Frequency::Monthly => TREND_TOLERANCE_DAYS.1,
    }
}

/// Index of the observation used as the start of a `window_years` trailing
/// window anchored at observation `i`, if one exists within tolerance.
fn trend_window_start(series: &PriceSeries, i: usize, window_years: f64) -> Option<usize> {
    let target = date_minus_years(series.date(i), window_years);
    let j = series.index_at_or_before(target)?;
    let slack = (target - series.date(j)).num_days();
    (slack <= trend_tolerance_days(series.frequency())).then_some(j)
}

/// Long-term trend `μ_t = (log p(t) − log p(t−T)) / T` (per year).
///
/// `t` must be an observation date. The window start is the nearest
/// observation at or before `t − T`, within a tolerance of five trading
/// days (daily) or one month (monthly); the divisor stays the nominal `T`.
pub fn long_trend(
    series: &PriceSeries,
    t: NaiveDate,
    t_years: f64,
) -> Result<f64, EmpiricsError> {
    if !(t_years > 0.0) || !t_years.is_finite() {
        return Err(EmpiricsError::InvalidConfig {
            name: "t_years",
            value: t_years,
            requirement: "must be finite and > 0",
        });
    }
    let i = series.index_of(t).ok_or_else(|| EmpiricsError::NoObservation {
        symbol: series.symbol().to_string(),
        date: t,
    })?;
    let j = trend_window_start(series, i, t_years).ok_or_else(|| {
        EmpiricsError::InsufficientHistory {
            symbol: series.symbol().to_string(),
            date: t,
            window_years: t_years,
        }
    })?;
    Ok((series.log_price(i) - series.log_price(j)) / t_years)
}

/// Raw (un-normalized) de-trended return pair at one anchor.
struct RawPair {
    series_idx: usize,
    t: NaiveDate,
    x: f64,
    y: f64,
}

/// The trend estimate for anchor `i`, honoring the `min_history` policy.
///
/// Returns `None` when the anchor must be skipped.
fn trend_at_anchor(
    series: &PriceSeries,
    i: usize,
    cfg: &DetrendConfig,
    min_span_years: f64,
) -> Option<f64> {
    if cfg.min_history {
        let j = trend_window_start(series, i, cfg.t_years)?;
        return Some((series.log_price(i) - series.log_price(j)) / cfg.t_years);
    }
    let elapsed_years =
        (series.date(i) - series.first_date()).num_days() as f64 / CALENDAR_DAYS_PER_YEAR;
    if elapsed_years >= cfg.t_years {
        let j = trend_window_start(series, i, cfg.t_years)?;
        Some((series.log_price(i) - series.log_price(j)) / cfg.t_years)
    } else {
        // Shrink the window to the history available, but keep it at least
        // as long as the return horizons it de-trends.
        if elapsed_years < min_span_years || elapsed_years <= 0.0 {
            return None;
        }
        Some((series.log_price(i) - series.log_price(0)) / elapsed_years)
    }
}

/// Builds the normalized de-trended return pool for one past horizon.
///
/// `tau_lt` is in native units (trading days for daily pools, months for
/// monthly). Horizons step in whole observations: `τ<` rounds to the
/// nearest observation count and `τ> = max(1, round(τ<·ratio))`. Anchors
/// step one observation at a time (overlapping windows), each requiring the
/// full backward (`T`, `τ<`) and forward (`τ>`) windows.
///
/// Normalization divides by the sub-pool sample standard deviation (per
/// symbol when `normalize_per_symbol` is set). A degenerate sub-pool
/// (standard deviation below `1e−10`, e.g. an exactly linear log-price) has
/// its values emitted as zeros; downstream fits then report a degenerate
/// design rather than NaNs.
///
/// An empty result is not an error: it simply means no anchor qualified.
pub fn build_pairs(
    pool: &[PriceSeries],
    cfg: &DetrendConfig,
    tau_lt: f64,
) -> Result<Vec<ReturnPair>, EmpiricsError> {
    let frequency = pool_frequency(pool)?;
    cfg.validate(frequency)?;
    if !(tau_lt >= 1.0) || !tau_lt.is_finite() {
        return Err(EmpiricsError::InvalidConfig {
            name: "tau_lt",
            value: tau_lt,
            requirement: "must be finite and >= 1 native unit",
        });
    }

    let lt_steps = tau_lt.round().max(1.0) as usize;
    let gt_steps = ((tau_lt * cfg.ratio).round() as usize).max(1);
    let lt_years = frequency.years_from_native(lt_steps as f64);
    let gt_years = frequency.years_from_native(gt_steps as f64);
    let min_span_years = lt_years + gt_years;

    let mut raw: Vec<RawPair> = Vec::new();
    for (series_idx, series) in pool.iter().enumerate() {
        let n = series.len();
        if n < lt_steps + gt_steps + 1 {
            continue;
        }
        for i in lt_steps..(n - gt_steps) {
            let Some(mu) = trend_at_anchor(series, i, cfg, min_span_years) else {
                continue;
            };
            let l_t = series.log_price(i);
            let x = l_t - series.log_price(i - lt_steps) - mu * lt_years;
            let y = series.log_price(i + gt_steps) - l_t - mu * gt_years;
            raw.push(RawPair { series_idx, t: series.date(i), x, y });
        }
    }
    if raw.is_empty() {
        return Ok(Vec::new());
    }

    let symbols: Vec<Arc<str>> = pool.iter().map(|s| Arc::from(s.symbol())).collect();
    let scale = |values: &[f64]| -> f64 {
        let sd = sample_std(values);
        if sd < DEGENERATE_STD {
            0.0
        } else {
            1.0 / sd
        }
    };

    let pairs = if cfg.normalize_per_symbol {
        let mut pairs = Vec::with_capacity(raw.len());
        for idx in 0..pool.len() {
            let xs: Vec<f64> =
                raw.iter().filter(|r| r.series_idx == idx).map(|r| r.x).collect();
            if xs.is_empty() {
                continue;
            }
            let ys: Vec<f64> =
                raw.iter().filter(|r| r.series_idx == idx).map(|r| r.y).collect();
            let (sx, sy) = (scale(&xs), scale(&ys));
            pairs.extend(raw.iter().filter(|r| r.series_idx == idx).map(|r| ReturnPair {
                x: r.x * sx,
                y: r.y * sy,
                symbol: Arc::clone(&symbols[r.series_idx]),
                t: r.t,
            }));
        }
        pairs
    } else {
        let xs: Vec<f64> = raw.iter().map(|r| r.x).collect();
        let ys: Vec<f64> = raw.iter().map(|r| r.y).collect();
        let (sx, sy) = (scale(&xs), scale(&ys));
        raw.iter()
            .map(|r| ReturnPair {
                x: r.x * sx,
                y: r.y * sy,
                symbol: Arc::clone(&symbols[r.series_idx]),
                t: r.t,
            })
            .collect()
    };
    Ok(pairs)
}

fn pool_frequency(pool: &[PriceSeries]) -> Result<Frequency, EmpiricsError> {
    let first = pool.first().ok_or(EmpiricsError::EmptyPool)?;
    let expected = first.frequency();
    for series in pool {
        if series.frequency() != expected {
            return Err(EmpiricsError::MixedPoolFrequency {
                expected,
                found: series.frequency(),
                symbol: series.symbol().to_string(),
            });
        }
    }
    Ok(expected)
}

/// Sample standard deviation (n−1 denominator) around the mean.
fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (ss / (n - 1.0)).sqrt()
}

fn filtered(pairs: &[ReturnPair], cut: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    pairs
        .iter()
        .filter(move |p| p.x.abs() <= cut && p.y.abs() <= cut)
        .map(|p| (p.x, p.y))
}

/// Ordinary least squares of `y` on `x` with intercept, after dropping
/// pairs with `|x| > cut` or `|y| > cut`.
pub fn fit_linear(pairs: &[ReturnPair], outlier_cut: f64) -> Result<LinearFit, EmpiricsError> {
    let kept: Vec<(f64, f64)> = filtered(pairs, outlier_cut).collect();
    let n = kept.len();
    if n < MIN_PAIRS_LINEAR {
        return Err(EmpiricsError::InsufficientData { needed: MIN_PAIRS_LINEAR, available: n });
    }
    let nf = n as f64;
    let mean_x = kept.iter().map(|(x, _)| x).sum::<f64>() / nf;
    let mean_y = kept.iter().map(|(_, y)| y).sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in &kept {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= nf * DEGENERATE_STD * DEGENERATE_STD {
        return Err(EmpiricsError::DegenerateDesign { reason: "x has (near-)zero variance" });
    }
    let slope = sxy / sxx;
    let sse = (syy - slope * sxy).max(0.0);
    let stderr = (sse / ((nf - 2.0) * sxx)).sqrt();
    Ok(LinearFit { slope, stderr, n_kept: n })
}

/// OLS cubic fit `y = c0 + c1·x + c2·x² + c3·x³` via the 4×4 normal
/// equations, after the same outlier filter as [`fit_linear`].
pub fn fit_cubic(pairs: &[ReturnPair], outlier_cut: f64) -> Result<CubicFit, EmpiricsError> {
    let kept: Vec<(f64, f64)> = filtered(pairs, outlier_cut).collect();
    let n = kept.len();
    if n < MIN_PAIRS_CUBIC {
        return Err(EmpiricsError::InsufficientData { needed: MIN_PAIRS_CUBIC, available: n });
    }
    // A cubic design needs genuine spread in x; without it the normal
    // matrix is singular in ways floating-point Cholesky may not detect.
    let nf = n as f64;
    let mean_x = kept.iter().map(|(x, _)| x).sum::<f64>() / nf;
    let sxx = kept.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum::<f64>();
    if sxx <= nf * DEGENERATE_STD * DEGENERATE_STD {
        return Err(EmpiricsError::DegenerateDesign { reason: "x has (near-)zero variance" });
    }
    let mut xtx = Matrix4::<f64>::zeros();
    let mut xty = Vector4::<f64>::zeros();
    for &(x, y) in &kept {
        let v = Vector4::new(1.0, x, x * x, x * x * x);
        xtx += v * v.transpose();
        xty += v * y;
    }
    let chol = nalgebra::Cholesky::new(xtx)
        .ok_or(EmpiricsError::DegenerateDesign { reason: "singular cubic design matrix" })?;
    let beta = chol.solve(&xty);
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(EmpiricsError::DegenerateDesign { reason: "singular cubic design matrix" });
    }
    let mut sse = 0.0;
    for &(x, y) in &kept {
        let fitted = beta[0] + beta[1] * x + beta[2] * x * x + beta[3] * x * x * x;
        let r = y - fitted;
        sse += r * r;
    }
    let sigma2 = (sse / (n as f64 - 4.0)).max(0.0);
    let cov = chol.inverse() * sigma2;
    let stderrs = std::array::from_fn(|i| cov[(i, i)].max(0.0).sqrt());
    Ok(CubicFit { coeffs: [beta[0], beta[1], beta[2], beta[3]], stderrs, n_kept: n })
}

/// Runs the full pipeline over the configured `τ<` grid.
///
/// Grid entries with insufficient or degenerate data are present but carry
/// no fits ([`CurveEntry::is_empty`]); an all-empty curve is still `Ok` —
/// callers decide whether that is a warning (plotting) or fatal
/// (calibration needs at least 4 fitted entries). Entries are computed in
/// parallel; the result is independent of scheduling.
pub fn predictability_curve(
    pool: &[PriceSeries],
    cfg: &DetrendConfig,
) -> Result<PredictabilityCurve, EmpiricsError> {
    let frequency = pool_frequency(pool)?;
    cfg.validate(frequency)?;
    if cfg.tau_lt_grid.is_empty() {
        return Err(EmpiricsError::EmptyGrid);
    }
    let entries: Vec<CurveEntry> = cfg
        .tau_lt_grid
        .par_iter()
        .map(|&tau_lt| {
            let pairs = build_pairs(pool, cfg, tau_lt).unwrap_or_default();
            let n_raw = pairs.len();
            let n_kept = filtered(&pairs, cfg.outlier_cut).count();
            CurveEntry {
                tau_lt_native: tau_lt,
                tau_lt_years: frequency.years_from_native(tau_lt.round().max(1.0)),
                n_raw,
                n_kept,
                linear: fit_linear(&pairs, cfg.outlier_cut).ok(),
                cubic: fit_cubic(&pairs, cfg.outlier_cut).ok(),
            }
        })
        .collect();
    Ok(PredictabilityCurve { frequency, entries })
}
