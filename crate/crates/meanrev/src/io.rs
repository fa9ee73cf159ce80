//! File formats: price CSVs, curve CSVs/JSON, calibration and report JSON,
//! and simulated path dumps.
//!
//! All writers emit deterministic bytes for identical inputs: floats use
//! Rust's shortest round-trip decimal formatting, JSON is pretty-printed
//! with a trailing newline, and CSV rows follow input order.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::calibrate::CalibrationResult;
use crate::empirics::{
    CubicFit, CurveEntry, EmpiricsError, LinearFit, Observation, PredictabilityCurve, PriceSeries,
    SeriesKind,
};
use crate::calibrate::ReportSummary;
use crate::sim::SimOutput;
use crate::units::Frequency;

/// Expected header of a price CSV.
const PRICE_HEADER: [&str; 3] = ["date", "symbol", "price"];

/// Expected header of a predictability-curve CSV.
const CURVE_HEADER: [&str; 14] = [
    "tau_lt_native",
    "tau_lt_years",
    "n_raw",
    "n_kept",
    "slope",
    "slope_se",
    "c0",
    "c1",
    "c2",
    "c3",
    "se0",
    "se1",
    "se2",
    "se3",
];

/// Expected header of a theory-curve CSV.
const THEORY_HEADER: [&str; 5] =
    ["tau_lt_native", "tau_lt_years", "tau_gt_years", "slope", "autocorr"];

/// Header of a simulated-path dump.
const PATHS_HEADER: [&str; 4] = ["path_id", "step", "t_years", "pi"];

/// File-format and filesystem failures.
#[derive(Debug, Error)]
pub enum IoError {
    /// Underlying filesystem failure.
    #[error("{path}: {source}")]
    Io {
        /// File involved.
        path: PathBuf,
        /// OS error.
        #[source]
        source: std::io::Error,
    },
    /// Malformed CSV framing (unbalanced quotes, ragged rows, ...).
    #[error("{path}: {source}")]
    Csv {
        /// File involved.
        path: PathBuf,
        /// Parser error.
        #[source]
        source: csv::Error,
    },
    /// Malformed JSON.
    #[error("{path}: {source}")]
    Json {
        /// File involved.
        path: PathBuf,
        /// Parser error.
        #[source]
        source: serde_json::Error,
    },
    /// The file's header row is not the expected schema.
    #[error("{path}: expected header `{expected}`, found `{found}`")]
    Header {
        /// File involved.
        path: PathBuf,
        /// Schema the reader requires.
        expected: String,
        /// Header actually present.
        found: String,
    },
    /// A cell failed to parse.
    #[error("{path}:{line}: {message}")]
    Parse {
        /// File involved.
        path: PathBuf,
        /// 1-based line number.
        line: u64,
        /// What went wrong.
        message: String,
    },
    /// Prices must be strictly positive to have log returns.
    #[error("{path}:{line}: non-positive price {price} for {symbol}")]
    NonPositivePrice {
        /// File involved.
        path: PathBuf,
        /// 1-based line number.
        line: u64,
        /// Contract.
        symbol: String,
        /// Offending value.
        price: f64,
    },
    /// The same (symbol, date) appears twice.
    #[error("{path}: duplicate observation for {symbol} on {date}")]
    DuplicateObservation {
        /// File involved.
        path: PathBuf,
        /// Contract.
        symbol: String,
        /// Repeated date.
        date: NaiveDate,
    },
    /// Observation spacing matches neither daily nor monthly data.
    #[error(
        "{path}: {symbol} has median spacing {median_days} days; \
         expected daily (<= 4) or monthly (25-35)"
    )]
    AmbiguousFrequency {
        /// File involved.
        path: PathBuf,
        /// Contract.
        symbol: String,
        /// Median day gap between consecutive observations.
        median_days: f64,
    },
    /// The file holds no data rows.
    #[error("{path}: no data rows")]
    Empty {
        /// File involved.
        path: PathBuf,
    },
    /// Rows parsed but do not form a valid series.
    #[error("{path}: {source}")]
    Series {
        /// File involved.
        path: PathBuf,
        /// Validation failure.
        #[source]
        source: EmpiricsError,
    },
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> IoError + '_ {
    move |source| IoError::Csv { path: path.to_path_buf(), source }
}

fn check_header(path: &Path, found: &csv::StringRecord, expected: &[&str]) -> Result<(), IoError> {
    if found.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(IoError::Header {
            path: path.to_path_buf(),
            expected: expected.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    Ok(())
}

fn parse_cell<T: std::str::FromStr>(
    path: &Path,
    line: u64,
    field: &str,
    value: &str,
) -> Result<T, IoError> {
    value.trim().parse().map_err(|_| IoError::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("cannot parse {field} from `{value}`"),
    })
}

/// Median gap in days between consecutive (sorted) dates.
fn median_gap_days(dates: &[NaiveDate]) -> f64 {
    let mut gaps: Vec<i64> =
        dates.windows(2).map(|w| (w[1] - w[0]).num_days()).collect();
    gaps.sort_unstable();
    let n = gaps.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        gaps[n / 2] as f64
    } else {
        (gaps[n / 2 - 1] + gaps[n / 2]) as f64 / 2.0
    }
}

/// Reads a `date,symbol,price` CSV into one series per symbol.
///
/// Rows may arrive in any order; each symbol's rows are sorted by date.
/// The observation frequency is inferred per symbol from the median date
/// gap (daily up to 4 days, monthly 25–35 days; a single-row series
/// defaults to daily). Daily series are tagged futures, monthly spots.
/// Symbols come back in alphabetical order.
pub fn read_price_csv(path: &Path) -> Result<Vec<PriceSeries>, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(csv_err(path))?;
    check_header(path, reader.headers().map_err(csv_err(path))?, &PRICE_HEADER)?;

    let mut by_symbol: std::collections::BTreeMap<String, Vec<(NaiveDate, f64, u64)>> =
        std::collections::BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(csv_err(path))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 3 {
            return Err(IoError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected 3 fields, found {}", row.len()),
            });
        }
        let date: NaiveDate = parse_cell(path, line, "date", &row[0])?;
        let symbol = row[1].trim().to_string();
        if symbol.is_empty() {
            return Err(IoError::Parse {
                path: path.to_path_buf(),
                line,
                message: "empty symbol".to_string(),
            });
        }
        let price: f64 = parse_cell(path, line, "price", &row[2])?;
        if !price.is_finite() || price <= 0.0 {
            return Err(IoError::NonPositivePrice {
                path: path.to_path_buf(),
                line,
                symbol,
                price,
            });
        }
        by_symbol.entry(symbol).or_default().push((date, price, line));
    }
    if by_symbol.is_empty() {
        return Err(IoError::Empty { path: path.to_path_buf() });
    }

    let mut pool = Vec::with_capacity(by_symbol.len());
    for (symbol, mut rows) in by_symbol {
        rows.sort_by_key(|&(date, _, _)| date);
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(IoError::DuplicateObservation {
                path: path.to_path_buf(),
                symbol,
                date: w[0].0,
            });
        }
        let dates: Vec<NaiveDate> = rows.iter().map(|r| r.0).collect();
        let median = median_gap_days(&dates);
        let frequency = if rows.len() < 2 || median <= 4.0 {
            Frequency::Daily
        } else if (25.0..=35.0).contains(&median) {
            Frequency::Monthly
        } else {
            return Err(IoError::AmbiguousFrequency {
                path: path.to_path_buf(),
                symbol,
                median_days: median,
            });
        };
        let kind = match frequency {
            Frequency::Daily => SeriesKind::Future,
            Frequency::Monthly => SeriesKind::Spot,
        };
        let observations =
            rows.into_iter().map(|(date, price, _)| Observation { date, price }).collect();
        let series = PriceSeries::new(&symbol, frequency, kind, observations)
            .map_err(|source| IoError::Series { path: path.to_path_buf(), source })?;
        pool.push(series);
    }
    Ok(pool)
}

/// Writes a pool in the `date,symbol,price` schema, series in input order.
pub fn write_price_csv(path: &Path, pool: &[PriceSeries]) -> Result<(), IoError> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_err(path))?;
    writer.write_record(PRICE_HEADER).map_err(csv_err(path))?;
    for series in pool {
        for obs in series.observations() {
            writer
                .write_record([
                    obs.date.to_string(),
                    series.symbol().to_string(),
                    obs.price.to_string(),
                ])
                .map_err(csv_err(path))?;
        }
    }
    writer.flush().map_err(io_err(path))?;
    Ok(())
}

fn opt_cell(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes a predictability curve as CSV; entries without a fit leave the
/// corresponding cells empty.
pub fn write_curve_csv(path: &Path, curve: &PredictabilityCurve) -> Result<(), IoError> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_err(path))?;
    writer.write_record(CURVE_HEADER).map_err(csv_err(path))?;
    for e in &curve.entries {
        let linear = e.linear;
        let cubic = e.cubic;
        let mut record = vec![
            e.tau_lt_native.to_string(),
            e.tau_lt_years.to_string(),
            e.n_raw.to_string(),
            e.n_kept.to_string(),
            opt_cell(linear.map(|l| l.slope)),
            opt_cell(linear.map(|l| l.stderr)),
        ];
        for i in 0..4 {
            record.push(opt_cell(cubic.map(|c| c.coeffs[i])));
        }
        for i in 0..4 {
            record.push(opt_cell(cubic.map(|c| c.stderrs[i])));
        }
        writer.write_record(&record).map_err(csv_err(path))?;
    }
    writer.flush().map_err(io_err(path))?;
    Ok(())
}

fn opt_group<const N: usize>(
    path: &Path,
    line: u64,
    fields: [(&str, &str); N],
) -> Result<Option<[f64; N]>, IoError> {
    let empties = fields.iter().filter(|(_, v)| v.trim().is_empty()).count();
    if empties == N {
        return Ok(None);
    }
    if empties != 0 {
        return Err(IoError::Parse {
            path: path.to_path_buf(),
            line,
            message: format!(
                "fields {} must be all present or all empty",
                fields.iter().map(|(n, _)| *n).collect::<Vec<_>>().join("/")
            ),
        });
    }
    let mut out = [0.0; N];
    for (slot, (name, value)) in out.iter_mut().zip(fields) {
        *slot = parse_cell(path, line, name, value)?;
    }
    Ok(Some(out))
}

/// Reads a curve CSV written by [`write_curve_csv`].
///
/// The native unit is recovered from the `tau_lt_native`/`tau_lt_years`
/// ratio (≈252 for daily, ≈12 for monthly).
pub fn read_curve_csv(path: &Path) -> Result<PredictabilityCurve, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(csv_err(path))?;
    check_header(path, reader.headers().map_err(csv_err(path))?, &CURVE_HEADER)?;

    let mut frequency: Option<Frequency> = None;
    let mut entries = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_err(path))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != CURVE_HEADER.len() {
            return Err(IoError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected {} fields, found {}", CURVE_HEADER.len(), row.len()),
            });
        }
        let tau_lt_native: f64 = parse_cell(path, line, "tau_lt_native", &row[0])?;
        let tau_lt_years: f64 = parse_cell(path, line, "tau_lt_years", &row[1])?;
        let n_raw: usize = parse_cell(path, line, "n_raw", &row[2])?;
        let n_kept: usize = parse_cell(path, line, "n_kept", &row[3])?;

        if frequency.is_none() {
            let per_year = tau_lt_native / tau_lt_years;
            frequency = Some(if (per_year - 252.0).abs() <= 25.0 {
                Frequency::Daily
            } else if (per_year - 12.0).abs() <= 2.0 {
                Frequency::Monthly
            } else {
                return Err(IoError::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!(
                        "cannot infer native unit from {per_year:.2} steps per year"
                    ),
                });
            });
        }

        let linear = opt_group(path, line, [("slope", &row[4]), ("slope_se", &row[5])])?
            .map(|[slope, stderr]| LinearFit { slope, stderr, n_kept });
        let cubic = opt_group(
            path,
            line,
            [
                ("c0", &row[6]),
                ("c1", &row[7]),
                ("c2", &row[8]),
                ("c3", &row[9]),
                ("se0", &row[10]),
                ("se1", &row[11]),
                ("se2", &row[12]),
                ("se3", &row[13]),
            ],
        )?
        .map(|v| CubicFit {
            coeffs: [v[0], v[1], v[2], v[3]],
            stderrs: [v[4], v[5], v[6], v[7]],
            n_kept,
        });
        entries.push(CurveEntry { tau_lt_native, tau_lt_years, n_raw, n_kept, linear, cubic });
    }
    let frequency = frequency.ok_or_else(|| IoError::Empty { path: path.to_path_buf() })?;
    Ok(PredictabilityCurve { frequency, entries })
}

/// A theoretical slope/autocorrelation sample point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryRow {
    /// Past horizon in native units.
    pub tau_lt_native: f64,
    /// Past horizon in years.
    pub tau_lt_years: f64,
    /// Future horizon in years.
    pub tau_gt_years: f64,
    /// Theoretical regression slope for this horizon pair.
    pub slope: f64,
    /// Autocorrelation `C(τ<)` of the de-trended log price.
    pub autocorr: f64,
}

/// Writes theoretical curve samples as CSV.
pub fn write_theory_csv(path: &Path, rows: &[TheoryRow]) -> Result<(), IoError> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_err(path))?;
    writer.write_record(THEORY_HEADER).map_err(csv_err(path))?;
    for r in rows {
        writer
            .write_record([
                r.tau_lt_native.to_string(),
                r.tau_lt_years.to_string(),
                r.tau_gt_years.to_string(),
                r.slope.to_string(),
                r.autocorr.to_string(),
            ])
            .map_err(csv_err(path))?;
    }
    writer.flush().map_err(io_err(path))?;
    Ok(())
}

/// Dumps every simulated path as `path_id,step,t_years,pi` rows.
pub fn write_paths_csv(path: &Path, output: &SimOutput) -> Result<(), IoError> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_err(path))?;
    writer.write_record(PATHS_HEADER).map_err(csv_err(path))?;
    let dt = output.config.dt;
    for (path_id, pi) in output.paths.iter().enumerate() {
        for (step, value) in pi.iter().enumerate() {
            writer
                .write_record([
                    path_id.to_string(),
                    step.to_string(),
                    (step as f64 * dt).to_string(),
                    value.to_string(),
                ])
                .map_err(csv_err(path))?;
        }
    }
    writer.flush().map_err(io_err(path))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|source| IoError::Json { path: path.to_path_buf(), source })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| IoError::Json { path: path.to_path_buf(), source })
}

/// Writes a predictability curve as pretty JSON.
pub fn write_curve_json(path: &Path, curve: &PredictabilityCurve) -> Result<(), IoError> {
    write_json(path, curve)
}

/// Reads a JSON predictability curve.
pub fn read_curve_json(path: &Path) -> Result<PredictabilityCurve, IoError> {
    read_json(path)
}

/// Writes a calibration result as pretty JSON.
pub fn write_calibration_json(path: &Path, result: &CalibrationResult) -> Result<(), IoError> {
    write_json(path, result)
}

/// Reads a JSON calibration result.
pub fn read_calibration_json(path: &Path) -> Result<CalibrationResult, IoError> {
    read_json(path)
}

/// Writes a band report as pretty JSON.
pub fn write_report_json(path: &Path, report: &ReportSummary) -> Result<(), IoError> {
    write_json(path, report)
}
