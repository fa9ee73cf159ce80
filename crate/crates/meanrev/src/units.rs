//! Unit conventions and time conversions.
//!
//! Every quantity inside the library is expressed in **years**. Inputs given
//! in trading days or months are converted at construction time using the
//! fixed conventions below, never downstream.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Trading days per year used for all day ↔ year conversions.
pub const TRADING_DAYS_PER_YEAR: f64 = 252.0;

/// Months per year used for all month ↔ year conversions.
pub const MONTHS_PER_YEAR: f64 = 12.0;

/// Mean calendar days per year (Gregorian), used only for date arithmetic
/// when a window expressed in years has to be located on a real calendar.
pub const CALENDAR_DAYS_PER_YEAR: f64 = 365.25;

/// Converts trading days to years.
pub fn years_from_trading_days(days: f64) -> f64 {
    days / TRADING_DAYS_PER_YEAR
}

/// Converts months to years.
pub fn years_from_months(months: f64) -> f64 {
    months / MONTHS_PER_YEAR
}

/// Sampling frequency of a price series.
///
/// The frequency fixes both the model step between consecutive observations
/// (`dt_years`) and the meaning of "native units" for horizons: trading days
/// for daily series, months for monthly series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frequency {
    Daily,
    Monthly,
}

impl Frequency {
    /// Observations per year: 252 for daily, 12 for monthly.
    pub fn steps_per_year(self) -> f64 {
        match self {
            Frequency::Daily => TRADING_DAYS_PER_YEAR,
            Frequency::Monthly => MONTHS_PER_YEAR,
        }
    }

    /// Model time between consecutive observations, in years.
    pub fn dt_years(self) -> f64 {
        1.0 / self.steps_per_year()
    }

    /// Converts a horizon in native units (trading days or months) to years.
    pub fn years_from_native(self, native: f64) -> f64 {
        native / self.steps_per_year()
    }

    /// Converts a horizon in years to native units (trading days or months).
    pub fn native_from_years(self, years: f64) -> f64 {
        years * self.steps_per_year()
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frequency::Daily => write!(f, "daily"),
            Frequency::Monthly => write!(f, "monthly"),
        }
    }
}

impl FromStr for Frequency {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "daily" | "d" => Ok(Frequency::Daily),
            "monthly" | "m" => Ok(Frequency::Monthly),
            other => Err(format!("unknown frequency '{other}' (expected daily or monthly)")),
        }
    }
}
