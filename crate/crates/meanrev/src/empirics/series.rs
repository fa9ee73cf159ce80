//! Validated price series.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::EmpiricsError;
use crate::units::Frequency;

/// Daily spacing must have a median of at most this many calendar days.
const DAILY_MAX_MEDIAN_DAYS: i64 = 4;

/// Monthly spacing must have a median within this inclusive range.
const MONTHLY_MEDIAN_DAYS: (i64, i64) = (25, 35);

/// What the series quotes. Metadata only: the pipeline treats both kinds
/// identically, the label just records the convention of the data source
/// (continuous futures chains are usually daily, long spot histories
/// monthly).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Spot,
    Future,
}

/// One timestamped price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub date: NaiveDate,
    pub price: f64,
}

/// An ordered, validated price history for one instrument at a fixed
/// sampling frequency.
///
/// Invariants (enforced at construction):
/// * at least one observation, dates strictly increasing;
/// * all prices strictly positive and finite (logs are taken downstream);
/// * the declared frequency is consistent with the median calendar spacing
///   (≤ 4 days for daily — weekends and holidays leave the median at one
///   day — and 25–35 days for monthly). Series with fewer than three
///   observations skip the spacing check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceSeries {
    symbol: String,
    frequency: Frequency,
    kind: SeriesKind,
    observations: Vec<Observation>,
}

impl PriceSeries {
    /// Builds a validated series.
    pub fn new(
        symbol: impl Into<String>,
        frequency: Frequency,
        kind: SeriesKind,
        observations: Vec<Observation>,
    ) -> Result<Self, EmpiricsError> {
        let symbol = symbol.into();
        if observations.is_empty() {
            return Err(EmpiricsError::EmptySeries { symbol });
        }
        for pair in observations.windows(2) {
            if pair[1].date <= pair[0].date {
                return Err(EmpiricsError::NonMonotonicDates {
                    symbol,
                    date: pair[1].date,
                });
            }
        }
        for obs in &observations {
            if !(obs.price > 0.0) || !obs.price.is_finite() {
                return Err(EmpiricsError::NonPositivePrice {
                    symbol,
                    date: obs.date,
                    price: obs.price,
                });
            }
        }
        if observations.len() >= 3 {
            let median = median_spacing_days(&observations);
            let ok = match frequency {
                Frequency::Daily => median <= DAILY_MAX_MEDIAN_DAYS,
                Frequency::Monthly => {
                    median >= MONTHLY_MEDIAN_DAYS.0 && median <= MONTHLY_MEDIAN_DAYS.1
                }
            };
            if !ok {
                return Err(EmpiricsError::FrequencyInconsistent {
                    symbol,
                    frequency,
                    median_days: median,
                });
            }
        }
        Ok(Self { symbol, frequency, kind, observations })
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn date(&self, index: usize) -> NaiveDate {
        self.observations[index].date
    }

    pub fn price(&self, index: usize) -> f64 {
        self.observations[index].price
    }

    pub fn log_price(&self, index: usize) -> f64 {
        self.observations[index].price.ln()
    }

    pub fn first_date(&self) -> NaiveDate {
        self.observations[0].date
    }

    pub fn last_date(&self) -> NaiveDate {
        self.observations[self.observations.len() - 1].date
    }

    /// Index of the observation exactly on `date`, if any.
    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.observations
            .binary_search_by_key(&date, |obs| obs.date)
            .ok()
    }

    /// Index of the latest observation on or before `date`, if any.
    pub fn index_at_or_before(&self, date: NaiveDate) -> Option<usize> {
        let n = self.observations.partition_point(|obs| obs.date <= date);
        n.checked_sub(1)
    }
}

fn median_spacing_days(observations: &[Observation]) -> i64 {
    let mut gaps: Vec<i64> = observations
        .windows(2)
        .map(|pair| (pair[1].date - pair[0].date).num_days())
        .collect();
    gaps.sort_unstable();
    gaps[gaps.len() / 2]
}
