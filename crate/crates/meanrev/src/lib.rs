//! Trend/mean-reversion analytics for log-prices.
//!
//! The library implements a complete analysis stack for a mean-reverting
//! log-price model driven by trending noise:
//!
//! * [`model`] — closed-form analytics: the autocorrelation `C(u)` of the
//!   de-trended log-price, its covariance, the theoretical regression slope
//!   `s(τ<, τ>)` of future on past de-trended returns, the uncertainty band
//!   `Δ² = σ²(1 + g)`, and the mean-reversion time `T_MR`.
//! * [`sim`] — an exact-discretization Monte Carlo sampler for the same
//!   process (no Euler bias), with reproducible per-path random substreams.
//! * [`empirics`] — the measurement pipeline: causal de-trending of price
//!   series over a long window `T`, construction of normalized `(x, y)`
//!   past/future return pairs per horizon `τ<`, outlier filtering, and
//!   linear/cubic regression producing predictability curves.
//! * [`calibrate`] — weighted nonlinear least squares fitting of the model
//!   parameters `(g, κ, γ)` to an empirical predictability curve, plus a
//!   reporting step that derives the band and mean-reversion time.
//! * [`io`] — CSV/JSON readers and writers for price series, curves,
//!   calibration results, and reports, with byte-reproducible formatting.
//!
//! All internal times are measured in **years**; see [`units`] for the fixed
//! trading-day and month conversions.

pub mod calibrate;
pub mod empirics;
pub mod io;
pub mod model;
mod optim;
pub mod sim;
pub mod units;
