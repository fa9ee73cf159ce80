//! Nonlinear least-squares calibration of the model to a predictability
//! curve, and the derived band/time-scale report.
//!
//! The regression slope curve is scale-free in `σ²`, so calibration fits
//! `(g, κ, γ)` only; `σ²` is carried through from the initial guess and the
//! report infers the band width from a short-horizon volatility instead.
//!
//! The loss surface has long curved valleys (near-degenerate directions
//! where a larger `g` trades off against a slower trend), so the minimizer
//! is a bounded Nelder–Mead restarted from the corners of the parameter box
//! in log-space, plus the caller's initial guess, followed by polish
//! restarts around the incumbent.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::empirics::PredictabilityCurve;
use crate::model::{
    black_band, slope_theory, slope_zero_crossing, BandReport, HorizonPair, ModelError,
    ProcessParams,
};
use crate::optim::{minimize_bounded, Bounds3};

/// Minimum fitted curve entries required to identify three shape
/// parameters.
pub const MIN_CURVE_POINTS: usize = 4;

/// Lower bound used for `g` in log-space when the caller's bound is 0:
/// `g = 1e-4` is indistinguishable from no trend at curve precision.
const G_LOG_FLOOR: f64 = 1e-4;

/// Reported slope standard errors below this are floored before weighting,
/// so an exactly-fit synthetic curve cannot produce infinite weights.
const SE_FLOOR: f64 = 1e-6;

/// Nelder–Mead budget per start.
const MAX_ITER: usize = 2000;

/// Convergence threshold on the simplex diameter in log-parameter space.
const DIAM_TOL: f64 = 1e-9;

/// Fractional inset of the lattice starts from the box corners.
const CORNER_INSET: f64 = 0.02;

/// Initial simplex spread (radians of the bounding transform) for lattice
/// starts and for polish restarts.
const START_SPREAD: f64 = 0.05;
const POLISH_SPREAD: f64 = 0.01;

/// Polish restarts around the incumbent minimum.
const POLISH_ROUNDS: usize = 2;

/// Calibration failures.
#[derive(Debug, Error)]
pub enum CalibrateError {
    /// Too few fitted curve entries.
    #[error("calibration needs at least {MIN_CURVE_POINTS} fitted curve points, got {available}")]
    InsufficientCurve {
        /// Entries carrying a linear fit.
        available: usize,
    },
    /// The optimizer did not converge; derived reports would not be
    /// trustworthy.
    #[error("calibration did not converge")]
    NotConverged,
    /// Invalid parameters or horizons.
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// How curve points are weighted in the least-squares loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// Inverse squared reported standard errors (floored at `1e-6`).
    Stderr,
    /// Equal weights.
    Uniform,
}

/// Box constraints for the three shape parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    /// Trend variance ratio `g` (dimensionless).
    pub g: (f64, f64),
    /// Reversion rate `κ` in 1/years.
    pub kappa: (f64, f64),
    /// Trend decay rate `γ` in 1/years.
    pub gamma: (f64, f64),
}

impl Default for ParamBounds {
    /// Mean reversion between one week and a century, trend memory between
    /// a trading day and a century: generous enough for any market in the
    /// study.
    fn default() -> Self {
        Self { g: (0.0, 10.0), kappa: (0.01, 52.0), gamma: (0.01, 252.0) }
    }
}

impl ParamBounds {
    fn validate(&self) -> Result<(), ModelError> {
        for (name, (lo, hi)) in
            [("g", self.g), ("kappa", self.kappa), ("gamma", self.gamma)]
        {
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
                return Err(ModelError::InvalidParameter {
                    name,
                    value: hi,
                    requirement: "bounds must be finite with 0 <= lo < hi",
                });
            }
        }
        if self.kappa.0 <= 0.0 || self.gamma.0 <= 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "bounds",
                value: 0.0,
                requirement: "rate lower bounds must be > 0",
            });
        }
        Ok(())
    }

    fn log_bounds(&self) -> Bounds3 {
        Bounds3 {
            lo: [self.g.0.max(G_LOG_FLOOR).ln(), self.kappa.0.ln(), self.gamma.0.ln()],
            hi: [self.g.1.ln(), self.kappa.1.ln(), self.gamma.1.ln()],
        }
    }
}

/// A calibration task: curve data plus optimization settings.
#[derive(Debug, Clone)]
pub struct CalibrationProblem {
    /// The measured predictability curve.
    pub curve: PredictabilityCurve,
    /// Future/past horizon ratio the curve was built with.
    pub ratio: f64,
    /// Parameter box.
    pub bounds: ParamBounds,
    /// Initial guess; also supplies the `σ²` carried into the result.
    pub init: ProcessParams,
    /// Point weighting.
    pub weight_mode: WeightMode,
}

impl CalibrationProblem {
    /// A problem with default bounds, standard-error weights, and the
    /// published futures parameters as the initial guess.
    pub fn new(curve: PredictabilityCurve, ratio: f64) -> Self {
        Self {
            curve,
            ratio,
            bounds: ParamBounds::default(),
            init: ProcessParams::futures_benchmark(),
            weight_mode: WeightMode::Stderr,
        }
    }
}

/// One curve point with its fitted counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualPoint {
    /// Past horizon in native units.
    pub tau_lt_native: f64,
    /// Past horizon in years.
    pub tau_lt_years: f64,
    /// Measured slope.
    pub empirical: f64,
    /// Model slope at the calibrated parameters.
    pub fitted: f64,
    /// Reported standard error of the measured slope.
    pub stderr: f64,
}

/// Output of [`calibrate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    /// Calibrated parameters (`σ²` copied from the initial guess).
    pub params: ProcessParams,
    /// Weighted sum of squared slope residuals at the minimum.
    pub loss: f64,
    /// Total Nelder–Mead iterations across all restarts.
    pub n_iter: usize,
    /// Whether the winning run met the simplex-diameter tolerance.
    pub converged: bool,
    /// Horizon ratio used for the model slopes.
    pub ratio: f64,
    /// Per-point comparison at the calibrated parameters.
    pub residuals: Vec<ResidualPoint>,
}

/// Calibration report: the band inferred from a short-horizon volatility
/// plus derived time scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    /// Band statistics.
    #[serde(flatten)]
    pub band: BandReport,
    /// Peak-to-mid price multiple `e^Δ` implied by the band half-width.
    pub price_factor: f64,
    /// Horizon where the theoretical slope changes sign, if the curve has a
    /// momentum region (`None` for monotonically mean-reverting fits).
    pub crossing_years: Option<f64>,
    /// Parameters the report was derived from.
    pub params: ProcessParams,
}

struct CurvePoint {
    pair: HorizonPair,
    tau_lt_native: f64,
    tau_lt_years: f64,
    slope: f64,
    stderr: f64,
    weight: f64,
}

fn curve_points(problem: &CalibrationProblem) -> Result<Vec<CurvePoint>, CalibrateError> {
    if !(problem.ratio > 0.0 && problem.ratio <= 1.0) {
        return Err(CalibrateError::Model(ModelError::InvalidParameter {
            name: "ratio",
            value: problem.ratio,
            requirement: "must satisfy 0 < ratio <= 1",
        }));
    }
    let frequency = problem.curve.frequency;
    let points: Vec<CurvePoint> = problem
        .curve
        .entries
        .iter()
        .filter_map(|entry| entry.linear.map(|linear| (entry, linear)))
        .map(|(entry, linear)| {
            // Mirror the pipeline's step rounding so theory and measurement
            // use the same forward horizon.
            let gt_steps = (entry.tau_lt_native * problem.ratio).round().max(1.0);
            let pair =
                HorizonPair::new(entry.tau_lt_years, frequency.years_from_native(gt_steps))?;
            let weight = match problem.weight_mode {
                WeightMode::Stderr => 1.0 / linear.stderr.max(SE_FLOOR).powi(2),
                WeightMode::Uniform => 1.0,
            };
            Ok(CurvePoint {
                pair,
                tau_lt_native: entry.tau_lt_native,
                tau_lt_years: entry.tau_lt_years,
                slope: linear.slope,
                stderr: linear.stderr,
                weight,
            })
        })
        .collect::<Result<_, ModelError>>()?;
    if points.len() < MIN_CURVE_POINTS {
        return Err(CalibrateError::InsufficientCurve { available: points.len() });
    }
    Ok(points)
}

fn loss_at(points: &[CurvePoint], sigma2: f64, z: &[f64; 3]) -> f64 {
    let params = ProcessParams { g: z[0].exp(), kappa: z[1].exp(), gamma: z[2].exp(), sigma2 };
    if params.validate().is_err() {
        return f64::INFINITY;
    }
    points
        .iter()
        .map(|p| match slope_theory(&params, p.pair) {
            Ok(s) => p.weight * (s - p.slope) * (s - p.slope),
            Err(_) => f64::INFINITY,
        })
        .sum()
}

/// Tie-break key: lowest loss, then smallest `(g, κ, γ)` lexicographically,
/// so equal-loss aliases resolve deterministically.
fn better(candidate: &(f64, [f64; 3]), incumbent: &(f64, [f64; 3])) -> bool {
    match candidate.0.total_cmp(&incumbent.0) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => candidate.1 < incumbent.1,
    }
}

/// Fits `(g, κ, γ)` to the curve by weighted least squares on the slopes.
///
/// Never errors on a hard optimization landscape — an unconverged run is
/// reported through [`CalibrationResult::converged`] and rejected later by
/// [`report`].
pub fn calibrate(problem: &CalibrationProblem) -> Result<CalibrationResult, CalibrateError> {
    problem.bounds.validate()?;
    problem.init.validate()?;
    let points = curve_points(problem)?;
    let sigma2 = problem.init.sigma2;
    let bounds = problem.bounds.log_bounds();
    let objective = |z: &[f64; 3]| loss_at(&points, sigma2, z);

    // Lattice of starts: the 8 box corners (inset 2%), then the caller's
    // initial guess clamped into the box.
    let mut starts: Vec<[f64; 3]> = (0..8)
        .map(|mask| {
            std::array::from_fn(|i| {
                let span = bounds.hi[i] - bounds.lo[i];
                if mask & (1 << i) == 0 {
                    bounds.lo[i] + CORNER_INSET * span
                } else {
                    bounds.hi[i] - CORNER_INSET * span
                }
            })
        })
        .collect();
    let init_log = [
        problem.init.g.max(G_LOG_FLOOR).ln(),
        problem.init.kappa.ln(),
        problem.init.gamma.ln(),
    ];
    starts.push(std::array::from_fn(|i| {
        let span = bounds.hi[i] - bounds.lo[i];
        init_log[i].clamp(bounds.lo[i] + 1e-6 * span, bounds.hi[i] - 1e-6 * span)
    }));

    let mut total_iters = 0;
    let mut best: Option<(f64, [f64; 3], bool)> = None;
    for start in starts {
        let outcome = minimize_bounded(objective, &bounds, start, START_SPREAD, MAX_ITER, DIAM_TOL);
        total_iters += outcome.iters;
        let candidate = (outcome.loss, outcome.x);
        if best.as_ref().is_none_or(|b| better(&candidate, &(b.0, b.1))) {
            best = Some((outcome.loss, outcome.x, outcome.converged));
        }
    }
    let (mut best_loss, mut best_x, mut converged) = best.expect("at least one start");

    for _ in 0..POLISH_ROUNDS {
        let outcome =
            minimize_bounded(objective, &bounds, best_x, POLISH_SPREAD, MAX_ITER, DIAM_TOL);
        total_iters += outcome.iters;
        if outcome.loss <= best_loss {
            best_loss = outcome.loss;
            best_x = outcome.x;
            converged = outcome.converged;
        }
    }

    let params = ProcessParams {
        g: best_x[0].exp(),
        kappa: best_x[1].exp(),
        gamma: best_x[2].exp(),
        sigma2,
    };
    let residuals = points
        .iter()
        .map(|p| {
            let fitted = slope_theory(&params, p.pair)?;
            Ok(ResidualPoint {
                tau_lt_native: p.tau_lt_native,
                tau_lt_years: p.tau_lt_years,
                empirical: p.slope,
                fitted,
                stderr: p.stderr,
            })
        })
        .collect::<Result<_, ModelError>>()?;
    Ok(CalibrationResult {
        params,
        loss: best_loss,
        n_iter: total_iters,
        converged,
        ratio: problem.ratio,
        residuals,
    })
}

/// Derives the band report from explicit parameters.
///
/// `daily_vol` is the one-day return volatility that anchors the overall
/// scale (slopes alone cannot). The sign-change horizon is `None` when the
/// slope curve never turns negative-to-positive in the bracket.
pub fn report_from_params(
    params: &ProcessParams,
    ratio: f64,
    daily_vol: f64,
) -> Result<ReportSummary, CalibrateError> {
    let band = black_band(params, daily_vol)?;
    let crossing_years = match slope_zero_crossing(params, ratio) {
        Ok(tau) => Some(tau),
        Err(ModelError::NoCrossing { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(ReportSummary {
        band,
        price_factor: band.delta.exp(),
        crossing_years,
        params: ProcessParams { sigma2: band.sigma2, ..*params },
    })
}

/// Derives the band report from a calibration, refusing unconverged fits.
pub fn report(result: &CalibrationResult, daily_vol: f64) -> Result<ReportSummary, CalibrateError> {
    if !result.converged {
        return Err(CalibrateError::NotConverged);
    }
    report_from_params(&result.params, result.ratio, daily_vol)
}

impl ReportSummary {
    /// Plain-text rendering for terminal output.
    pub fn text_summary(&self) -> String {
        let crossing = match self.crossing_years {
            Some(tau) => format!("{tau:.3} years"),
            None => "none (mean-reverting at all horizons)".to_string(),
        };
        format!(
            "band half-width      delta = {delta:.4} (price factor e^delta = {factor:.3})\n\
             long-run variance    sigma^2 (1+g) = {var:.4}\n\
             mean-reversion time  T_MR = {tmr:.2} years\n\
             slope sign change    {crossing}\n\
             parameters           g = {g:.4}, 1/kappa = {ik:.2} y, 1/gamma = {ig:.1} d, sigma^2 = {s2:.4}",
            delta = self.band.delta,
            factor = self.price_factor,
            var = self.band.delta * self.band.delta,
            tmr = self.band.t_mr,
            crossing = crossing,
            g = self.params.g,
            ik = 1.0 / self.params.kappa,
            ig = 252.0 / self.params.gamma,
            s2 = self.params.sigma2,
        )
    }
}
