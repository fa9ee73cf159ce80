//! End-to-end behaviour of the de-trended-return regression pipeline on
//! simulated pools.

use chrono::NaiveDate;
use meanrev::empirics::{
    build_pairs, fit_linear, predictability_curve, DetrendConfig, Observation, PriceSeries,
    SeriesKind,
};
use meanrev::model::ProcessParams;
use meanrev::sim::{simulate, to_price_series, SimConfig};
use meanrev::units::Frequency;

fn simulated_pool(
    params: ProcessParams,
    frequency: Frequency,
    years: f64,
    n_paths: usize,
    seed: u64,
    drift: f64,
) -> Vec<PriceSeries> {
    let dt = frequency.dt_years();
    let config = SimConfig {
        params,
        dt,
        n_steps: (years / dt).round() as usize + 1,
        n_paths,
        seed,
        burn_in: 0,
    };
    let output = simulate(&config).expect("simulation succeeds");
    let start = NaiveDate::from_ymd_opt(1950, 1, 1).unwrap();
    output
        .paths
        .iter()
        .enumerate()
        .map(|(i, pi)| {
            to_price_series(pi, dt, &format!("SIM{i:03}"), start, frequency, drift).unwrap()
        })
        .collect()
}

/// Without a trending component every fitted slope must be negative: the
/// process is a plain mean-reverting OU, so past de-trended returns
/// anti-correlate with future ones at every horizon.
#[test]
fn pure_ou_pool_yields_uniformly_negative_curve() {
    let params = ProcessParams::new(0.0, 2.0, 10.0, 0.1).unwrap();
    let pool = simulated_pool(params, Frequency::Daily, 30.0, 100, 501, 0.0);
    let cfg = DetrendConfig::default_daily();
    let curve = predictability_curve(&pool, &cfg).unwrap();

    let mut fitted = 0;
    for entry in &curve.entries {
        if let Some(linear) = &entry.linear {
            fitted += 1;
            assert!(
                linear.slope < 0.0,
                "τ< = {} days: slope {} should be negative",
                entry.tau_lt_native,
                linear.slope
            );
        }
    }
    assert!(fitted >= 8, "only {fitted} grid entries produced fits");
}

/// A deterministic exponential trend de-trends to exactly zero, so the
/// pipeline must report pairs but no fits anywhere on the grid. Monthly
/// observations on the 15th put the 20-year window start exactly 240
/// observations back, making the cancellation exact rather than
/// calendar-jittered.
#[test]
fn perfect_trends_produce_degenerate_curve() {
    let start = NaiveDate::from_ymd_opt(1975, 1, 15).unwrap();
    let pool: Vec<PriceSeries> = [0.003f64, 0.01, -0.002]
        .iter()
        .enumerate()
        .map(|(i, &step)| {
            let observations: Vec<Observation> = (0..420u32)
                .map(|k| Observation {
                    date: start.checked_add_months(chrono::Months::new(k)).unwrap(),
                    price: (step * k as f64).exp(),
                })
                .collect();
            PriceSeries::new(&format!("TR{i}"), Frequency::Monthly, SeriesKind::Spot, observations)
                .unwrap()
        })
        .collect();

    let curve = predictability_curve(&pool, &DetrendConfig::default_monthly()).unwrap();
    assert!(curve.all_empty(), "{curve:?}");
    assert!(curve.entries.iter().all(|e| e.n_raw > 0), "anchors should still qualify");
}

/// Prices enter only through log differences, so rescaling every price by
/// a constant must leave the fitted curve essentially unchanged.
#[test]
fn price_rescaling_leaves_curve_invariant() {
    let params = ProcessParams::futures_benchmark();
    let pool = simulated_pool(params, Frequency::Daily, 28.0, 10, 77, 0.03);
    let rescaled: Vec<PriceSeries> = pool
        .iter()
        .map(|s| {
            let observations = s
                .observations()
                .iter()
                .map(|o| Observation { date: o.date, price: o.price * 7.25 })
                .collect();
            PriceSeries::new(s.symbol(), s.frequency(), s.kind(), observations).unwrap()
        })
        .collect();

    let cfg = DetrendConfig::default_daily();
    let base = predictability_curve(&pool, &cfg).unwrap();
    let scaled = predictability_curve(&rescaled, &cfg).unwrap();
    for (a, b) in base.entries.iter().zip(&scaled.entries) {
        assert_eq!(a.n_kept, b.n_kept);
        match (&a.linear, &b.linear) {
            (Some(la), Some(lb)) => {
                assert!(
                    (la.slope - lb.slope).abs() <= 1e-9 * la.slope.abs().max(1e-3),
                    "τ< = {}: {} vs {}",
                    a.tau_lt_native,
                    la.slope,
                    lb.slope
                );
            }
            (None, None) => {}
            _ => panic!("fit availability changed under rescaling"),
        }
    }
}

/// The monthly pipeline works end to end on simulated spot pools and
/// shows the same mean-reversion signature.
#[test]
fn monthly_pool_yields_negative_curve_without_trend() {
    let params = ProcessParams::new(0.0, 1.0, 10.0, 0.2).unwrap();
    let pool = simulated_pool(params, Frequency::Monthly, 45.0, 40, 902, 0.0);
    let curve = predictability_curve(&pool, &DetrendConfig::default_monthly()).unwrap();

    let mut fitted = 0;
    for entry in &curve.entries {
        if let Some(linear) = &entry.linear {
            fitted += 1;
            assert!(
                linear.slope < 0.0,
                "τ< = {} months: slope {}",
                entry.tau_lt_native,
                linear.slope
            );
        }
    }
    assert!(fitted >= 6, "only {fitted} monthly entries produced fits");
}

/// Grid entries are computed in parallel; two runs must serialize
/// identically (scheduling independence).
#[test]
fn curve_is_deterministic_across_runs() {
    let params = ProcessParams::spot_benchmark();
    let pool = simulated_pool(params, Frequency::Monthly, 40.0, 12, 33, 0.02);
    let cfg = DetrendConfig::default_monthly();
    let a = serde_json::to_string(&predictability_curve(&pool, &cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&predictability_curve(&pool, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}

/// A daily grid makes no sense against a monthly pool: the largest horizon
/// would dwarf the trend window, and validation must say so.
#[test]
fn daily_defaults_are_rejected_for_monthly_pools() {
    let params = ProcessParams::spot_benchmark();
    let pool = simulated_pool(params, Frequency::Monthly, 30.0, 2, 5, 0.0);
    let cfg = DetrendConfig::default_daily();
    assert!(predictability_curve(&pool, &cfg).is_err());
}

/// `fit_linear` agrees with a direct normal-equation evaluation on the
/// pairs the pipeline emits.
#[test]
fn fit_linear_matches_direct_ols() {
    let params = ProcessParams::futures_benchmark();
    let pool = simulated_pool(params, Frequency::Daily, 26.0, 4, 11, 0.0);
    let cfg = DetrendConfig::default_daily();
    let pairs = build_pairs(&pool, &cfg, 80.0).unwrap();
    let fit = fit_linear(&pairs, cfg.outlier_cut).unwrap();

    let kept: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|p| p.x.abs() <= cfg.outlier_cut && p.y.abs() <= cfg.outlier_cut)
        .map(|p| (p.x, p.y))
        .collect();
    let n = kept.len() as f64;
    let mx = kept.iter().map(|(x, _)| x).sum::<f64>() / n;
    let my = kept.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = kept.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let sxy: f64 = kept.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    assert_eq!(fit.n_kept, kept.len());
    assert!((fit.slope - sxy / sxx).abs() < 1e-12);
}
