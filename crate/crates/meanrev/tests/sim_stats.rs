//! Statistical validation of the exact-discretization simulator against
//! the closed-form moments, plus distribution-level invariance checks.

use meanrev::model::{covariance, ProcessParams};
use meanrev::sim::{simulate, SimConfig, SimOutput};

fn run(params: ProcessParams, dt: f64, n_steps: usize, n_paths: usize, seed: u64) -> SimOutput {
    let config = SimConfig {
        params,
        dt,
        n_steps,
        n_paths,
        seed,
        burn_in: 0,
    };
    simulate(&config).expect("simulation succeeds")
}

/// Mean and standard error (over paths) of a per-path statistic.
fn cluster_mean_se(per_path: &[f64]) -> (f64, f64) {
    let n = per_path.len() as f64;
    let mean = per_path.iter().sum::<f64>() / n;
    let var = per_path.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per-path lagged second moment `mean_k(π_k · π_{k+lag})`.
fn path_autocov(path: &[f64], lag: usize) -> f64 {
    let n = path.len() - lag;
    (0..n).map(|k| path[k] * path[k + lag]).sum::<f64>() / n as f64
}

fn assert_within_3se(label: &str, observed: f64, se: f64, expected: f64) {
    let z = (observed - expected) / se;
    assert!(
        z.abs() <= 3.0,
        "{label}: observed {observed:.6} expected {expected:.6} z = {z:.2}"
    );
}

#[test]
fn pure_ou_moments_match_theory() {
    let params = ProcessParams::new(0.0, 1.0, 10.0, 1.0).unwrap();
    let dt = 0.01;
    let output = run(params.clone(), dt, 201, 2000, 7);

    let means: Vec<f64> = output
        .paths
        .iter()
        .map(|p| p.iter().sum::<f64>() / p.len() as f64)
        .collect();
    let (mean, se) = cluster_mean_se(&means);
    assert_within_3se("stationary mean", mean, se, 0.0);

    for lag_years in [0.0, 0.1, 0.5, 1.0] {
        let lag = (lag_years / dt).round() as usize;
        let stats: Vec<f64> = output.paths.iter().map(|p| path_autocov(p, lag)).collect();
        let (mean, se) = cluster_mean_se(&stats);
        let expected = covariance(&params, lag as f64 * dt).unwrap();
        assert_within_3se(&format!("autocov lag {lag_years}y"), mean, se, expected);
    }
}

#[test]
fn trending_moments_match_theory() {
    let params = ProcessParams::futures_benchmark();
    let dt = 1.0 / 252.0;
    let output = run(params.clone(), dt, 1009, 500, 21);

    for lag_years in [0.0, 0.1, 0.5, 1.0, 2.0] {
        let lag = (lag_years / dt).round() as usize;
        let stats: Vec<f64> = output.paths.iter().map(|p| path_autocov(p, lag)).collect();
        let (mean, se) = cluster_mean_se(&stats);
        let expected = covariance(&params, lag as f64 * dt).unwrap();
        assert_within_3se(&format!("autocov lag {lag_years}y"), mean, se, expected);
    }
}

/// Two-sample Kolmogorov–Smirnov distance via a tie-safe merge walk.
fn ks_statistic(a: &mut Vec<f64>, b: &mut Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic two-sample KS p-value with the Stephens small-sample
/// correction: `λ = (√n_eff + 0.12 + 0.11/√n_eff)·D`,
/// `p = 2·Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}`.
fn ks_p_value(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    let d = ks_statistic(&mut a, &mut b);
    let n_eff = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    let lambda = (n_eff.sqrt() + 0.12 + 0.11 / n_eff.sqrt()) * d;
    let p: f64 = 2.0
        * (1..=100)
            .map(|k| {
                let k = k as f64;
                (-1.0f64).powi(k as i32 - 1) * (-2.0 * k * k * lambda * lambda).exp()
            })
            .sum::<f64>();
    p.clamp(0.0, 1.0)
}

fn terminal_values(output: &SimOutput) -> Vec<f64> {
    output.paths.iter().map(|p| *p.last().unwrap()).collect()
}

fn path_increments(output: &SimOutput) -> Vec<f64> {
    output
        .paths
        .iter()
        .map(|p| p.last().unwrap() - p.first().unwrap())
        .collect()
}

/// Halving the step must leave the sampled law unchanged: the transition
/// is exact at every `dt`, so two-year terminal states and two-year
/// increments from `dt = 1/252` and `dt = 1/504` are draws from the same
/// distributions. The terminal value probes the preserved stationary
/// marginal; the increment also probes the autocovariance at two years.
#[test]
fn dt_halving_leaves_sampled_laws_invariant() {
    let params = ProcessParams::futures_benchmark();
    for seed in [11, 12, 13] {
        let coarse = run(params.clone(), 1.0 / 252.0, 505, 2000, seed);
        let fine = run(params.clone(), 1.0 / 504.0, 1009, 2000, seed + 1000);
        let p_term = ks_p_value(terminal_values(&coarse), terminal_values(&fine));
        assert!(p_term > 0.01, "seed {seed}: terminal KS p-value {p_term:.4}");
        let p_incr = ks_p_value(path_increments(&coarse), path_increments(&fine));
        assert!(p_incr > 0.01, "seed {seed}: increment KS p-value {p_incr:.4}");
    }
}

/// The same KS machinery must reject an actually different distribution,
/// otherwise the invariance test above proves nothing. A faster κ leaves
/// the stationary marginal untouched but shrinks the two-year
/// autocovariance, so the increment law separates cleanly.
#[test]
fn ks_test_rejects_a_different_distribution() {
    let base = ProcessParams::futures_benchmark();
    let faster = ProcessParams::new(base.g, 8.0 * base.kappa, base.gamma, base.sigma2).unwrap();
    let a = run(base, 1.0 / 252.0, 505, 2000, 11);
    let b = run(faster, 1.0 / 252.0, 505, 2000, 1011);
    let p = ks_p_value(path_increments(&a), path_increments(&b));
    assert!(p < 1e-4, "KS failed to separate distinct laws: p = {p:.6}");
}

/// Path generation seeds one RNG stream per path, so the ensemble must be
/// bitwise identical whatever thread pool executes it.
#[test]
fn ensemble_is_identical_across_thread_pools() {
    let config = SimConfig {
        params: ProcessParams::spot_benchmark(),
        dt: 1.0 / 252.0,
        n_steps: 300,
        n_paths: 40,
        seed: 99,
        burn_in: 16,
    };
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| simulate(&config).unwrap());
    let quad = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| simulate(&config).unwrap());
    assert_eq!(single, quad);
}
