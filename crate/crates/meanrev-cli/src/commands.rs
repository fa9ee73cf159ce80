//! Implementations of the five subcommands.

use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;

use meanrev::calibrate::{
    calibrate, report, report_from_params, CalibrationProblem, CalibrationResult, WeightMode,
};
use meanrev::empirics::{predictability_curve, DetrendConfig, PredictabilityCurve};
use meanrev::io;
use meanrev::model::{autocorr, slope_theory, HorizonPair, ProcessParams};
use meanrev::sim::{simulate, to_price_series, SimConfig};
use meanrev::units::{Frequency, TRADING_DAYS_PER_YEAR};

use crate::config::ConfigMap;
use crate::failure::Failure;
use crate::opts;

/// Flag value if given, else the config value, else `None`.
fn resolve<T: FromStr>(
    flag: Option<T>,
    cfg: &ConfigMap,
    key: &'static str,
) -> Result<Option<T>, Failure> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => cfg.get_parse(key),
    }
}

/// String-typed options share one parse path with the config file.
fn resolve_str(flag: &Option<String>, cfg: &ConfigMap, key: &str) -> Option<String> {
    flag.clone().or_else(|| cfg.get_raw(key).map(str::to_string))
}

fn parse_value<T: FromStr>(raw: &str, what: &str) -> Result<T, Failure> {
    raw.parse().map_err(|_| Failure::Usage(format!("invalid value `{raw}` for {what}")))
}

fn resolve_frequency(
    flag: &Option<String>,
    cfg: &ConfigMap,
    default: Frequency,
) -> Result<Frequency, Failure> {
    resolve_str(flag, cfg, "freq")
        .map(|raw| parse_value(&raw, "--freq (expected `daily` or `monthly`)"))
        .unwrap_or(Ok(default))
}

fn resolve_ratio(flag: Option<f64>, cfg: &ConfigMap, default: f64) -> Result<f64, Failure> {
    let ratio = resolve(flag, cfg, "ratio")?.unwrap_or(default);
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Failure::Usage(format!(
            "--ratio must satisfy 0 < ratio <= 1, got {ratio}"
        )));
    }
    Ok(ratio)
}

fn parse_grid(raw: &str) -> Result<Vec<f64>, Failure> {
    let grid: Vec<f64> = raw
        .split(',')
        .map(|cell| parse_value(cell.trim(), "--grid"))
        .collect::<Result<_, _>>()?;
    if grid.is_empty() {
        return Err(Failure::Usage("--grid must list at least one horizon".into()));
    }
    Ok(grid)
}

/// Builds the working parameter set: preset, overridden field by field.
pub fn resolve_params(opts: &opts::ParamOpts, cfg: &ConfigMap) -> Result<ProcessParams, Failure> {
    let base = match resolve_str(&opts.preset, cfg, "preset").as_deref() {
        None | Some("futures") => ProcessParams::futures_benchmark(),
        Some("spot") => ProcessParams::spot_benchmark(),
        Some(other) => {
            return Err(Failure::Usage(format!(
                "unknown preset `{other}` (expected `futures` or `spot`)"
            )));
        }
    };
    let g = resolve(opts.g, cfg, "g")?.unwrap_or(base.g);
    let kappa_inv = resolve(opts.kappa_inv, cfg, "kappa_inv")?.unwrap_or(1.0 / base.kappa);
    let gamma_inv =
        resolve(opts.gamma_inv, cfg, "gamma_inv")?.unwrap_or(TRADING_DAYS_PER_YEAR / base.gamma);
    let sigma2 = resolve(opts.sigma2, cfg, "sigma2")?.unwrap_or(base.sigma2);
    Ok(ProcessParams::from_scales(g, kappa_inv, gamma_inv, sigma2)?)
}

pub fn run_simulate(opts: &opts::SimulateOpts, cfg: &ConfigMap, verbose: bool) -> Result<(), Failure> {
    let params = resolve_params(&opts.params, cfg)?;
    let frequency = resolve_frequency(&opts.freq, cfg, Frequency::Daily)?;
    let years = resolve(opts.years, cfg, "years")?.unwrap_or(30.0);
    if !(years > 0.0) || !years.is_finite() {
        return Err(Failure::Usage(format!("--years must be positive, got {years}")));
    }
    let n_paths = resolve(opts.paths, cfg, "paths")?.unwrap_or(1);
    let seed = resolve(opts.seed, cfg, "seed")?.unwrap_or(42);
    let burn_in = resolve(opts.burn_in, cfg, "burn_in")?.unwrap_or(0);
    let drift = resolve(opts.drift, cfg, "drift")?.unwrap_or(0.0);
    let start_date: NaiveDate = resolve_str(&opts.start_date, cfg, "start_date")
        .map(|raw| parse_value(&raw, "--start-date (expected YYYY-MM-DD)"))
        .unwrap_or_else(|| Ok(NaiveDate::from_ymd_opt(1950, 1, 1).expect("valid date")))?;

    let n_steps = (years * frequency.steps_per_year()).round() as usize;
    if n_steps < 2 {
        return Err(Failure::Usage(format!(
            "--years {years} gives {n_steps} observation(s); need at least 2"
        )));
    }
    let config = SimConfig {
        params,
        dt: frequency.dt_years(),
        n_steps,
        n_paths,
        seed,
        burn_in,
    };
    let output = simulate(&config)?;
    if verbose {
        eprintln!("simulated {n_paths} path(s), config digest {}", output.digest());
    }

    let width = (n_paths.saturating_sub(1)).to_string().len().max(3);
    let pool: Vec<_> = output
        .paths
        .iter()
        .enumerate()
        .map(|(idx, pi)| {
            to_price_series(
                pi,
                config.dt,
                &format!("SIM{idx:0width$}"),
                start_date,
                frequency,
                drift,
            )
        })
        .collect::<Result<_, _>>()?;
    io::write_price_csv(&opts.out, &pool)?;
    if let Some(paths_file) = &opts.emit_paths {
        io::write_paths_csv(paths_file, &output)?;
    }
    println!(
        "wrote {n_paths} {frequency} series of {n_steps} observations to {}",
        opts.out.display()
    );
    Ok(())
}

pub fn run_curve(opts: &opts::CurveOpts, cfg: &ConfigMap, verbose: bool) -> Result<(), Failure> {
    let pool = io::read_price_csv(&opts.input)?;
    let frequency = pool[0].frequency();
    let mut detrend = match frequency {
        Frequency::Daily => DetrendConfig::default_daily(),
        Frequency::Monthly => DetrendConfig::default_monthly(),
    };
    if let Some(t_years) = resolve(opts.t_years, cfg, "t_years")? {
        detrend.t_years = t_years;
    }
    detrend.ratio = resolve_ratio(opts.ratio, cfg, detrend.ratio)?;
    if let Some(cut) = resolve(opts.cut, cfg, "cut")? {
        detrend.outlier_cut = cut;
    }
    if let Some(grid) = resolve_str(&opts.grid, cfg, "grid") {
        detrend.tau_lt_grid = parse_grid(&grid)?;
    }
    detrend.min_history = if opts.no_min_history {
        false
    } else {
        cfg.get_parse::<bool>("min_history")?.unwrap_or(true)
    };
    detrend.normalize_per_symbol =
        opts.per_symbol_norm || cfg.get_parse::<bool>("per_symbol_norm")?.unwrap_or(false);

    if verbose {
        eprintln!(
            "pool: {} series, {} observations, {frequency}",
            pool.len(),
            pool.iter().map(|s| s.len()).sum::<usize>()
        );
    }
    let curve = predictability_curve(&pool, &detrend)?;
    if curve.all_empty() {
        eprintln!(
            "warning: no horizon produced a fit (too little history, or degenerate prices)"
        );
    }
    let mut wrote = false;
    if let Some(path) = &opts.out_csv {
        io::write_curve_csv(path, &curve)?;
        println!("wrote curve CSV to {}", path.display());
        wrote = true;
    }
    if let Some(path) = &opts.out_json {
        io::write_curve_json(path, &curve)?;
        println!("wrote curve JSON to {}", path.display());
        wrote = true;
    }
    if !wrote {
        print_curve_table(&curve);
    }
    Ok(())
}

fn print_curve_table(curve: &PredictabilityCurve) {
    println!(
        "{:>10} {:>10} {:>8} {:>8} {:>12} {:>12}",
        "tau_native", "tau_years", "n_raw", "n_kept", "slope", "slope_se"
    );
    for e in &curve.entries {
        let (slope, se) = match e.linear {
            Some(l) => (format!("{:+.6}", l.slope), format!("{:.6}", l.stderr)),
            None => ("-".to_string(), "-".to_string()),
        };
        println!(
            "{:>10} {:>10.4} {:>8} {:>8} {:>12} {:>12}",
            e.tau_lt_native, e.tau_lt_years, e.n_raw, e.n_kept, slope, se
        );
    }
}

pub fn run_theory(opts: &opts::TheoryOpts, cfg: &ConfigMap) -> Result<(), Failure> {
    let params = resolve_params(&opts.params, cfg)?;
    let frequency = resolve_frequency(&opts.freq, cfg, Frequency::Daily)?;
    let ratio = resolve_ratio(opts.ratio, cfg, 0.2)?;
    let grid = match resolve_str(&opts.grid, cfg, "grid") {
        Some(raw) => parse_grid(&raw)?,
        None => match frequency {
            Frequency::Daily => meanrev::empirics::DAILY_TAU_GRID.to_vec(),
            Frequency::Monthly => meanrev::empirics::MONTHLY_TAU_GRID.to_vec(),
        },
    };

    let rows: Vec<io::TheoryRow> = grid
        .iter()
        .map(|&tau_native| {
            let lt_steps = tau_native.round().max(1.0);
            let gt_steps = (tau_native * ratio).round().max(1.0);
            let tau_lt_years = frequency.years_from_native(lt_steps);
            let tau_gt_years = frequency.years_from_native(gt_steps);
            let pair = HorizonPair::new(tau_lt_years, tau_gt_years)?;
            Ok(io::TheoryRow {
                tau_lt_native: tau_native,
                tau_lt_years,
                tau_gt_years,
                slope: slope_theory(&params, pair)?,
                autocorr: autocorr(&params, tau_lt_years)?,
            })
        })
        .collect::<Result<_, Failure>>()?;

    match &opts.out {
        Some(path) => {
            io::write_theory_csv(path, &rows)?;
            println!("wrote {} theory rows to {}", rows.len(), path.display());
        }
        None => {
            println!(
                "{:>10} {:>10} {:>10} {:>12} {:>12}",
                "tau_native", "tau_years", "tau_gt_yrs", "slope", "autocorr"
            );
            for r in &rows {
                println!(
                    "{:>10} {:>10.4} {:>10.4} {:>+12.6} {:>12.6}",
                    r.tau_lt_native, r.tau_lt_years, r.tau_gt_years, r.slope, r.autocorr
                );
            }
        }
    }
    Ok(())
}

fn read_curve_any(path: &Path) -> Result<PredictabilityCurve, Failure> {
    let curve = if path.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("json")) {
        io::read_curve_json(path)?
    } else {
        io::read_curve_csv(path)?
    };
    Ok(curve)
}

pub fn run_calibrate(opts: &opts::CalibrateOpts, cfg: &ConfigMap, verbose: bool) -> Result<(), Failure> {
    let curve = read_curve_any(&opts.curve)?;
    let ratio = resolve_ratio(opts.ratio, cfg, 0.2)?;
    let weight_mode = match resolve_str(&opts.weights, cfg, "weights").as_deref() {
        None | Some("stderr") => WeightMode::Stderr,
        Some("uniform") => WeightMode::Uniform,
        Some(other) => {
            return Err(Failure::Usage(format!(
                "unknown weight mode `{other}` (expected `stderr` or `uniform`)"
            )));
        }
    };
    let init = resolve_params(&opts.init, cfg)?;
    let problem = CalibrationProblem {
        ratio,
        init,
        weight_mode,
        ..CalibrationProblem::new(curve, ratio)
    };
    let result = calibrate(&problem)?;
    if verbose {
        eprintln!("calibration used {} iterations across restarts", result.n_iter);
    }
    match &opts.out {
        Some(path) => {
            io::write_calibration_json(path, &result)?;
            println!("{}", calibration_line(&result));
            println!("wrote calibration JSON to {}", path.display());
        }
        None => {
            let json = serde_json::to_string_pretty(&result)
                .expect("calibration result serializes");
            println!("{json}");
        }
    }
    Ok(())
}

fn calibration_line(result: &CalibrationResult) -> String {
    format!(
        "fit: g = {:.4}, 1/kappa = {:.2} y, 1/gamma = {:.1} d \
         (loss {:.3e}, {} points, converged: {})",
        result.params.g,
        1.0 / result.params.kappa,
        TRADING_DAYS_PER_YEAR / result.params.gamma,
        result.loss,
        result.residuals.len(),
        result.converged,
    )
}

pub fn run_report(opts: &opts::ReportOpts, cfg: &ConfigMap) -> Result<(), Failure> {
    let daily_vol = resolve(opts.daily_vol, cfg, "daily_vol")?
        .ok_or_else(|| Failure::Usage("--daily-vol is required".into()))?;
    let summary = match &opts.calibration {
        Some(path) => {
            let result = io::read_calibration_json(path)?;
            match resolve(opts.ratio, cfg, "ratio")? {
                // Overriding the ratio re-derives the crossing with the
                // calibrated parameters; convergence is still required.
                Some(ratio) if ratio != result.ratio => {
                    if !result.converged {
                        return Err(meanrev::calibrate::CalibrateError::NotConverged.into());
                    }
                    report_from_params(&result.params, ratio, daily_vol)?
                }
                _ => report(&result, daily_vol)?,
            }
        }
        None => {
            let params = resolve_params(&opts.params, cfg)?;
            let ratio = resolve_ratio(opts.ratio, cfg, 0.2)?;
            report_from_params(&params, ratio, daily_vol)?
        }
    };
    println!("{}", summary.text_summary());
    if let Some(path) = &opts.out {
        io::write_report_json(path, &summary)?;
        println!("wrote report JSON to {}", path.display());
    }
    Ok(())
}
