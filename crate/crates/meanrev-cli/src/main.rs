//! `meanrev` — command-line driver for the trend/mean-reversion toolkit.

mod commands;
mod config;
mod failure;
mod opts;

use clap::Parser;

use config::ConfigMap;
use failure::Failure;

fn main() {
    let cli = match opts::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Err(failure) = run(cli) {
        eprintln!("error: {failure}");
        std::process::exit(failure.exit_code());
    }
}

fn run(cli: opts::Cli) -> Result<(), Failure> {
    let cfg = match &cli.config {
        Some(path) => ConfigMap::load(path)?,
        None => ConfigMap::default(),
    };

    let threads = match cli.threads {
        Some(n) => Some(n),
        None => cfg.get_parse::<usize>("threads")?,
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot configure {n} threads: {e}")))?;
    }

    match &cli.command {
        opts::Command::Simulate(o) => commands::run_simulate(o, &cfg, cli.verbose),
        opts::Command::Curve(o) => commands::run_curve(o, &cfg, cli.verbose),
        opts::Command::Theory(o) => commands::run_theory(o, &cfg),
        opts::Command::Calibrate(o) => commands::run_calibrate(o, &cfg, cli.verbose),
        opts::Command::Report(o) => commands::run_report(o, &cfg),
    }
}
