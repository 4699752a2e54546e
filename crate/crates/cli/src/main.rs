use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::error;
use more_adapt_cli::{run_scan, RunConfig};

/// Run ADAPT, MORE-ADAPT, q-sc-EOM or FCI over the geometries of a config
/// file and write CSV tables and SVG plots.
///
/// Exit status: 0 on success, 2 for configuration errors, 3 when a
/// calculation fails, 1 when output cannot be written.
#[derive(Debug, Parser)]
#[command(name = "more-adapt", version)]
struct Args {
    /// TOML run configuration.
    config: PathBuf,
    /// Output directory, overriding `out_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Geometries computed at once (default: one per core).
    #[arg(long)]
    jobs: Option<usize>,
    /// More log output; repeat for debug messages.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = match args.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let mut cfg = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            error!("{}", e);
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(out) = args.out {
        cfg.out_dir = std::env::current_dir().map(|d| d.join(&out)).unwrap_or(out);
    }
    match run_scan(&cfg, args.jobs) {
        Ok(report) => {
            println!("{} geometries written to {}", report.results.len(), cfg.out_dir().display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            error!("{}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
