use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use glzi_scan::output::write_report;
use glzi_scan::{run_experiment, Experiment, ScanConfig, ScanError};

/// Runs one interferometer experiment and writes CSV data with JSON sidecars.
#[derive(Parser, Debug)]
#[command(name = "glzi", version)]
struct Cli {
    /// fringe, heatmap, contrast-scan, backaction, squeeze-bench or oracle-check
    experiment: String,

    /// Flat `section.key = value` configuration file
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override a configuration key (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Worker threads; defaults to the available parallelism
    #[arg(long)]
    workers: Option<usize>,

    /// Also write SVG plots
    #[arg(long)]
    svg: bool,
}

fn run(cli: Cli) -> Result<(), ScanError> {
    let experiment = Experiment::parse(&cli.experiment).ok_or_else(|| {
        let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
        glzi_scan::ConfigError::Invalid(format!(
            "unknown experiment `{}` (expected one of {})",
            cli.experiment,
            names.join(", ")
        ))
    })?;
    let cfg = ScanConfig::load(cli.config.as_deref(), &cli.set)?;
    let workers = match cli.workers {
        Some(0) => return Err(glzi_scan::ConfigError::Invalid("--workers must be at least 1".into()).into()),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    log::info!("{} with {workers} worker(s)", experiment.name());
    let report = run_experiment(&cfg, experiment, workers)?;
    let written = write_report(&report, &cfg, &cli.out, cli.svg)?;
    for path in &written {
        println!("{}", path.display());
    }
    println!("{}", report.summary);
    log::info!("{} points in {:.2} s", report.points, report.elapsed_s);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
