use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;

use config::{RunConfig, Settings};
use error::{CliError, CliResult};
use output::OutDir;

/// Minimum wage bunching: simulate, estimate and summarise wage-bin panels.
#[derive(Debug, Parser)]
#[command(name = "mwbunch", version)]
struct Cli {
    /// Flat `key = value` config file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override one config key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory (default: $MWBUNCH_OUT_DIR, else `.`).
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write synthetic contracts, schedule, users and the true effects.
    Simulate,
    /// Fit the event study and write coefficients, decomposition and elasticities.
    Estimate,
    /// Stratified fits, Kaitz index and binned scatter.
    Hetero,
    /// Employment distributions and before/after change grids.
    Describe,
    /// Platform tightness and finding rates.
    Macro,
    /// Print the effective configuration.
    PrintConfig,
}

fn settings(cli: &Cli) -> CliResult<Settings> {
    let mut s = Settings::from_env();
    if let Some(path) = &cli.config {
        s.load_file(path)?;
    }
    for pair in &cli.set {
        s.set_pair(pair)?;
    }
    if let Some(dir) = &cli.out_dir {
        s.set("out_dir", &dir.to_string_lossy())?;
    }
    if let Some(seed) = cli.seed {
        s.set("seed", &seed.to_string())?;
    }
    Ok(s)
}

fn run(cli: Cli) -> CliResult<()> {
    let s = settings(&cli)?;
    let cfg = RunConfig::from_settings(&s)?;
    if let Command::PrintConfig = cli.command {
        print!("{}", s.render());
        return Ok(());
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))?;

    let mut out = OutDir::open(&cfg.out_dir)?;
    pool.install(|| match cli.command {
        Command::Simulate => commands::simulate(&cfg, &mut out),
        Command::Estimate => commands::estimate(&cfg, &mut out),
        Command::Hetero => commands::hetero(&cfg, &mut out),
        Command::Describe => commands::describe(&cfg, &mut out),
        Command::Macro => commands::macro_series(&cfg, &mut out),
        Command::PrintConfig => unreachable!(),
    })?;
    for p in out.written() {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
