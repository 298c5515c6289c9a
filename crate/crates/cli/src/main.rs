use anyhow::Context;
use clap::{Parser, Subcommand};
use std::path::PathBuf;

use floquet_loss_cli::compare::compare;
use floquet_loss_cli::config::ResolvedConfig;
use floquet_loss_cli::dump::{dump, DumpKind};
use floquet_loss_cli::sweep::{run_sweep, RunOptions};

#[derive(Parser)]
#[command(
    name = "floquet-loss",
    version,
    about = "Steady-state energy-loss simulator for strongly driven transmons"
)]
struct Cli {
    /// Worker threads (default: all cores; FLOQUET_LOSS_THREADS also works)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured sweep over drive amplitudes
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Continue from an existing checkpoint
        #[arg(long)]
        resume: bool,
    },
    /// Join sweep predictions against an experiment CSV
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Experiment CSV (n_r or p_r_dbm; s21_min or kappa_mhz; optional
        /// omega_d_ghz, noise_photons)
        #[arg(long)]
        data: PathBuf,
        /// Predictions CSV (default: <output_dir>/results.csv)
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Emit diagnostic CSV files
    Dump {
        #[arg(long)]
        config: PathBuf,
        /// spectra | overlaps | rates | hbar
        #[arg(long)]
        what: DumpKind,
    },
}

fn thread_count(cli: &Cli) -> Option<usize> {
    cli.threads.or_else(|| {
        std::env::var("FLOQUET_LOSS_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    })
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(n) = thread_count(&cli) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Run { config, resume } => {
            let cfg = ResolvedConfig::from_file(config)?;
            let outcome = run_sweep(
                &cfg,
                &RunOptions {
                    resume: *resume,
                    max_new_points: None,
                },
            )?;
            println!(
                "completed {} points ({} failed): {}",
                outcome.completed,
                outcome.failed,
                outcome.results_path.display()
            );
        }
        Command::Compare {
            config,
            data,
            predictions,
        } => {
            let cfg = ResolvedConfig::from_file(config)?;
            let path = compare(&cfg, data, predictions.as_deref())?;
            println!("comparison written to {}", path.display());
        }
        Command::Dump { config, what } => {
            let cfg = ResolvedConfig::from_file(config)?;
            let path = dump(&cfg, *what)?;
            println!("diagnostics written to {}", path.display());
        }
    }
    Ok(())
}
