use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use deepgrid_core::harness::{self, ExperimentConfig};
use deepgrid_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "deepgrid", version, about = "Noisy quality-diversity experiments with Deep-Grid MAP-Elites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every replication of one experiment.
    Run(RunArgs),
    /// Run the cartesian product of the `sweep` section's tasks and variants.
    Sweep(RunArgs),
    /// Recompute corrected-container metrics from a grid snapshot.
    Metrics {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Value written in the `evaluations` column.
        #[arg(long, default_value_t = 0)]
        evaluations: u64,
    },
    /// Check a configuration without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Replications run concurrently.
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if self.workers.is_some() {
            config.workers = self.workers;
        }
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
        Ok(config)
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run(args) => {
            let config = args.load()?;
            let results = harness::run_experiment(&config)?;
            let dir = harness::experiment_dir(&config);
            for r in &results {
                let last = r.final_record();
                println!(
                    "replication {}: {} evaluations, correct_bd {}, corrected_collection_size {}, total_corrected_quality {:.3}",
                    r.replication,
                    r.evaluations_used,
                    last.correct_bd_count,
                    last.corrected_collection_size,
                    last.total_corrected_quality
                );
            }
            println!("results written to {}", dir.display());
        }
        Command::Sweep(args) => {
            let config = args.load()?;
            for (label, results) in harness::run_sweep(&config)? {
                println!("{label}: {} replications", results.len());
            }
            println!("results written to {}", config.output_dir.display());
        }
        Command::Metrics {
            snapshot,
            config,
            evaluations,
        } => {
            let config = ExperimentConfig::load(&config)?;
            let record = harness::metrics_from_snapshot(&config, &snapshot, evaluations)?;
            print!("{}", harness::render_record(&config, &record));
        }
        Command::Validate { config } => {
            let config = ExperimentConfig::load(&config)?;
            config.resolve()?;
            if let Some(sweep) = &config.sweep {
                for cfg in config.expand_sweep()? {
                    cfg.resolve()?;
                }
                println!(
                    "ok: {} (sweep of {} tasks x {} variants)",
                    config.label(),
                    sweep.tasks.len(),
                    sweep.variants.len()
                );
            } else {
                println!("ok: {}", config.label());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { EXIT_CONFIG } else { EXIT_RUNTIME })
        }
    }
}
