//! Command line front end for the sequential minimum-threshold test.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use minseq::harness::{
    ci_trace, ci_trace_to_csv, emit_outputs, run_monte_carlo, summarize_bounds, ExperimentConfig,
    OutputFormat,
};

#[derive(Parser)]
#[command(name = "minseq", about = "Sequential test of whether the minimum arm mean is below a threshold", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo experiment described by a config file.
    Run {
        /// Path to the TOML experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Override the number of replications.
        #[arg(long)]
        reps: Option<u64>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for summary.csv and summary.json (defaults to the
        /// config's out_dir, else the current directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the characteristic time, oracle weights and lower bounds.
    Bounds {
        #[arg(long)]
        config: PathBuf,
    },
    /// Trace confidence bounds on the minimum under round-robin sampling.
    CiTrace {
        #[arg(long)]
        config: PathBuf,
        /// Number of observations to collect.
        #[arg(long)]
        rounds: u64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> minseq::Result<()> {
    match cli.command {
        Command::Run {
            config,
            reps,
            seed,
            out,
        } => {
            let mut config = ExperimentConfig::from_path(&config)?;
            if let Some(reps) = reps {
                config.replications = reps;
            }
            if let Some(seed) = seed {
                config.master_seed = seed;
            }
            let out_dir = out
                .or_else(|| config.out_dir.clone())
                .unwrap_or_else(|| PathBuf::from("."));
            let summary = run_monte_carlo(&config)?;
            let csv_path = out_dir.join("summary.csv");
            emit_outputs(&summary, OutputFormat::Csv, &csv_path)?;
            emit_outputs(&summary, OutputFormat::Json, &out_dir.join("summary.json"))?;
            for r in &summary.records {
                println!(
                    "{}+{} delta={}: mean_tau={:.1} (se {:.1}), error_rate={:.4}, inconclusive={:.4}",
                    r.sampling.label(),
                    r.stopping.label(),
                    r.delta,
                    r.mean_tau,
                    r.se_tau,
                    r.error_rate,
                    r.inconclusive_rate
                );
            }
            println!("wrote {}", csv_path.display());
            Ok(())
        }
        Command::Bounds { config } => {
            let config = ExperimentConfig::from_path(&config)?;
            let instance = config.instance()?;
            for &delta in &config.deltas {
                let report = summarize_bounds(&instance, delta)?;
                let json = serde_json::to_string_pretty(&report)
                    .expect("bounds report serializes");
                println!("{json}");
            }
            Ok(())
        }
        Command::CiTrace { config, rounds } => {
            let config = ExperimentConfig::from_path(&config)?;
            let instance = config.instance()?;
            let delta = *config.deltas.first().ok_or_else(|| {
                minseq::Error::Config("config must list at least one delta".into())
            })?;
            let rows = ci_trace(&instance, delta, rounds, config.master_seed)?;
            print!("{}", ci_trace_to_csv(&rows));
            Ok(())
        }
    }
}
