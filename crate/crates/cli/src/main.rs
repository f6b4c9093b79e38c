//! `quakecast` — pipeline CLI for earthquake-catalog neural regression.
//!
//! Subcommands run the pipeline stages in order:
//! `synth` (optional) → `ingest` → `compare` → `train-final` → `report`.

use clap::{Args, Parser, Subcommand};
use quakecast_cli::config::PipelineConfig;
use quakecast_cli::error::CliError;
use quakecast_cli::{artifacts, commands};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "quakecast", version, about = "Earthquake-catalog neural regression pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Pipeline configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured top-level seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Path to a report JSON; defaults to `<out_dir>/report.json`.
    path: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic catalog CSV from `[catalog.synth]`.
    Synth(CommonArgs),
    /// Parse or synthesize the catalog, encode, split, and fit the scaler.
    Ingest(CommonArgs),
    /// Train the preliminary models on the 200-sample protocol and rank them.
    Compare(CommonArgs),
    /// Train the final network and write its model, report, and figures.
    TrainFinal(CommonArgs),
    /// Print the fixed-format summary of a stored report.
    Report(ReportArgs),
}

fn load_config(args: &CommonArgs) -> Result<PipelineConfig, CliError> {
    let mut config = PipelineConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(args) => commands::cmd_synth(&load_config(&args)?),
        Command::Ingest(args) => commands::cmd_ingest(&load_config(&args)?),
        Command::Compare(args) => commands::cmd_compare(&load_config(&args)?),
        Command::TrainFinal(args) => commands::cmd_train_final(&load_config(&args)?),
        Command::Report(args) => {
            let path = match (&args.path, &args.out, &args.config) {
                (Some(path), _, _) => path.clone(),
                (None, Some(out), _) => out.join(artifacts::REPORT_JSON),
                (None, None, Some(config_path)) => {
                    PipelineConfig::load(config_path)?.out_dir.join(artifacts::REPORT_JSON)
                }
                (None, None, None) => {
                    return Err(CliError::Config(
                        "report needs a path, --out, or --config".into(),
                    ))
                }
            };
            commands::cmd_report(&path)
        }
    }
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
