use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gpforage::expcli::{self, presets, sweep, ExpError, ExperimentSpec};

/// Foraging ecosystem simulator with linear-GP agents.
#[derive(Debug, Parser)]
#[command(name = "gpforage", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration and print its summary row.
    Run {
        /// Config file, or the name of a built-in preset.
        #[arg(long)]
        config: String,
        /// Directory for timeseries.csv, genotypes.csv and summary.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed used as is, overriding rng_seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every swept configuration and replicate.
    Sweep {
        /// Config file, or the name of a built-in preset.
        #[arg(long)]
        config: String,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Built-in experiment configurations.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
}

#[derive(Debug, Subcommand)]
enum PresetsAction {
    /// Print preset names and descriptions.
    List,
}

fn load(config: &str) -> Result<ExperimentSpec, ExpError> {
    let path = Path::new(config);
    if !path.exists() {
        if let Some(preset) = presets::find(config) {
            return Ok(expcli::parse_config(preset.text)?);
        }
    }
    let text = fs::read_to_string(path).map_err(|source| ExpError::Io { path: path.to_path_buf(), source })?;
    Ok(expcli::parse_config(&text)?)
}

fn execute(command: Command) -> Result<(), ExpError> {
    match command {
        Command::Run { config, out, seed } => {
            let spec = load(&config)?;
            let row = sweep::run_single(&spec, seed, out.as_deref())?;
            print!("{}", sweep::summary_text(&[row]));
        }
        Command::Sweep { config, out, jobs } => {
            let spec = load(&config)?;
            let rows = sweep::run_sweep(&spec, &out, jobs)?;
            eprintln!("{} runs written to {}", rows.len(), out.display());
        }
        Command::Presets { action: PresetsAction::List } => {
            for p in &presets::PRESETS {
                println!("{:<30} {}", p.name, p.description());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage_error = e.use_stderr();
            let _ = e.print();
            return if usage_error { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
