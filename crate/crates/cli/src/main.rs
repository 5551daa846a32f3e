//! `unibreak`: config-driven runner for the thin-spectrum experiments.

mod commands;
mod config;
mod error;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_document, resolve, Command};
use error::CliError;
use output::{config_hash, emit, RunManifest};

/// Seed used when `--seed` is not given.
const DEFAULT_SEED: u64 = unibreak_core::experiments::DEFAULT_SEED;

#[derive(Debug, Parser)]
#[command(name = "unibreak", version, about = "Thin-spectrum collapse experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    /// Flat `key = value` config file; omitted keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print the effective config and exit.
    #[arg(long, global = true)]
    dry_run: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Sub {
    /// Thin-spectrum energies and order-parameter elements.
    Spectrum,
    /// Equilibrium order parameter against the symmetry-breaking field.
    Equilibrium,
    /// Observable time series under the non-unitary generator.
    Evolve,
    /// Collapse time against system size.
    CollapseScan,
    /// Selection delays for finite- and zero-overlap starts.
    Regime,
    /// Stochastic-field outcome statistics.
    Born,
    /// Energy drift against system size.
    EnergyDrift,
    /// Thin-sector reduction against the full spin system.
    OracleCheck,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Spectrum => Command::Spectrum,
            Sub::Equilibrium => Command::Equilibrium,
            Sub::Evolve => Command::Evolve,
            Sub::CollapseScan => Command::CollapseScan,
            Sub::Regime => Command::Regime,
            Sub::Born => Command::Born,
            Sub::EnergyDrift => Command::EnergyDrift,
            Sub::OracleCheck => Command::OracleCheck,
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let command = Command::from(cli.command);
    let started = chrono::Utc::now().to_rfc3339();
    let given = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_document(&text)?
        }
        None => Default::default(),
    };
    let resolved = resolve(command, given)?;
    let canonical = resolved.canonical(cli.seed);
    if cli.dry_run {
        print!("{}", resolved.annotated(cli.seed));
        return Ok(());
    }
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let hash = config_hash(&canonical);
    let table = commands::run(&resolved, cli.seed)?;
    let manifest = RunManifest {
        command: command.name().to_string(),
        config_hash: hash.clone(),
        config: canonical,
        seed: cli.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started,
        finished: String::new(),
        outputs: Vec::new(),
    };
    for path in emit(&cli.out, command.name(), &hash, &table, manifest)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("unibreak {}: {e}", Command::from(cli.command).name());
            ExitCode::from(e.exit_code())
        }
    }
}
