//! `cqed`: configuration-driven runner for cavity, HOM and dispersive studies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod external;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use crate::config::LoadedConfig;
use crate::error::CliError;
use crate::output::Stamp;

#[derive(Parser, Debug)]
#[command(name = "cqed", version, about = "Analytic cavity-QED experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Dotted-path override, e.g. `dispersive.m=5` or `qubits.0.l_j_nh=9.0`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List analytic modes with unperturbed and probe-shifted frequencies.
    Modes(Common),
    /// Two-photon coincidence curve g2(tau) through the two-port cavity.
    Hom(Common),
    /// Dispersive parameters at one configuration or along a position/inductance sweep.
    Dispersive(Common),
    /// Validate an external mode file against the configuration.
    IngestCheck {
        #[command(flatten)]
        common: Common,
        /// Mode file; defaults to `modes.external` from the configuration.
        file: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, file) = match &cli.command {
        Command::Modes(c) | Command::Hom(c) | Command::Dispersive(c) => (c, None),
        Command::IngestCheck { common, file } => (common, file.as_deref()),
    };
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?;
    }
    let lc = LoadedConfig::load(&common.config, &common.overrides)?;
    info!("config {} (sha256 {})", common.config.display(), lc.hash);
    let outcome = match &cli.command {
        Command::Modes(_) => commands::modes(&lc),
        Command::Hom(_) => commands::hom(&lc),
        Command::Dispersive(_) => commands::dispersive(&lc),
        Command::IngestCheck { .. } => commands::ingest_check(&lc, file),
    }?;
    let stamp = Stamp { config_hash: lc.hash.clone(), mode_source: outcome.mode_source };
    for p in output::write_all(&common.out, &stamp, &outcome.artifacts)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
