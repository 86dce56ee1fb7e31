//! Command-line front-end for `kindist`: every computation as a subcommand
//! reading a flat config file and printing `key=value` records.

pub mod commands;
pub mod config;
pub mod error;
pub mod record;
pub mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use kindist::DistanceMethod;

use crate::commands::{Artifact, Outcome};
use crate::config::Config;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "kindist", version, about = "Distance to the global Maxwellian, nearest-Maxwellian projection and kinetic checks")]
pub struct Cli {
    /// Flat `section.key = value` scenario file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Print the record as a JSON object instead of `key=value` lines.
    #[arg(long, global = true)]
    pub json: bool,

    /// Output file: the trace CSV for `relax`, the minimizer field for
    /// `project`, the record itself otherwise.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Override a config entry, `section.key=value`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Density, momentum, energy, entropy and per-cell mean velocity.
    Moments,
    /// Distance from the reference Maxwellian.
    Dist {
        #[arg(long, default_value = "difference", value_parser = ["difference", "bregman"])]
        method: String,
    },
    /// Nearest Maxwellian in the moment class `class.*`.
    Project {
        /// Also solve the discrete problem by dual Newton and report the gap.
        #[arg(long)]
        oracle: bool,
    },
    /// BGK relaxation trace.
    Relax,
    /// Collision operator and its invariant residuals.
    Collide,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Run one command, writing to `stdout`.
pub fn run<W: Write>(cli: &Cli, stdout: &mut W) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for o in &cli.overrides {
        cfg.set(o)?;
    }
    let outcome: Outcome = match &cli.command {
        Command::Moments => commands::cmd_moments(&cfg)?,
        Command::Dist { method } => commands::cmd_dist(&cfg, method.parse::<DistanceMethod>()?)?,
        Command::Project { oracle } => commands::cmd_project(&cfg, *oracle)?,
        Command::Relax => commands::cmd_relax(&cfg)?,
        Command::Collide => commands::cmd_collide(&cfg)?,
    };
    let rendered = if cli.json {
        outcome.record.to_json()
    } else {
        outcome.record.to_text()
    };
    let stdout_err = |e| CliError::io(Path::new("<stdout>"), e);
    match (outcome.artifact, &cli.out) {
        (Some(Artifact::Csv(csv)), None) => stdout.write_all(&csv).map_err(stdout_err)?,
        (Some(Artifact::Csv(csv)), Some(path)) => {
            write_file(path, &csv)?;
            stdout.write_all(rendered.as_bytes()).map_err(stdout_err)?;
        }
        (Some(Artifact::Field(field)), Some(path)) => {
            let mut bytes = Vec::new();
            field.write_text(&mut bytes)?;
            write_file(path, &bytes)?;
            stdout.write_all(rendered.as_bytes()).map_err(stdout_err)?;
        }
        (_, Some(path)) => write_file(path, rendered.as_bytes())?,
        (_, None) => stdout.write_all(rendered.as_bytes()).map_err(stdout_err)?,
    }
    Ok(())
}
