//! `rotrate` command-line front end.
//!
//! Every subcommand resolves its flags (or a `--config` JSON file) into one
//! serializable configuration, echoes it to stderr, and optionally writes it
//! to `--echo-config`. Feeding that file back through `--config` reproduces
//! the run byte for byte.
//!
//! Exit codes: `0` success, `2` input or configuration error, `3` no valid
//! result.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub mod estimate;
pub mod simulate;
pub mod sweep;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NO_RESULT: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "rotrate", version, about = "Rotation rate of a fixated rigid body from tracked points")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize track files from a parametric rotating scene.
    Simulate(simulate::SimulateArgs),
    /// Estimate the rotation rate of every tracked point.
    Estimate(estimate::EstimateArgs),
    /// Estimate, then group points into bodies by rotation rate.
    Segment(estimate::SegmentArgs),
    /// Relative error of the estimate versus half field of view.
    Sweep(sweep::SweepArgs),
}

/// Flags shared by all subcommands for configuration round trips.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigIo {
    /// Load the full configuration from a JSON file; other flags are ignored.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the resolved configuration to this path.
    #[arg(long, global = true)]
    pub echo_config: Option<PathBuf>,
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    pub fn no_result(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_NO_RESULT,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<rotrate_core::Error> for Failure {
    fn from(e: rotrate_core::Error) -> Self {
        Failure::input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(a) => simulate::run(a),
        Command::Estimate(a) => estimate::run_estimate(a),
        Command::Segment(a) => estimate::run_segment(a),
        Command::Sweep(a) => sweep::run(a),
    }
}

/// Replaces `cfg` with the contents of `--config` when given, then echoes the
/// resolved configuration.
pub(crate) fn resolve<C: Serialize + DeserializeOwned>(cfg: C, io: &ConfigIo) -> CliResult<C> {
    let cfg = match &io.config {
        Some(path) => {
            let text = read_text(path)?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::input(format!("config {}: {e}", path.display())))?
        }
        None => cfg,
    };
    let echo = serde_json::to_string_pretty(&cfg).expect("config serializes");
    eprintln!("{echo}");
    if let Some(path) = &io.echo_config {
        write_text(Some(path), &format!("{echo}\n"))?;
    }
    Ok(cfg)
}

pub(crate) fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Writes to `path`, or stdout when `None`.
pub(crate) fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
