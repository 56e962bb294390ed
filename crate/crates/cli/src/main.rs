//! `teleport-sim`: verification suites and parameter sweeps for
//! beam-splitting teleportation on coherent spans.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod report;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coherent_teleport::Error;

use config::{Command, Flags, Format};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for bad input, 1 for numerical failures.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(
                Error::InvalidParameter(_)
                | Error::InvalidState(_)
                | Error::DimensionMismatch { .. }
                | Error::UnsupportedRegion(_)
                | Error::InvalidSplitting(_),
            ) => 2,
            CliError::Core(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "teleport-sim", version, about = "Exact beam-splitting teleportation on coherent spans")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Run every invariant and protocol check at one d.
    Verify(Flags),
    /// Enumerate outcomes and recovered states at one d.
    Teleport(Flags),
    /// Evaluate a d grid; CSV by default.
    Sweep(Flags),
    /// Run the region-separated protocol with Bob's local filter.
    Spatial(Flags),
}

fn execute(command: Command, flags: &Flags) -> Result<bool, CliError> {
    let cfg = config::resolve(command, flags)?;
    let report = run::run(&cfg)?;
    let mut buf = Vec::new();
    match cfg.format {
        Format::Json => buf.extend_from_slice(report.to_json().as_bytes()),
        Format::Csv => report.write_csv(&mut buf)?,
    }
    match &cfg.output {
        Some(path) => std::fs::write(path, &buf).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        None => std::io::stdout().write_all(&buf)?,
    }
    if let Some(c) = report.first_failure() {
        let at = c.d.map(|d| format!(" at d = {d}")).unwrap_or_default();
        eprintln!("check failed: {}{at}: residual {:e} exceeds tolerance {:e}", c.name, c.residual, c.tolerance);
        return Ok(false);
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (command, flags) = match &cli.command {
        Sub::Verify(f) => (Command::Verify, f),
        Sub::Teleport(f) => (Command::Teleport, f),
        Sub::Sweep(f) => (Command::Sweep, f),
        Sub::Spatial(f) => (Command::Spatial, f),
    };
    match execute(command, flags) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
