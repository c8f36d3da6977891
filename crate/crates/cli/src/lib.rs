//! Command-line front end for `qgeo`.
//!
//! Every subcommand writes one report (JSON by default, flat CSV on request)
//! and exits with 0 when all checks pass or the command only computes, 1 when
//! a certificate fails, and 2 on bad input or configuration.

pub mod args;
mod commands;
mod report;

use std::path::PathBuf;

pub use args::Cli;
pub use report::Report;

/// Failures that abort a command before any report is written.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },
    #[error(transparent)]
    Library(#[from] qgeo::Error),
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Run a parsed command and render its report. Returns the bytes and the exit code.
pub fn run(cli: &Cli) -> Result<(Vec<u8>, i32), CliError> {
    let outcome = commands::execute(&cli.command)?;
    let code = exit_code(outcome.pass);
    let bytes = Report::new(cli, outcome.pass, outcome.result).render(cli.global.format)?;
    Ok((bytes, code))
}

/// Only a failed certificate is a failure; pure computations exit cleanly.
pub fn exit_code(pass: Option<bool>) -> i32 {
    if pass == Some(false) {
        EXIT_FAIL
    } else {
        EXIT_PASS
    }
}
