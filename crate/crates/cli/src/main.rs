//! `bsg`: command-line driver for the complexity pipeline.
//!
//! Exit codes: 0 success, 1 failed verification checks or unwritable output,
//! 2 usage or validation errors, 3 numerical failures, 4 a maximizer on the
//! boundary of the search box.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use bsg_core::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Core(bsg_core::Error),
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    Usage(String),
    ChecksFailed(usize),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Read { path, source } => {
                write!(f, "cannot read {}: {source}", path.display())
            }
            CliError::Write { path, source } => {
                write!(f, "cannot write {}: {source}", path.display())
            }
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::ChecksFailed(n) => write!(f, "{n} verification check(s) failed"),
        }
    }
}

impl From<bsg_core::Error> for CliError {
    fn from(e: bsg_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::Numerical => 3,
                ErrorKind::Boundary => 4,
            },
            CliError::Read { .. } | CliError::Usage(_) => 2,
            CliError::Write { .. } | CliError::ChecksFailed(_) => 1,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))?;
    }
    match cli.command {
        Command::Complexity(a) => commands::complexity(&a),
        Command::Curve(a) => commands::curve(&a),
        Command::Thresholds(a) => commands::thresholds(&a),
        Command::Density(a) => commands::density(&a),
        Command::ClosedForm(a) => commands::closed_form(&a),
        Command::Verify(a) => commands::verify(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
