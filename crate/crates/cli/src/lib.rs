//! The `lhy-lab` command-line tool.
//!
//! [`run`] parses arguments, executes one subcommand and maps the outcome
//! to an exit code: 0 on success, 1 when an input or a checked bound is
//! rejected, 2 when a numerical procedure fails, 64 on a usage error.

use std::ffi::OsString;
use std::fmt;
use std::path::Path;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

pub mod args;
mod commands;
pub mod config;
pub mod output;

use args::{Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// Bad input, or a bound that was checked and does not hold.
    Validation(String),
    /// Non-convergence or another breakdown of a numerical method.
    Numerical(String),
}

impl Failure {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::Validation(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "validation failed: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<lhy_core::Error> for Failure {
    fn from(e: lhy_core::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("LHYLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Validation(format!("LHYLAB_THREADS must be a positive integer, got `{raw}`")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Run the tool on `argv` (program name first) and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return EXIT_OK;
        }
        Err(e) => {
            let _ = e.print();
            eprintln!("\n{}", Cli::command().render_long_help());
            return EXIT_USAGE;
        }
    };
    match configure_threads().and_then(|()| dispatch(cli.command)) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("lhy-lab: {f}");
            f.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Scatter(a) => commands::scatter::scatter(a),
        Command::Approx(a) => commands::scatter::approx(a),
        Command::Bogo(b) => commands::bogo::bogo(b),
        Command::Lhy(a) => commands::bogo::lhy(a),
        Command::Chi(a) => commands::chi::chi(a),
        Command::Params(p) => commands::params::params(p),
        Command::Matloc(a) => commands::matloc::matloc(a),
        Command::Pipeline(a) => commands::pipeline::pipeline(a),
    }
}
