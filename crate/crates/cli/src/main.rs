//! `robust-psd` command-line tool.
//!
//! Exit codes: 0 success, 2 usage, 3 input, 4 domain.

mod args;
mod error;
mod estimate;
mod input;
mod output;
mod simulate;
mod theory;

use std::io::{self, BufWriter};
use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::{CliError, CliResult};

const THREADS_VAR: &str = "ROBUST_PSD_THREADS";

/// Caps the rayon pool from the environment; 0 or unset means automatic.
fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_VAR}: expected a non-negative integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("{THREADS_VAR}: {e}")))
}

fn run(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    let out = BufWriter::new(io::stdout().lock());
    match &cli.command {
        Command::Estimate(a) => estimate::run(a, out),
        Command::Theory(t) => theory::run(t, out),
        Command::Simulate(s) => simulate::run(s, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
