//! `cgwitness` command-line tool.

mod commands;

use std::process::ExitCode;

use clap::Parser;

use commands::Cli;

/// Exit code for parse, configuration and parameter errors.
const EXIT_CONFIG: u8 = 2;
/// Exit code for numerical failures.
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<cgwitness::Error>() {
        Some(cgwitness::Error::Convergence { .. } | cgwitness::Error::Propagation { .. }) => {
            EXIT_NUMERICAL
        }
        _ => EXIT_CONFIG,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
