//! `logdamp` command line: norm curves, decay-rate reports, special-function
//! tables and single-mode checks.
//!
//! Exit status is 0 when every verification passes, 1 when one fails and 2 on
//! usage, configuration or I/O errors.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use config::{Cli, Command, Flags};

fn dispatch(command: Command, flags: &Flags) -> Result<bool> {
    match command {
        Command::Report => commands::report(flags),
        Command::Curve => commands::curve(flags),
        Command::Specfun => commands::specfun(flags),
        Command::Mode => commands::mode(flags),
        Command::Thresholds => commands::thresholds_cmd(flags),
    }
}

#[cfg(feature = "parallel")]
fn run(command: Command, flags: &Flags) -> Result<bool> {
    match flags.threads {
        None => dispatch(command, flags),
        Some(0) => anyhow::bail!("--threads must be at least 1"),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(k).build()?;
            pool.install(|| dispatch(command, flags))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn run(command: Command, flags: &Flags) -> Result<bool> {
    if flags.threads == Some(0) {
        anyhow::bail!("--threads must be at least 1");
    }
    dispatch(command, flags)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = cli.flags.resolve().and_then(|flags| run(cli.command, &flags));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("logdamp {}: {e:#}", cli.command.as_str());
            ExitCode::from(2)
        }
    }
}
