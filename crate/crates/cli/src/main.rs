//! `penrose`: build data families, run the verification pipelines, sweep
//! parameters and export traces.
//!
//! Exit status: 0 when every report passes, 1 when a margin or a
//! consistency check fails, 2 on violated preconditions or inadmissible
//! input, 3 on solver or output failures, 64 on malformed invocations.

mod commands;
mod config;

use clap::Parser;
use config::{Cli, Command, RunConfig, UsageError};

pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Verify(args) => commands::cmd_verify(&RunConfig::resolve(&args, None, None)?),
        Command::Sweep { common, ranges } => commands::cmd_sweep(&RunConfig::resolve(&common, Some(&ranges), None)?),
        Command::Trace { common, t_stop } => commands::cmd_trace(&RunConfig::resolve(&common, None, t_stop)?),
        Command::Families => commands::cmd_families(),
    }
}

fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        EXIT_USAGE
    } else if let Some(e) = err.downcast_ref::<penrose_core::Error>() {
        if e.is_precondition() {
            EXIT_PRECONDITION
        } else {
            EXIT_SOLVER
        }
    } else {
        EXIT_SOLVER
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("penrose: {e:#}");
            exit_code(&e)
        }
    };
    std::process::exit(code);
}
