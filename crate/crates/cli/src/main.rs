//! `szego`: command-line front end for the kernel engine.
//!
//! Exit codes: 0 success, 1 usage, 2 point outside the domain, 3 tolerance not met,
//! 4 path leaves the domain, 5 failed check.

mod args;
mod commands;
mod output;
mod verify;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let info = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return ExitCode::from(if info { 0 } else { 1 });
        }
    };
    match commands::run(&cli.global, &cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("szego: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
