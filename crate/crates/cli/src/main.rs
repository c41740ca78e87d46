//! `ccp`: exact coupon collector moments from the command line.
//!
//! Results go to stdout as JSON (or CSV); progress and error messages go to
//! stderr. Exit codes: 0 success, 2 usage, 3 invalid instance, 4 state cap,
//! 5 internal.

mod args;
mod commands;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = commands::command_name(&cli.command);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match commands::run(&cli.command, &mut out) {
        Ok(()) => match out.flush() {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("ccp: {e}");
                ExitCode::from(5)
            }
        },
        Err(failure) => {
            eprintln!("ccp {name}: {}", failure.message());
            if !matches!(failure, report::Failure::Usage(_)) {
                let _ = report::write_error(&mut out, commands::SCHEMA, name, &failure);
                let _ = out.flush();
            }
            ExitCode::from(failure.exit_code())
        }
    }
}
