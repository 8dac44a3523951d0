//! Command-line runner: build corpus snapshots, run batches of questions
//! through the engine or a baseline, and score predictions.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 when some
//! examples failed but the run completed.

mod commands;

use clap::error::ErrorKind;
use clap::Parser;
use commands::{cmd_eval, cmd_index, cmd_run, Cli};

fn main() {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    let result = match cli.command {
        commands::Command::Index(args) => cmd_index(args),
        commands::Command::Run(args) => cmd_run(args),
        commands::Command::Eval(args) => cmd_eval(args),
    };

    match result {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
