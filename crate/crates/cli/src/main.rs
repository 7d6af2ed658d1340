//! `ftirchem` command-line tool.
//!
//! Exit status: 0 success, 1 invalid input or usage, 2 missing file or other
//! I/O failure, 3 numeric failure inside the library.

mod commands;
mod options;

use std::process::ExitCode;

use clap::Parser;

use options::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Train(a) => commands::train(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Ttest(a) => commands::ttest(&a),
        Command::Bfe(a) => commands::bfe(&a),
        Command::Window(a) => commands::window(&a),
        Command::Sweepk(a) => commands::sweepk(&a),
        Command::Project(a) => commands::project(&a),
        Command::Synth(a) => commands::synth(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
