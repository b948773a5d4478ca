use std::process::ExitCode;

use ais_cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ais: {e}");
            ExitCode::from(e.code)
        }
    }
}
