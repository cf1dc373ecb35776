use std::process::ExitCode;

use bandcov_cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bandcov: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
