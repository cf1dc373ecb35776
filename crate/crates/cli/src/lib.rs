//! Command-line front end for `bandcov`: CSV ingestion, the bandedness test,
//! bandwidth estimation, simulation presets and plot-ready output.

pub mod commands;
pub mod error;
pub mod ingest;
pub mod options;
pub mod output;

use clap::{Parser, Subcommand};

pub use error::{CliError, CliResult};
pub use ingest::{ingest_csv, ingest_reader};
pub use options::{Format, Options};

#[derive(Debug, Parser)]
#[command(name = "bandcov", version, about = "Bandedness test and bandwidth estimation for high-dimensional covariance matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test H0: Σ = B_k(Σ) at one k.
    Test(Options),
    /// Test every k = 0..=k_max and emit W, V, T, p-values, T̃ and d_nk.
    Scan(Options),
    /// Estimate the bandwidth with one method.
    Bandwidth(Options),
    /// Run a Monte-Carlo design (preset and/or config keys).
    #[command(after_help = simulate_help())]
    Simulate(Options),
    /// Emit the unbiased lag profile D̂_q, q = 0..p-1.
    Profile(Options),
}

fn simulate_help() -> String {
    format!(
        "Presets: {}\nConfig keys beyond the flags: n, p, gammas, innovation (normal|gamma), ceiling",
        bandcov::simgen::preset_names().join(", ")
    )
}

impl Command {
    pub fn options(&self) -> &Options {
        match self {
            Command::Test(o)
            | Command::Scan(o)
            | Command::Bandwidth(o)
            | Command::Simulate(o)
            | Command::Profile(o) => o,
        }
    }
}

/// Resolves configuration, sizes the thread pool, runs the command and
/// writes its artifact.
pub fn run(command: Command) -> CliResult<()> {
    let simulate = matches!(command, Command::Simulate(_));
    let o = command.options().clone().resolve(simulate)?;
    let body = || match &command {
        Command::Test(_) => commands::cmd_test(&o),
        Command::Scan(_) => commands::cmd_scan(&o),
        Command::Bandwidth(_) => commands::cmd_bandwidth(&o),
        Command::Simulate(_) => commands::cmd_simulate(&o),
        Command::Profile(_) => commands::cmd_profile(&o),
    };
    let bytes = match o.threads {
        Some(0) => return Err(CliError::Usage("--threads must be >= 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(body)?,
        None => body()?,
    };
    match &o.output {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| CliError::Output(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| CliError::Output(e.to_string()))
        }
    }
}
