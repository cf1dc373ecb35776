//! Run configuration: command-line flags merged over an optional
//! `key = value` file.

use std::path::PathBuf;

use bandcov::simgen::config::{parse_key_values, Entry};
use clap::{Args, ValueEnum};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every command. Unset values fall back to the config
/// file, then to the documented defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Input CSV, rows = observations, columns = variables; `-` is stdin.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// The first input line is a header.
    #[arg(long)]
    pub header: bool,
    /// Bandwidth under the null [test: 0; simulate: preset].
    #[arg(long)]
    pub k: Option<usize>,
    /// Largest k [scan: min(p-2, n); fixed/changepoint ceiling M: min(p-3, 30);
    /// bl-a/bl-b: min(p-1, 4n); simulate: ceiling M].
    #[arg(long = "k-max")]
    pub k_max: Option<usize>,
    /// Significance level [0.05].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// fixed, changepoint, bl-a or bl-b [bandwidth: fixed]; comma list for simulate.
    #[arg(long)]
    pub method: Option<String>,
    /// Exponent of n in the scaled differences [0.5].
    #[arg(long)]
    pub delta: Option<f64>,
    /// Threshold of the fixed rule [0.06].
    #[arg(long)]
    pub theta: Option<f64>,
    /// Local-linear span of the change-point rule [0.75].
    #[arg(long)]
    pub span: Option<f64>,
    /// Random splits of the sample-splitting rules [50].
    #[arg(long)]
    pub splits: Option<usize>,
    /// Master seed [20100401].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads [all cores]; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output format [json].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file [stdout].
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Simulation preset, see `bandcov simulate --help`.
    #[arg(long)]
    pub preset: Option<String>,
    /// Monte-Carlo replications [preset].
    #[arg(long)]
    pub reps: Option<usize>,
    /// Flat `key = value` file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Design keys (`n`, `p`, `gammas`, `innovation`, `ceiling`) read from
    /// the config file, passed on to the simulation design.
    #[arg(skip)]
    pub design: Vec<Entry>,
}

/// Keys a config file may set for every command.
pub const RUN_KEYS: &[&str] = &[
    "input", "header", "k", "k_max", "alpha", "method", "delta", "theta", "span", "splits",
    "seed", "master_seed", "threads", "format", "output", "preset", "reps",
];

/// Extra keys accepted by `simulate`.
pub const SIMULATE_KEYS: &[&str] = &["n", "p", "gammas", "innovation", "ceiling"];

fn parse<T: std::str::FromStr>(e: &Entry) -> CliResult<T> {
    e.value.parse().map_err(|_| {
        CliError::Usage(format!(
            "config line {}: `{}` is not a valid value for `{}`",
            e.line, e.value, e.key
        ))
    })
}

fn fill<T>(slot: &mut Option<T>, v: CliResult<T>) -> CliResult<()> {
    if slot.is_none() {
        *slot = Some(v?);
    }
    Ok(())
}

impl Options {
    /// Reads `--config` if given and fills every flag left unset.
    pub fn resolve(mut self, simulate: bool) -> CliResult<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        self.merge_text(&text, simulate)?;
        Ok(self)
    }

    pub fn merge_text(&mut self, text: &str, simulate: bool) -> CliResult<()> {
        let entries = parse_key_values(text).map_err(|e| CliError::Usage(e.to_string()))?;
        for e in &entries {
            match e.key.as_str() {
                "input" => fill(&mut self.input, Ok(PathBuf::from(&e.value)))?,
                "header" => self.header |= parse::<bool>(e)?,
                "k" => fill(&mut self.k, parse(e))?,
                "k_max" => fill(&mut self.k_max, parse(e))?,
                "alpha" => fill(&mut self.alpha, parse(e))?,
                "method" => fill(&mut self.method, Ok(e.value.clone()))?,
                "delta" => fill(&mut self.delta, parse(e))?,
                "theta" => fill(&mut self.theta, parse(e))?,
                "span" => fill(&mut self.span, parse(e))?,
                "splits" => fill(&mut self.splits, parse(e))?,
                "seed" | "master_seed" => fill(&mut self.seed, parse(e))?,
                "threads" => fill(&mut self.threads, parse(e))?,
                "format" => fill(
                    &mut self.format,
                    Format::from_str(&e.value, true).map_err(|_| {
                        CliError::Usage(format!("config line {}: unknown format `{}`", e.line, e.value))
                    }),
                )?,
                "output" => fill(&mut self.output, Ok(PathBuf::from(&e.value)))?,
                "preset" => fill(&mut self.preset, Ok(e.value.clone()))?,
                "reps" => fill(&mut self.reps, parse(e))?,
                key if simulate && SIMULATE_KEYS.contains(&key) => self.design.push(e.clone()),
                key => {
                    return Err(CliError::Usage(format!(
                        "config line {}: unknown key `{key}`",
                        e.line
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Json)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let mut o = Options {
            k: Some(3),
            ..Default::default()
        };
        o.merge_text("k = 1\nalpha = 0.1\nheader = true\nformat = csv\n", false)
            .unwrap();
        assert_eq!(o.k, Some(3));
        assert_eq!(o.alpha, Some(0.1));
        assert!(o.header);
        assert_eq!(o.format(), Format::Csv);
    }

    #[test]
    fn unknown_and_bad_keys() {
        let mut o = Options::default();
        let e = o.merge_text("alpha = 0.05\nbogus = 1\n", false).unwrap_err();
        assert!(matches!(&e, CliError::Usage(m) if m.contains("line 2") && m.contains("bogus")));
        assert!(o.merge_text("k = two\n", false).is_err());
        // design keys only for simulate
        assert!(Options::default().merge_text("n = 40\n", false).is_err());
        let mut s = Options::default();
        s.merge_text("n = 40\ngammas = 1, 0.5\n", true).unwrap();
        assert_eq!(s.design.len(), 2);
    }
}
