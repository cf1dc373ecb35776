//! Seeded, replication-parallel simulation designs.
//!
//! Replication `r` of a design with master seed `s` draws everything it
//! needs from ChaCha8 keyed by `s` on stream `r`: first the data matrix,
//! then (for the sample-splitting selectors) one `u64` that seeds the
//! splits. Results are collected in replication order, so summaries do not
//! depend on the thread count.

use rand::RngCore;
use rayon::prelude::*;

use super::config::{parse_key_values, parse_real_list, Entry};
use super::model::{replication_rng, InnovationLaw, MaModelSpec};
use super::population::population_quantities;
use crate::band_test::{self, DEFAULT_ALPHA};
use crate::bandwidth::{
    self, bl_bandwidth, BlVariant, Method, DEFAULT_DELTA, DEFAULT_SPAN, DEFAULT_SPLITS,
    DEFAULT_THETA,
};
use crate::error::{Error, Result};
use crate::ustat;
use rand_chacha::ChaCha8Rng;

/// Runs `f` for replications `0..reps`, each with its own stream.
pub fn replicate<T, F>(master_seed: u64, reps: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> Result<T> + Sync,
{
    if reps == 0 {
        return Err(Error::InvalidParameter("replication count must be >= 1".into()));
    }
    (0..reps)
        .into_par_iter()
        .map(|r| f(r, &mut replication_rng(master_seed, r as u64)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    /// Rejection frequency of the test of `H_{k,0}`.
    Test { k: usize },
    /// Bias of each bandwidth estimator against the true `k0`.
    Bandwidth { methods: Vec<Method> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub name: String,
    /// `γ_0, …, γ_{k0}`.
    pub gammas: Vec<f64>,
    pub innovation: InnovationLaw,
    pub n: usize,
    pub p: usize,
    pub reps: usize,
    pub alpha: f64,
    pub delta: f64,
    pub theta: f64,
    pub span: f64,
    pub splits: usize,
    /// Ceiling `M` of the difference sequence; `None` means the default.
    pub ceiling: Option<usize>,
    pub master_seed: u64,
    pub task: Task,
}

/// Master seed used by presets unless overridden.
pub const DEFAULT_MASTER_SEED: u64 = 20_100_401;

fn base(name: &str, tail: &[f64], n: usize, p: usize, reps: usize, task: Task) -> Design {
    let mut gammas = vec![1.0];
    gammas.extend_from_slice(tail);
    Design {
        name: name.to_string(),
        gammas,
        innovation: InnovationLaw::StandardNormal,
        n,
        p,
        reps,
        alpha: DEFAULT_ALPHA,
        delta: DEFAULT_DELTA,
        theta: DEFAULT_THETA,
        span: DEFAULT_SPAN,
        splits: DEFAULT_SPLITS,
        ceiling: None,
        master_seed: DEFAULT_MASTER_SEED,
        task,
    }
}

const ALL_METHODS: [Method; 4] = [
    Method::FixedThreshold,
    Method::ChangePoint,
    Method::BLa,
    Method::BLb,
];

/// Preset names understood by [`preset`].
pub fn preset_names() -> &'static [&'static str] {
    &[
        "table1a", "table1b", "table1b-half", "table1c", "table1c-small", "table1d",
        "table2a", "table2a-small", "table2b",
        "table3-bw3", "table3-bw5", "table3-bw10", "table3-bw15",
    ]
}

/// Size designs (`table1*`) test the true bandwidth, power designs
/// (`table2*`) test one below it, bandwidth designs (`table3-*`) run all
/// four estimators.
pub fn preset(name: &str) -> Result<Design> {
    let size = |tail: &[f64]| Task::Test { k: tail.len() };
    let power = |tail: &[f64]| Task::Test { k: tail.len() - 1 };
    let bw = || Task::Bandwidth {
        methods: ALL_METHODS.to_vec(),
    };
    let bw10: Vec<f64> = [[0.2; 5], [0.4; 5]].concat();
    let bw15: Vec<f64> = [&[0.2; 10][..], &[0.4; 5][..]].concat();
    let d = match name {
        "table1a" => base(name, &[], 40, 100, 1000, size(&[])),
        "table1b" => base(name, &[1.0], 40, 100, 1000, size(&[1.0])),
        "table1b-half" => base(name, &[0.5], 40, 100, 1000, size(&[0.5])),
        "table1c" => base(name, &[1.0, 1.0], 40, 100, 1000, size(&[1.0, 1.0])),
        "table1c-small" => base(name, &[0.5, 0.25], 40, 100, 1000, size(&[0.5, 0.25])),
        "table1d" => base(name, &[0.4; 5], 40, 100, 1000, size(&[0.4; 5])),
        "table2a" => base(name, &[1.0, 1.0], 40, 100, 1000, power(&[1.0, 1.0])),
        "table2a-small" => base(name, &[0.5, 0.25], 40, 100, 1000, power(&[0.5, 0.25])),
        "table2b" => base(name, &[0.4; 5], 40, 100, 1000, power(&[0.4; 5])),
        "table3-bw3" => base(name, &[1.0; 3], 40, 200, 100, bw()),
        "table3-bw5" => base(name, &[0.4; 5], 40, 200, 100, bw()),
        "table3-bw10" => base(name, &bw10, 40, 200, 100, bw()),
        "table3-bw15" => base(name, &bw15, 40, 200, 100, bw()),
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(d)
}

/// Keys accepted by [`Design::from_entries`].
pub const DESIGN_KEYS: &[&str] = &[
    "preset", "n", "p", "gammas", "innovation", "reps", "alpha", "delta", "theta",
    "master_seed", "k", "method", "span", "splits", "ceiling",
];

fn parse_num<T: std::str::FromStr>(e: &Entry) -> Result<T> {
    e.value.parse().map_err(|_| Error::Config {
        line: e.line,
        msg: format!("`{}` is not a valid value for `{}`", e.value, e.key),
    })
}

impl Design {
    /// Builds a design from `key = value` text.
    pub fn from_config_text(text: &str) -> Result<Design> {
        Self::from_entries(&parse_key_values(text)?)
    }

    /// Starts from `preset` when given; other keys override. Without a
    /// preset `gammas` is required, and the task is the test of `k`
    /// (default `k0`) unless `method` is set.
    pub fn from_entries(entries: &[Entry]) -> Result<Design> {
        if let Some(e) = entries.iter().find(|e| !DESIGN_KEYS.contains(&e.key.as_str())) {
            return Err(Error::Config {
                line: e.line,
                msg: format!("unknown key `{}`", e.key),
            });
        }
        let get = |k: &str| entries.iter().find(|e| e.key == k);
        let mut d = match get("preset") {
            Some(e) => preset(&e.value)?,
            None => {
                let g = get("gammas").ok_or_else(|| Error::Config {
                    line: 0,
                    msg: "either `preset` or `gammas` is required".into(),
                })?;
                let gammas = parse_real_list(&g.value)?;
                if gammas.is_empty() {
                    return Err(Error::Config {
                        line: g.line,
                        msg: "`gammas` is empty".into(),
                    });
                }
                let mut d = base("custom", &[], 40, 100, 1000, Task::Test { k: 0 });
                d.task = Task::Test { k: gammas.len() - 1 };
                d.gammas = gammas;
                d
            }
        };
        if let (Some(e), Some(_)) = (get("gammas"), get("preset")) {
            d.gammas = parse_real_list(&e.value)?;
        }
        for e in entries {
            match e.key.as_str() {
                "n" => d.n = parse_num(e)?,
                "p" => d.p = parse_num(e)?,
                "reps" => d.reps = parse_num(e)?,
                "alpha" => d.alpha = parse_num(e)?,
                "delta" => d.delta = parse_num(e)?,
                "theta" => d.theta = parse_num(e)?,
                "span" => d.span = parse_num(e)?,
                "splits" => d.splits = parse_num(e)?,
                "ceiling" => d.ceiling = Some(parse_num(e)?),
                "master_seed" => d.master_seed = parse_num(e)?,
                "innovation" => d.innovation = e.value.parse()?,
                "k" => d.task = Task::Test { k: parse_num(e)? },
                "method" => {
                    let methods = e
                        .value
                        .split(',')
                        .map(|m| m.trim().parse())
                        .collect::<Result<Vec<Method>>>()?;
                    d.task = Task::Bandwidth { methods };
                }
                _ => {}
            }
        }
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidParameter("replication count must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        self.model(0)?;
        if let Task::Test { k } = self.task {
            if k + 2 > self.p {
                return Err(Error::BandwidthOutOfRange {
                    k,
                    max: self.p.saturating_sub(2),
                });
            }
        }
        Ok(())
    }

    pub fn k0(&self) -> usize {
        self.gammas.len() - 1
    }

    pub fn model(&self, seed: u64) -> Result<MaModelSpec> {
        MaModelSpec::new(self.gammas.clone(), self.innovation, self.n, self.p, seed)
    }

    /// Difference-sequence ceiling actually used.
    pub fn effective_ceiling(&self) -> usize {
        self.ceiling.unwrap_or_else(|| bandwidth::default_ceiling(self.p))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectionRow {
    pub k: usize,
    pub rejections: usize,
    pub rate: f64,
    /// Binomial standard error `sqrt(rate (1 - rate) / reps)`.
    pub mc_se: f64,
    /// Population `1 - r_k` of the design.
    pub one_minus_r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthRow {
    pub method: Method,
    pub k0: usize,
    /// Mean of `k̂ - k0`.
    pub mean_bias: f64,
    /// Sample standard deviation of `k̂ - k0`.
    pub sd: f64,
    pub mc_se: f64,
    /// Replications with `k̂ = k0`.
    pub hits: usize,
    /// Threshold-rule replications without a crossing; scored as `k̂ = M`.
    pub no_crossing: usize,
    pub estimates: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SummaryRows {
    Rejection(RejectionRow),
    Bandwidth(Vec<BandwidthRow>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub design: Design,
    pub rows: SummaryRows,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// Per-replication bandwidth estimates; `None` marks a threshold rule
/// without a crossing.
fn estimate_once(
    design: &Design,
    model: &MaModelSpec,
    methods: &[Method],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Option<usize>>> {
    let data = model.generate_with(rng);
    let split_seed = rng.next_u64();
    let ceiling = design.effective_ceiling();
    let needs_scan = methods
        .iter()
        .any(|m| matches!(m, Method::FixedThreshold | Method::ChangePoint));
    let scan = if needs_scan {
        Some(band_test::scan(&data, ceiling + 1, design.alpha)?)
    } else {
        None
    };
    methods
        .iter()
        .map(|m| {
            let est = match m {
                Method::FixedThreshold => bandwidth::fixed_from_scan(
                    scan.as_ref().expect("scan computed"),
                    design.delta,
                    design.theta,
                    ceiling,
                )?,
                Method::ChangePoint => bandwidth::change_point_from_scan(
                    scan.as_ref().expect("scan computed"),
                    design.span,
                    ceiling,
                )?,
                Method::BLa | Method::BLb => {
                    let variant = if *m == Method::BLa { BlVariant::A } else { BlVariant::B };
                    let k_max = bandwidth::default_bl_k_max(data.n(), data.p());
                    bl_bandwidth(&data, variant, design.splits, k_max, split_seed)?
                }
            };
            Ok(est.k_hat)
        })
        .collect()
}

/// Runs a design and summarises it.
pub fn run_experiment(design: &Design) -> Result<ExperimentSummary> {
    design.validate()?;
    let model = design.model(design.master_seed)?;
    let rows = match &design.task {
        Task::Test { k } => {
            let k = *k;
            let rejected = replicate(design.master_seed, design.reps, |_, rng| {
                let data = model.generate_with(rng);
                let profile = ustat::lag_profile(&data)?;
                Ok(band_test::test_from_profile(&profile, k, design.alpha)?.reject)
            })?;
            let rejections = rejected.iter().filter(|&&r| r).count();
            let rate = rejections as f64 / design.reps as f64;
            let pq = population_quantities(&model, k)?;
            SummaryRows::Rejection(RejectionRow {
                k,
                rejections,
                rate,
                mc_se: (rate * (1.0 - rate) / design.reps as f64).sqrt(),
                one_minus_r: pq.one_minus_r[k],
            })
        }
        Task::Bandwidth { methods } => {
            let per_rep = replicate(design.master_seed, design.reps, |_, rng| {
                estimate_once(design, &model, methods, rng)
            })?;
            let k0 = design.k0();
            let ceiling = design.effective_ceiling();
            let rows = methods
                .iter()
                .enumerate()
                .map(|(i, &method)| {
                    let no_crossing = per_rep.iter().filter(|r| r[i].is_none()).count();
                    let estimates: Vec<usize> =
                        per_rep.iter().map(|r| r[i].unwrap_or(ceiling)).collect();
                    let bias: Vec<f64> = estimates.iter().map(|&e| e as f64 - k0 as f64).collect();
                    let (mean_bias, sd) = mean_sd(&bias);
                    BandwidthRow {
                        method,
                        k0,
                        mean_bias,
                        sd,
                        mc_se: sd / (design.reps as f64).sqrt(),
                        hits: estimates.iter().filter(|&&e| e == k0).count(),
                        no_crossing,
                        estimates,
                    }
                })
                .collect();
            SummaryRows::Bandwidth(rows)
        }
    };
    Ok(ExperimentSummary {
        design: design.clone(),
        rows,
    })
}
