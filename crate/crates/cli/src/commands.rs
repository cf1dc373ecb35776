//! Command bodies. Each returns the rendered artifact.

use bandcov::band_test::{self, default_k_max, DEFAULT_ALPHA};
use bandcov::bandwidth::{
    self, bl_bandwidth, default_bl_k_max, BandwidthEstimate, BlVariant, Diagnostics, Method,
    RiskNorm, DEFAULT_DELTA, DEFAULT_SPAN, DEFAULT_SPLITS, DEFAULT_THETA,
};
use bandcov::simgen::config::Entry;
use bandcov::simgen::{run_experiment, Design, ExperimentSummary, SummaryRows, Task, DEFAULT_MASTER_SEED};
use bandcov::{lag_profile, DataMatrix};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::ingest::ingest_csv;
use crate::options::{Format, Options};
use crate::output::{real, real_cell, to_csv, to_json};

fn load(o: &Options) -> CliResult<DataMatrix> {
    let path = o
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("--input is required".into()))?;
    ingest_csv(path, o.header)
}

fn alpha(o: &Options) -> f64 {
    o.alpha.unwrap_or(DEFAULT_ALPHA)
}

#[derive(Serialize)]
struct TestOut {
    n: usize,
    p: usize,
    k: usize,
    #[serde(rename = "W")]
    w: f64,
    #[serde(rename = "V")]
    v: f64,
    #[serde(rename = "T")]
    t: f64,
    p_value: f64,
    alpha: f64,
    reject: bool,
}

pub fn cmd_test(o: &Options) -> CliResult<Vec<u8>> {
    let data = load(o)?;
    let r = band_test::run_test(&data, o.k.unwrap_or(0), alpha(o))?;
    let out = TestOut {
        n: data.n(),
        p: data.p(),
        k: r.k,
        w: r.w,
        v: r.v,
        t: r.t,
        p_value: r.p_value,
        alpha: r.alpha,
        reject: r.reject,
    };
    match o.format() {
        Format::Json => to_json(&out),
        Format::Csv => to_csv(
            &["n", "p", "k", "W", "V", "T", "p_value", "alpha", "reject"],
            &[vec![
                out.n.to_string(),
                out.p.to_string(),
                out.k.to_string(),
                real(out.w),
                real(out.v),
                real(out.t),
                real(out.p_value),
                real(out.alpha),
                out.reject.to_string(),
            ]],
        ),
    }
}

#[derive(Serialize)]
pub struct ScanRecord {
    pub k: usize,
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub p_value: f64,
    pub tilde_t: f64,
    /// `n^δ (T̃_k - T̃_{k+1})`; absent for the last `k`.
    pub d_nk: Option<f64>,
}

#[derive(Serialize)]
struct ScanOut {
    n: usize,
    p: usize,
    alpha: f64,
    delta: f64,
    records: Vec<ScanRecord>,
}

pub const SCAN_FIELDS: [&str; 7] = ["k", "W", "V", "T", "p_value", "tilde_t", "d_nk"];

pub fn cmd_scan(o: &Options) -> CliResult<Vec<u8>> {
    let data = load(o)?;
    let k_max = o.k_max.unwrap_or_else(|| default_k_max(data.n(), data.p()));
    let delta = o.delta.unwrap_or(DEFAULT_DELTA);
    let scan = band_test::scan(&data, k_max, alpha(o))?;
    let d = bandwidth::diff_sequence(&scan, delta, k_max)?.values;
    let records: Vec<ScanRecord> = scan
        .results()
        .iter()
        .zip(scan.tilde_t())
        .map(|(r, &tt)| ScanRecord {
            k: r.k,
            w: r.w,
            v: r.v,
            t: r.t,
            p_value: r.p_value,
            tilde_t: tt,
            d_nk: d.get(r.k).copied(),
        })
        .collect();
    match o.format() {
        Format::Json => to_json(&ScanOut {
            n: data.n(),
            p: data.p(),
            alpha: alpha(o),
            delta,
            records,
        }),
        Format::Csv => {
            let rows: Vec<Vec<String>> = records
                .iter()
                .map(|r| {
                    vec![
                        r.k.to_string(),
                        real(r.w),
                        real(r.v),
                        real(r.t),
                        real(r.p_value),
                        real(r.tilde_t),
                        real_cell(r.d_nk),
                    ]
                })
                .collect();
            to_csv(&SCAN_FIELDS, &rows)
        }
    }
}

#[derive(Serialize)]
struct ErrPoint {
    k: usize,
    err: f64,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum DiagnosticsOut {
    FixedThreshold {
        delta: f64,
        theta: f64,
        ceiling: usize,
        values: Vec<f64>,
        crossing: Option<usize>,
    },
    ChangePoint {
        span: f64,
        ceiling: usize,
        candidates: Vec<usize>,
        err: Vec<ErrPoint>,
    },
    SampleSplit {
        norm: &'static str,
        n1: usize,
        n2: usize,
        n_splits: usize,
        seed: u64,
        k_max: usize,
        risk: Vec<f64>,
    },
}

#[derive(Serialize)]
struct BandwidthOut {
    method: &'static str,
    k_hat: Option<usize>,
    /// `ok`, or `no_crossing` when the fixed rule never falls below θ.
    status: &'static str,
    n: usize,
    p: usize,
    diagnostics: DiagnosticsOut,
}

fn norm_name(n: RiskNorm) -> &'static str {
    match n {
        RiskNorm::L11 => "l11",
        RiskNorm::Frobenius => "frobenius",
    }
}

/// Runs one estimator exactly as the simulation harness does.
pub fn estimate(data: &DataMatrix, method: Method, o: &Options) -> CliResult<(BandwidthEstimate, usize)> {
    let splits = o.splits.unwrap_or(DEFAULT_SPLITS);
    let seed = o.seed.unwrap_or(DEFAULT_MASTER_SEED);
    Ok(match method {
        Method::FixedThreshold | Method::ChangePoint => {
            let ceiling = o.k_max.unwrap_or_else(|| bandwidth::default_ceiling(data.p()));
            let scan = band_test::scan(data, ceiling + 1, alpha(o))?;
            let est = if method == Method::FixedThreshold {
                bandwidth::fixed_from_scan(
                    &scan,
                    o.delta.unwrap_or(DEFAULT_DELTA),
                    o.theta.unwrap_or(DEFAULT_THETA),
                    ceiling,
                )?
            } else {
                bandwidth::change_point_from_scan(&scan, o.span.unwrap_or(DEFAULT_SPAN), ceiling)?
            };
            (est, ceiling)
        }
        Method::BLa | Method::BLb => {
            let variant = if method == Method::BLa { BlVariant::A } else { BlVariant::B };
            let k_max = o.k_max.unwrap_or_else(|| default_bl_k_max(data.n(), data.p()));
            (bl_bandwidth(data, variant, splits, k_max, seed)?, k_max)
        }
    })
}

pub fn cmd_bandwidth(o: &Options) -> CliResult<Vec<u8>> {
    let method: Method = o.method.as_deref().unwrap_or("fixed").parse()?;
    let data = load(o)?;
    let (est, ceiling) = estimate(&data, method, o)?;
    let (diagnostics, curve): (DiagnosticsOut, Vec<(usize, f64)>) = match est.diagnostics {
        Diagnostics::FixedThreshold {
            theta,
            delta,
            values,
            crossing,
        } => {
            let curve = values.iter().copied().enumerate().collect();
            (
                DiagnosticsOut::FixedThreshold {
                    delta,
                    theta,
                    ceiling,
                    values,
                    crossing,
                },
                curve,
            )
        }
        Diagnostics::ChangePoint {
            span,
            candidates,
            err,
        } => (
            DiagnosticsOut::ChangePoint {
                span,
                ceiling,
                candidates,
                err: err.iter().map(|&(k, err)| ErrPoint { k, err }).collect(),
            },
            err,
        ),
        Diagnostics::SampleSplit {
            norm,
            n1,
            n2,
            n_splits,
            seed,
            risk,
        } => {
            let curve = risk.iter().copied().enumerate().collect();
            (
                DiagnosticsOut::SampleSplit {
                    norm: norm_name(norm),
                    n1,
                    n2,
                    n_splits,
                    seed,
                    k_max: ceiling,
                    risk,
                },
                curve,
            )
        }
    };
    let status = if est.k_hat.is_some() { "ok" } else { "no_crossing" };
    match o.format() {
        Format::Json => to_json(&BandwidthOut {
            method: method.name(),
            k_hat: est.k_hat,
            status,
            n: data.n(),
            p: data.p(),
            diagnostics,
        }),
        Format::Csv => {
            let k_hat = est.k_hat.map(|k| k.to_string()).unwrap_or_default();
            let rows: Vec<Vec<String>> = curve
                .iter()
                .map(|&(k, v)| {
                    vec![
                        method.name().to_string(),
                        k_hat.clone(),
                        status.to_string(),
                        k.to_string(),
                        real(v),
                    ]
                })
                .collect();
            to_csv(&["method", "k_hat", "status", "k", "value"], &rows)
        }
    }
}

#[derive(Serialize)]
pub struct ProfileRecord {
    pub q: usize,
    pub dhat: f64,
}

#[derive(Serialize)]
struct ProfileOut {
    n: usize,
    p: usize,
    records: Vec<ProfileRecord>,
}

pub fn cmd_profile(o: &Options) -> CliResult<Vec<u8>> {
    let data = load(o)?;
    let prof = lag_profile(&data)?;
    let records: Vec<ProfileRecord> = prof
        .dhat()
        .iter()
        .enumerate()
        .map(|(q, &dhat)| ProfileRecord { q, dhat })
        .collect();
    match o.format() {
        Format::Json => to_json(&ProfileOut {
            n: data.n(),
            p: data.p(),
            records,
        }),
        Format::Csv => to_csv(
            &["q", "dhat"],
            &records
                .iter()
                .map(|r| vec![r.q.to_string(), real(r.dhat)])
                .collect::<Vec<_>>(),
        ),
    }
}

/// Builds the simulation design: preset or config design keys, then flags.
pub fn design(o: &Options) -> CliResult<Design> {
    let mut entries: Vec<Entry> = o.design.clone();
    let mut set = |key: &str, value: Option<String>| {
        if let Some(value) = value {
            entries.retain(|e| e.key != key);
            entries.push(Entry {
                line: 0,
                key: key.to_string(),
                value,
            });
        }
    };
    set("preset", o.preset.clone());
    set("reps", o.reps.map(|v| v.to_string()));
    set("alpha", o.alpha.map(|v| v.to_string()));
    set("delta", o.delta.map(|v| v.to_string()));
    set("theta", o.theta.map(|v| v.to_string()));
    set("span", o.span.map(|v| v.to_string()));
    set("splits", o.splits.map(|v| v.to_string()));
    set("master_seed", o.seed.map(|v| v.to_string()));
    set("ceiling", o.k_max.map(|v| v.to_string()));
    set("k", o.k.map(|v| v.to_string()));
    set("method", o.method.clone());
    // a preset has to be applied before the keys that modify it
    entries.sort_by_key(|e| e.key != "preset");
    Ok(Design::from_entries(&entries)?)
}

#[derive(Serialize)]
struct DesignOut<'a> {
    name: &'a str,
    gammas: &'a [f64],
    innovation: &'static str,
    n: usize,
    p: usize,
    reps: usize,
    alpha: f64,
    delta: f64,
    theta: f64,
    span: f64,
    splits: usize,
    ceiling: usize,
    master_seed: u64,
    task: String,
}

#[derive(Serialize)]
struct RejectionOut {
    k: usize,
    rejections: usize,
    rate: f64,
    mc_se: f64,
    one_minus_r: f64,
}

#[derive(Serialize)]
struct BandwidthRowOut<'a> {
    method: &'static str,
    k0: usize,
    mean_bias: f64,
    sd: f64,
    mc_se: f64,
    hits: usize,
    no_crossing: usize,
    estimates: &'a [usize],
}

#[derive(Serialize)]
struct SimulateOut<'a> {
    design: DesignOut<'a>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rejection: Option<RejectionOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bandwidth: Option<Vec<BandwidthRowOut<'a>>>,
}

pub fn cmd_simulate(o: &Options) -> CliResult<Vec<u8>> {
    let d = design(o)?;
    let summary = run_experiment(&d)?;
    render_summary(&summary, o.format())
}

pub fn render_summary(s: &ExperimentSummary, format: Format) -> CliResult<Vec<u8>> {
    let d = &s.design;
    let design = DesignOut {
        name: &d.name,
        gammas: &d.gammas,
        innovation: d.innovation.name(),
        n: d.n,
        p: d.p,
        reps: d.reps,
        alpha: d.alpha,
        delta: d.delta,
        theta: d.theta,
        span: d.span,
        splits: d.splits,
        ceiling: d.effective_ceiling(),
        master_seed: d.master_seed,
        task: task_label(d),
    };
    let lead = vec![
        d.name.clone(),
        d.innovation.name().to_string(),
        d.n.to_string(),
        d.p.to_string(),
        d.reps.to_string(),
        d.master_seed.to_string(),
    ];
    let lead_fields = ["design", "innovation", "n", "p", "reps", "master_seed"];
    match (&s.rows, format) {
        (SummaryRows::Rejection(r), Format::Json) => to_json(&SimulateOut {
            design,
            rejection: Some(RejectionOut {
                k: r.k,
                rejections: r.rejections,
                rate: r.rate,
                mc_se: r.mc_se,
                one_minus_r: r.one_minus_r,
            }),
            bandwidth: None,
        }),
        (SummaryRows::Bandwidth(rows), Format::Json) => to_json(&SimulateOut {
            design,
            rejection: None,
            bandwidth: Some(
                rows.iter()
                    .map(|r| BandwidthRowOut {
                        method: r.method.name(),
                        k0: r.k0,
                        mean_bias: r.mean_bias,
                        sd: r.sd,
                        mc_se: r.mc_se,
                        hits: r.hits,
                        no_crossing: r.no_crossing,
                        estimates: &r.estimates,
                    })
                    .collect(),
            ),
        }),
        (SummaryRows::Rejection(r), Format::Csv) => {
            let mut header = lead_fields.to_vec();
            header.extend(["k", "rejections", "rate", "mc_se", "one_minus_r"]);
            let mut row = lead;
            row.extend([
                r.k.to_string(),
                r.rejections.to_string(),
                real(r.rate),
                real(r.mc_se),
                real(r.one_minus_r),
            ]);
            to_csv(&header, &[row])
        }
        (SummaryRows::Bandwidth(rows), Format::Csv) => {
            let mut header = lead_fields.to_vec();
            header.extend(["method", "k0", "ceiling", "mean_bias", "sd", "mc_se", "hits", "no_crossing"]);
            let rows: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut row = lead.clone();
                    row.extend([
                        r.method.name().to_string(),
                        r.k0.to_string(),
                        d.effective_ceiling().to_string(),
                        real(r.mean_bias),
                        real(r.sd),
                        real(r.mc_se),
                        r.hits.to_string(),
                        r.no_crossing.to_string(),
                    ]);
                    row
                })
                .collect();
            to_csv(&header, &rows)
        }
    }
}

fn task_label(d: &Design) -> String {
    match &d.task {
        Task::Test { k } => format!("test k={k}"),
        Task::Bandwidth { methods } => {
            let names: Vec<&str> = methods.iter().map(|m| m.name()).collect();
            format!("bandwidth {}", names.join(","))
        }
    }
}
