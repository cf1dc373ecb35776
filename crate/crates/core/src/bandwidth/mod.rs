//! Bandwidth estimation: the first-crossing threshold rule on scaled
//! successive differences of `T̃_nk`, the regression change-point rule, and
//! the sample-splitting risk minimisers used as baselines.

mod bl;
mod loess;
mod matrix;

pub use bl::{bl_bandwidth, default_bl_k_max, split_sizes, BlVariant, DEFAULT_SPLITS};
pub use loess::{local_linear_fit, ols_line_fit};
pub use matrix::{band_matrix, sample_covariance, Matrix};

use crate::band_test::TestScan;
use crate::error::{Error, Result};

/// Default exponent of the `n^δ` multiplier for the threshold rule.
pub const DEFAULT_DELTA: f64 = 0.5;
/// Default threshold `θ` for the threshold rule.
pub const DEFAULT_THETA: f64 = 0.06;
/// Default LOESS span for the change-point rule.
pub const DEFAULT_SPAN: f64 = 0.75;
/// Candidates whose test p-value does not exceed this are dropped.
pub const CANDIDATE_P_FLOOR: f64 = 1e-10;
/// Below this many left-hand points the change-point rule fits a plain line.
const MIN_LOESS_K: usize = 5;

/// Default ceiling `M` of the difference sequence: `min(p - 3, 30)`.
pub fn default_ceiling(p: usize) -> usize {
    p.saturating_sub(3).min(30)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    FixedThreshold,
    ChangePoint,
    BLa,
    BLb,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::FixedThreshold => "fixed",
            Method::ChangePoint => "changepoint",
            Method::BLa => "bl-a",
            Method::BLb => "bl-b",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(Method::FixedThreshold),
            "changepoint" | "change-point" => Ok(Method::ChangePoint),
            "bl-a" | "bla" => Ok(Method::BLa),
            "bl-b" | "blb" => Ok(Method::BLb),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

/// Norm used by the sample-splitting risk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiskNorm {
    /// Maximum absolute column sum.
    L11,
    Frobenius,
}

/// Method-specific trail that determines `k_hat`.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostics {
    FixedThreshold {
        theta: f64,
        delta: f64,
        values: Vec<f64>,
        /// First index with `|values[k]| < theta`.
        crossing: Option<usize>,
    },
    ChangePoint {
        span: f64,
        candidates: Vec<usize>,
        /// `(k, err(k))` for every candidate, in increasing `k`.
        err: Vec<(usize, f64)>,
    },
    SampleSplit {
        norm: RiskNorm,
        n1: usize,
        n2: usize,
        n_splits: usize,
        seed: u64,
        /// `R̂(k)` for `k = 0..=k_max`.
        risk: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthEstimate {
    pub method: Method,
    /// `None` only for the threshold rule when no difference falls below `θ`.
    pub k_hat: Option<usize>,
    pub diagnostics: Diagnostics,
}

/// `d_nk^(δ) = n^δ (T̃_nk - T̃_{n,k+1})` for `k = 0..M-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffSequence {
    pub delta: f64,
    pub values: Vec<f64>,
}

impl DiffSequence {
    pub fn ceiling(&self) -> usize {
        self.values.len()
    }
}

/// Scaled successive differences of `T̃` over the first `ceiling + 1`
/// scan entries. `delta = 0` gives the unscaled differences.
pub fn diff_sequence(scan: &TestScan, delta: f64, ceiling: usize) -> Result<DiffSequence> {
    diff_from_tilde(scan.tilde_t(), scan.n(), delta, ceiling)
}

pub(crate) fn diff_from_tilde(
    tilde_t: &[f64],
    n: usize,
    delta: f64,
    ceiling: usize,
) -> Result<DiffSequence> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::InvalidParameter(format!("delta {delta} must be >= 0")));
    }
    if ceiling == 0 || ceiling + 1 > tilde_t.len() {
        return Err(Error::InvalidParameter(format!(
            "ceiling M = {ceiling} needs a scan over k = 0..={ceiling}, have {} entries",
            tilde_t.len()
        )));
    }
    let scale = (n as f64).powf(delta);
    let values = tilde_t[..=ceiling]
        .windows(2)
        .map(|w| scale * (w[0] - w[1]))
        .collect();
    Ok(DiffSequence { delta, values })
}

/// `k̂ = min{k : |d_k| < θ}`.
pub fn fixed_threshold_estimator(diffs: &DiffSequence, theta: f64) -> Result<BandwidthEstimate> {
    if theta.is_nan() || theta <= 0.0 {
        return Err(Error::InvalidParameter(format!("theta {theta} must be > 0")));
    }
    if diffs.values.is_empty() {
        return Err(Error::InvalidParameter("empty difference sequence".into()));
    }
    let crossing = diffs.values.iter().position(|d| d.abs() < theta);
    Ok(BandwidthEstimate {
        method: Method::FixedThreshold,
        k_hat: crossing,
        diagnostics: Diagnostics::FixedThreshold {
            theta,
            delta: diffs.delta,
            values: diffs.values.clone(),
            crossing,
        },
    })
}

/// Absolute deviation of the two-piece fit at `k`: a regression on
/// `j = 0..=k` and the flat level `d_k` on `j = k+1..=M`.
fn change_point_err(dseq: &[f64], k: usize, span: f64) -> Result<f64> {
    let left = &dseq[..=k];
    let xs: Vec<f64> = (0..=k).map(|j| j as f64).collect();
    let fitted = if k >= MIN_LOESS_K {
        local_linear_fit(&xs, left, span)?
    } else {
        ols_line_fit(&xs, left)?
    };
    let left_err: f64 = fitted.iter().zip(left).map(|(g, d)| (g - d).abs()).sum();
    let right_err: f64 = dseq[k + 1..].iter().map(|d| (dseq[k] - d).abs()).sum();
    Ok(left_err + right_err)
}

/// Change-point estimate from `dseq = (d_0, …, d_M)`; `argmin err(k)` over
/// the candidates, ties to the smallest `k`.
pub fn change_point_estimator(
    dseq: &[f64],
    candidates: &[usize],
    span: f64,
) -> Result<BandwidthEstimate> {
    if dseq.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "change-point needs M >= 2, got {} differences",
            dseq.len()
        )));
    }
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let m = dseq.len() - 1;
    let mut cands = candidates.to_vec();
    cands.sort_unstable();
    cands.dedup();
    if let Some(&bad) = cands.iter().find(|&&k| k == 0 || k > m) {
        return Err(Error::BandwidthOutOfRange { k: bad, max: m });
    }
    let err = cands
        .iter()
        .map(|&k| change_point_err(dseq, k, span).map(|e| (k, e)))
        .collect::<Result<Vec<_>>>()?;
    let mut best = err[0];
    for &(k, e) in &err[1..] {
        if e < best.1 {
            best = (k, e);
        }
    }
    Ok(BandwidthEstimate {
        method: Method::ChangePoint,
        k_hat: Some(best.0),
        diagnostics: Diagnostics::ChangePoint {
            span,
            candidates: cands,
            err,
        },
    })
}

/// Threshold rule applied to a scan: `d^(δ)` over `k = 0..M-1`.
pub fn fixed_from_scan(
    scan: &TestScan,
    delta: f64,
    theta: f64,
    ceiling: usize,
) -> Result<BandwidthEstimate> {
    fixed_threshold_estimator(&diff_sequence(scan, delta, ceiling)?, theta)
}

/// Change-point rule applied to a scan reaching at least `k = M + 1`.
///
/// Candidates are `{k in 1..=M : p-value(k) > 1e-10}`, or all of `1..=M`
/// when that set is empty.
pub fn change_point_from_scan(
    scan: &TestScan,
    span: f64,
    ceiling: usize,
) -> Result<BandwidthEstimate> {
    let dseq = diff_sequence(scan, 0.0, ceiling + 1)?.values;
    let mut candidates: Vec<usize> = (1..=ceiling)
        .filter(|&k| scan.results()[k].p_value > CANDIDATE_P_FLOOR)
        .collect();
    if candidates.is_empty() {
        candidates = (1..=ceiling).collect();
    }
    change_point_estimator(&dseq, &candidates, span)
}
