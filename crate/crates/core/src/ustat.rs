//! Unbiased per-lag estimators of squared sub-diagonal covariance sums and
//! the composite statistics built on them.
//!
//! For lag `q` the target is `D_q = Σ_l σ_{l,l+q}²`. Its unbiased
//! estimator combines three U-statistics over ordered tuples of mutually
//! distinct observations. For one column pair `u = X_·l`, `v = X_·(l+q)`
//! write `[f] = Σ_i f_i`. Möbius inversion over set partitions of the
//! index tuple reduces each distinct-index sum to products of eight moment
//! sums:
//!
//! ```text
//! Σ*_{i,j}     u_i v_i u_j v_j = [uv]² - [u²v²]
//! Σ*_{i,j,k}   u_i u_j v_j v_k = [u][v][uv] - [u²v][v] - [uv]² - [uv²][u]
//!                                + 2[u²v²]
//! Σ*_{i,j,k,m} u_i v_j u_k v_m = [u]²[v]² - [u²][v]² - [v²][u]²
//!                                - 4[u][v][uv] + [u²][v²] + 2[uv]²
//!                                + 4[u²v][v] + 4[uv²][u] - 6[u²v²]
//! ```
//!
//! Each pair costs `O(n)`, so the whole profile costs `O(n p²)`. Columns
//! are centred first; the estimator is location invariant, so centring
//! only improves conditioning.

use rayon::prelude::*;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::normal;
use crate::sum::NeumaierSum;

/// `(D̂_0, …, D̂_{p-1})` for one data matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LagProfile {
    n: usize,
    dhat: Vec<f64>,
}

impl LagProfile {
    /// Wraps precomputed per-lag values (length `p`).
    pub fn new(n: usize, dhat: Vec<f64>) -> Result<Self> {
        if dhat.len() < 2 {
            return Err(Error::TooFewVariables {
                p: dhat.len(),
                min: 2,
            });
        }
        Ok(Self { n, dhat })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.dhat.len()
    }

    pub fn dhat(&self) -> &[f64] {
        &self.dhat
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k >= self.p() {
            Err(Error::BandwidthOutOfRange {
                k,
                max: self.p() - 1,
            })
        } else {
            Ok(())
        }
    }
}

fn check_input(data: &DataMatrix) -> Result<()> {
    data.require_min_n(DataMatrix::MIN_OBSERVATIONS)?;
    if data.p() < 2 {
        return Err(Error::TooFewVariables { p: data.p(), min: 2 });
    }
    Ok(())
}

/// Falling factorials `P_n^2`, `P_n^3`, `P_n^4`.
fn falling(n: usize) -> (f64, f64, f64) {
    let n = n as f64;
    let p2 = n * (n - 1.0);
    let p3 = p2 * (n - 2.0);
    (p2, p3, p3 * (n - 3.0))
}

struct ColumnSums {
    s1: f64,
    s2: f64,
}

/// Contribution of a single column pair to `D̂_q`.
#[inline]
fn pair_term(u: &[f64], v: &[f64], cu: &ColumnSums, cv: &ColumnSums, p: (f64, f64, f64)) -> f64 {
    let (mut suv, mut su2v, mut suv2, mut su2v2) = (0.0, 0.0, 0.0, 0.0);
    for (&a, &b) in u.iter().zip(v) {
        let ab = a * b;
        suv += ab;
        su2v += a * ab;
        suv2 += ab * b;
        su2v2 += ab * ab;
    }
    let (su, sv, su2, sv2) = (cu.s1, cv.s1, cu.s2, cv.s2);
    let pairs = suv * suv - su2v2;
    let triples = su * sv * suv - su2v * sv - suv * suv - suv2 * su + 2.0 * su2v2;
    let quads = su * su * sv * sv - su2 * sv * sv - sv2 * su * su - 4.0 * su * sv * suv
        + su2 * sv2
        + 2.0 * suv * suv
        + 4.0 * su2v * sv
        + 4.0 * suv2 * su
        - 6.0 * su2v2;
    let (p2, p3, p4) = p;
    pairs / p2 - 2.0 * triples / p3 + quads / p4
}

/// Computes every `D̂_nq`, `q = 0..p-1`, in `O(n p²)`.
///
/// Lags are evaluated in parallel; within a lag the column pairs are
/// accumulated in index order, so the result does not depend on the
/// number of threads.
pub fn lag_profile(data: &DataMatrix) -> Result<LagProfile> {
    check_input(data)?;
    let cols = data.centered_columns();
    let sums: Vec<ColumnSums> = cols
        .iter()
        .map(|c| ColumnSums {
            s1: c.iter().sum(),
            s2: c.iter().map(|x| x * x).sum(),
        })
        .collect();
    let p = data.p();
    let fact = falling(data.n());
    let dhat = (0..p)
        .into_par_iter()
        .map(|q| {
            let mut acc = NeumaierSum::new();
            for l in 0..p - q {
                acc += pair_term(&cols[l], &cols[l + q], &sums[l], &sums[l + q], fact);
            }
            acc.value()
        })
        .collect();
    LagProfile::new(data.n(), dhat)
}

/// Literal evaluation of the distinct-index sums, `O(n⁴ p²)`.
///
/// Intended as a reference for small `n` only.
pub fn lag_profile_bruteforce(data: &DataMatrix) -> Result<LagProfile> {
    check_input(data)?;
    let n = data.n();
    let p = data.p();
    let (p2, p3, p4) = falling(n);
    let x = |i: usize, j: usize| data.get(i, j);
    let mut dhat = vec![0.0; p];
    for (q, out) in dhat.iter_mut().enumerate() {
        for l in 0..p - q {
            let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
            for i in 0..n {
                for j in (0..n).filter(|&j| j != i) {
                    a += x(i, l) * x(i, l + q) * x(j, l) * x(j, l + q);
                    for k in (0..n).filter(|&k| k != i && k != j) {
                        b += x(i, l) * x(k, l + q) * x(j, l) * x(j, l + q);
                        for m in (0..n).filter(|&m| m != i && m != j && m != k) {
                            c += x(i, l) * x(j, l + q) * x(k, l) * x(m, l + q);
                        }
                    }
                }
            }
            *out += a / p2 - 2.0 * b / p3 + c / p4;
        }
    }
    LagProfile::new(n, dhat)
}

/// `W_nk = 2 Σ_{q=k+1}^{p-1} D̂_nq`, estimating `tr[{Σ - B_k(Σ)}²]`.
pub fn w_stat(profile: &LagProfile, k: usize) -> Result<f64> {
    profile.check_k(k)?;
    let tail: NeumaierSum = profile.dhat[k + 1..].iter().sum();
    Ok(2.0 * tail.value())
}

/// `V_nk = D̂_n0 + 2 Σ_{q=1}^{k} D̂_nq`, estimating `tr[{B_k(Σ)}²]`.
pub fn v_stat(profile: &LagProfile, k: usize) -> Result<f64> {
    profile.check_k(k)?;
    let band: NeumaierSum = profile.dhat[1..=k].iter().sum();
    Ok(profile.dhat[0] + 2.0 * band.value())
}

/// `T_nk = n W / V`; `V <= 0` means the data carry no usable variance.
pub fn t_stat(w: f64, v: f64, n: usize) -> Result<f64> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::DegenerateVariance(v));
    }
    Ok(n as f64 * w / v)
}

/// One-sided p-value `1 - Φ(t / 2)` of the N(0, 4) null law.
pub fn p_value(t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite statistic {t}")));
    }
    Ok(normal::upper_tail(t / 2.0))
}
