//! Exact population quantities of the moving-average model.
//!
//! `Σ = ΓΓᵀ` is symmetric Toeplitz with `σ_{j,j+q} = γ(q) = Σ_l γ_l γ_{l+q}`
//! for `q <= k0` and zero beyond, so the traces reduce to sums over lags:
//! `tr(Σ²) = p γ(0)² + 2 Σ_{q>=1} (p - q) γ(q)²`, and `tr[{B_k(Σ)}²]` is the
//! same sum truncated at `q = k`. The leading variance `ν²_nk` of `W_nk` is
//!
//! ```text
//! 4/n² tr²(Σ²) + 8/n tr{Σ(Σ - B_k Σ)}² + 4Δ/n tr{Γᵀ(Σ - B_k Σ)Γ ∘ Γᵀ(Σ - B_k Σ)Γ}
//! ```
//!
//! evaluated with band-limited products (`O(p k0²)`).

use crate::bandwidth::Matrix;
use crate::error::{Error, Result};
use crate::simgen::model::MaModelSpec;
use crate::sum::NeumaierSum;

/// `γ(q)` for `q = 0..=k0`.
pub fn autocovariances(gammas: &[f64]) -> Vec<f64> {
    (0..gammas.len())
        .map(|q| gammas.iter().zip(&gammas[q..]).map(|(a, b)| a * b).sum())
        .collect()
}

/// Dense `p x p` population covariance.
pub fn population_sigma(spec: &MaModelSpec) -> Matrix {
    let acv = autocovariances(spec.gammas());
    Matrix::from_fn(spec.p, spec.p, |i, j| {
        acv.get(i.abs_diff(j)).copied().unwrap_or(0.0)
    })
}

/// Dense `p x (p + k0)` coefficient matrix `Γ[j, j + l] = γ_l`.
pub fn coefficient_matrix(spec: &MaModelSpec) -> Matrix {
    let g = spec.gammas();
    Matrix::from_fn(spec.p, spec.p + spec.k0(), |j, s| {
        s.checked_sub(j).and_then(|l| g.get(l)).copied().unwrap_or(0.0)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationQuantities {
    pub n: usize,
    /// `γ(q)`, `q = 0..=k0`.
    pub band_profile: Vec<f64>,
    pub tr_sigma2: f64,
    /// `tr[{B_k(Σ)}²]` for `k = 0..=k_max`.
    pub tr_bk2: Vec<f64>,
    pub r: Vec<f64>,
    pub one_minus_r: Vec<f64>,
    /// `tr[{Σ - B_k(Σ)}²]`.
    pub signal: Vec<f64>,
    /// `ν_nk`.
    pub nu: Vec<f64>,
    /// `δ_nk = signal / ν_nk`.
    pub delta_snr: Vec<f64>,
    /// `tr(Σ⁴) / tr²(Σ²)`.
    pub tr_ratio: f64,
}

/// `p γ(0)² + 2 Σ_{q=1}^{min(k, k0, p-1)} (p - q) γ(q)²`.
fn banded_trace(acv: &[f64], p: usize, k: usize) -> f64 {
    let mut acc = NeumaierSum::new();
    acc += p as f64 * acv[0] * acv[0];
    for (q, g) in acv.iter().enumerate().take(k.min(p - 1) + 1).skip(1) {
        acc += 2.0 * (p - q) as f64 * g * g;
    }
    acc.value()
}

/// Symmetric-Toeplitz entry lookup restricted to lags in `(lo, hi]`.
#[inline]
fn toeplitz(acv: &[f64], i: usize, j: usize, lo: Option<usize>) -> f64 {
    let d = i.abs_diff(j);
    if lo.is_some_and(|lo| d <= lo) {
        return 0.0;
    }
    acv.get(d).copied().unwrap_or(0.0)
}

/// `tr{Σ A Σ A}` with `A = Σ - B_k(Σ)`, via the band of `P = Σ A`.
fn trace_sigma_a_squared(acv: &[f64], p: usize, k: usize) -> f64 {
    let k0 = acv.len() - 1;
    if k >= k0 {
        return 0.0;
    }
    let bw = 2 * k0;
    let width = 2 * bw + 1;
    // prod[i * width + (j + bw - i)] = P_ij
    let mut prod = vec![0.0; p * width];
    for i in 0..p {
        let jlo = i.saturating_sub(bw);
        let jhi = (i + bw).min(p - 1);
        for j in jlo..=jhi {
            let mlo = i.saturating_sub(k0);
            let mhi = (i + k0).min(p - 1);
            let mut s = 0.0;
            for m in mlo..=mhi {
                let a = toeplitz(acv, m, j, Some(k));
                if a != 0.0 {
                    s += toeplitz(acv, i, m, None) * a;
                }
            }
            prod[i * width + (j + bw - i)] = s;
        }
    }
    let at = |i: usize, j: usize| prod[i * width + (j + bw - i)];
    let mut acc = NeumaierSum::new();
    for i in 0..p {
        let jlo = i.saturating_sub(bw);
        let jhi = (i + bw).min(p - 1);
        for j in jlo..=jhi {
            acc += at(i, j) * at(j, i);
        }
    }
    acc.value()
}

/// `Σ_s [(Γᵀ A Γ)_ss]²` with `A = Σ - B_k(Σ)`.
fn hadamard_trace(gammas: &[f64], acv: &[f64], p: usize, k: usize) -> f64 {
    let k0 = gammas.len() - 1;
    if k >= k0 {
        return 0.0;
    }
    let mut acc = NeumaierSum::new();
    for s in 0..p + k0 {
        let mut diag = 0.0;
        for (l1, g1) in gammas.iter().enumerate() {
            let Some(j1) = s.checked_sub(l1).filter(|&j| j < p) else {
                continue;
            };
            for (l2, g2) in gammas.iter().enumerate() {
                let Some(j2) = s.checked_sub(l2).filter(|&j| j < p) else {
                    continue;
                };
                diag += g1 * g2 * toeplitz(acv, j1, j2, Some(k));
            }
        }
        acc += diag * diag;
    }
    acc.value()
}

/// `tr(Σ⁴) = Σ_ij (Σ²)_ij²` over the band of `Σ²`.
fn trace_sigma4(acv: &[f64], p: usize) -> f64 {
    let k0 = acv.len() - 1;
    let mut acc = NeumaierSum::new();
    for i in 0..p {
        for j in i.saturating_sub(2 * k0)..=(i + 2 * k0).min(p - 1) {
            let mut s = 0.0;
            for m in i.saturating_sub(k0)..=(i + k0).min(p - 1) {
                s += toeplitz(acv, i, m, None) * toeplitz(acv, m, j, None);
            }
            acc += s * s;
        }
    }
    acc.value()
}

/// All population quantities for `k = 0..=k_max`; `ν` uses `n = spec.n`.
pub fn population_quantities(spec: &MaModelSpec, k_max: usize) -> Result<PopulationQuantities> {
    let p = spec.p;
    if k_max >= p {
        return Err(Error::BandwidthOutOfRange {
            k: k_max,
            max: p - 1,
        });
    }
    let acv = autocovariances(spec.gammas());
    let tr_sigma2 = banded_trace(&acv, p, acv.len() - 1);
    let tr_bk2: Vec<f64> = (0..=k_max).map(|k| banded_trace(&acv, p, k)).collect();
    let r: Vec<f64> = tr_bk2.iter().map(|t| t / tr_sigma2).collect();
    let one_minus_r = r.iter().map(|r| 1.0 - r).collect();
    // Tail sums avoid the cancellation in tr(Σ²) - tr[{B_k Σ}²].
    let signal: Vec<f64> = (0..=k_max)
        .map(|k| {
            acv.iter()
                .enumerate()
                .take(p)
                .skip(k + 1)
                .map(|(q, g)| 2.0 * (p - q) as f64 * g * g)
                .sum::<NeumaierSum>()
                .value()
        })
        .collect();
    let n = spec.n as f64;
    let delta = spec.innovation.excess_kurtosis();
    let nu: Vec<f64> = (0..=k_max)
        .map(|k| {
            let lead = 4.0 / (n * n) * tr_sigma2 * tr_sigma2;
            let cross = 8.0 / n * trace_sigma_a_squared(&acv, p, k);
            let kurt = if delta != 0.0 {
                4.0 / n * delta * hadamard_trace(spec.gammas(), &acv, p, k)
            } else {
                0.0
            };
            (lead + cross + kurt).sqrt()
        })
        .collect();
    let delta_snr = signal.iter().zip(&nu).map(|(s, v)| s / v).collect();
    let tr_ratio = trace_sigma4(&acv, p) / (tr_sigma2 * tr_sigma2);
    Ok(PopulationQuantities {
        n: spec.n,
        band_profile: acv,
        tr_sigma2,
        tr_bk2,
        r,
        one_minus_r,
        signal,
        nu,
        delta_snr,
        tr_ratio,
    })
}

/// `ν²_nk` from dense matrices; reference for the banded evaluation.
pub fn nu_squared_dense(spec: &MaModelSpec, k: usize) -> Result<f64> {
    use crate::bandwidth::band_matrix;
    let sigma = population_sigma(spec);
    let gamma = coefficient_matrix(spec);
    let a = sigma.sub(&band_matrix(&sigma, k)?)?;
    let tr_s2 = sigma.matmul(&sigma)?.trace();
    let sa = sigma.matmul(&a)?;
    let cross = sa.matmul(&sa)?.trace();
    let gag = gamma.transpose().matmul(&a)?.matmul(&gamma)?;
    let had: f64 = (0..gag.rows()).map(|s| gag[(s, s)] * gag[(s, s)]).sum();
    let n = spec.n as f64;
    Ok(4.0 / (n * n) * tr_s2 * tr_s2
        + 8.0 / n * cross
        + 4.0 / n * spec.innovation.excess_kurtosis() * had)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandwidth::band_matrix;
    use crate::simgen::InnovationLaw;

    fn spec(tail: &[f64], p: usize, law: InnovationLaw) -> MaModelSpec {
        MaModelSpec::with_unit_lead(tail, law, 40, p, 0).unwrap()
    }

    #[test]
    fn identity_model() {
        let s = spec(&[], 6, InnovationLaw::StandardNormal);
        assert_eq!(population_sigma(&s), Matrix::identity(6));
        let pq = population_quantities(&s, 5).unwrap();
        assert!(pq.r.iter().all(|&r| r == 1.0));
        assert!(pq.signal.iter().all(|&x| x == 0.0));
        assert!(pq.delta_snr.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn ma2_sigma_by_direct_product() {
        let s = spec(&[1.0, 1.0], 4, InnovationLaw::StandardNormal);
        let g = coefficient_matrix(&s);
        let direct = g.matmul(&g.transpose()).unwrap();
        let expected = Matrix::from_fn(4, 4, |i, j| [3.0, 2.0, 1.0, 0.0][i.abs_diff(j)]);
        assert_eq!(population_sigma(&s), expected);
        assert_eq!(direct, expected);
        // bandwidth: entry (1, k0 + 2) in one-based indexing is zero
        assert_eq!(expected[(0, 3)], 0.0);
    }

    #[test]
    fn one_minus_r_closed_form() {
        let s = spec(&[1.0, 1.0], 100, InnovationLaw::StandardNormal);
        let pq = population_quantities(&s, 3).unwrap();
        let p = 100.0;
        let tr = 9.0 * p + 8.0 * (p - 1.0) + 2.0 * (p - 2.0);
        assert!((pq.tr_sigma2 - tr).abs() < 1e-10 * tr);
        let want = 2.0 * (p - 2.0) / tr;
        assert!((pq.one_minus_r[1] - want).abs() < 1e-12);
        let sigma = population_sigma(&s);
        let brute = band_matrix(&sigma, 1).unwrap().sum_of_squares();
        assert!((pq.tr_bk2[1] - brute).abs() < 1e-10 * brute);
        assert_eq!(pq.r[2], 1.0);
        assert_eq!(pq.r[3], 1.0);
    }

    #[test]
    fn nu_under_null_is_leading_term() {
        let s = spec(&[0.4; 5], 60, InnovationLaw::StandardizedGamma);
        let pq = population_quantities(&s, 8).unwrap();
        for k in 5..=8 {
            let lead = 2.0 * pq.tr_sigma2 / 40.0;
            assert!((pq.nu[k] - lead).abs() < 1e-12 * lead);
        }
    }

    #[test]
    fn banded_nu_matches_dense() {
        for law in [InnovationLaw::StandardNormal, InnovationLaw::StandardizedGamma] {
            for tail in [&[1.0, 1.0][..], &[0.5, 0.25][..], &[0.4; 5][..], &[0.2, 0.2, 0.4][..]] {
                let s = spec(tail, 23, law);
                let pq = population_quantities(&s, 7).unwrap();
                for k in 0..=7 {
                    let dense = nu_squared_dense(&s, k).unwrap().sqrt();
                    assert!((pq.nu[k] - dense).abs() < 1e-10 * dense, "k={k} {} {dense}", pq.nu[k]);
                }
                let sigma = population_sigma(&s);
                let s2 = sigma.matmul(&sigma).unwrap();
                let t4 = s2.matmul(&s2).unwrap().trace();
                let ratio = t4 / (pq.tr_sigma2 * pq.tr_sigma2);
                assert!((pq.tr_ratio - ratio).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn k_max_checked() {
        let s = spec(&[1.0], 5, InnovationLaw::StandardNormal);
        assert!(population_quantities(&s, 5).is_err());
    }
}
