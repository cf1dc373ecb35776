//! Sample-splitting risk minimisation for the banding parameter.
//!
//! Each split draws a uniformly random partition of the rows into sizes
//! `n1` and `n2 = n - n1`, and scores `‖B_k(Σ̂₁) - Σ̂₂‖` for every `k`.
//! Split `v` draws from its own ChaCha8 stream (`seed`, stream `v`), so the
//! risk curve does not depend on scheduling.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::matrix::{sample_covariance, Matrix};
use super::{BandwidthEstimate, Diagnostics, Method, RiskNorm};
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

pub const DEFAULT_SPLITS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlVariant {
    /// `n1 = ⌊n/3⌋`, `(1,1)` norm.
    A,
    /// `n1 = ⌊n(1 - 1/ln n)⌋`, Frobenius norm.
    B,
}

impl BlVariant {
    pub fn method(self) -> Method {
        match self {
            BlVariant::A => Method::BLa,
            BlVariant::B => Method::BLb,
        }
    }

    pub fn norm(self) -> RiskNorm {
        match self {
            BlVariant::A => RiskNorm::L11,
            BlVariant::B => RiskNorm::Frobenius,
        }
    }
}

/// `(n1, n2)` for the variant, with `n1` floored and clamped to `[2, n-2]`.
pub fn split_sizes(n: usize, variant: BlVariant) -> Result<(usize, usize)> {
    if n < 6 {
        return Err(Error::TooFewObservations { n, min: 6 });
    }
    let nf = n as f64;
    let raw = match variant {
        BlVariant::A => nf / 3.0,
        BlVariant::B => nf * (1.0 - 1.0 / nf.ln()),
    };
    let n1 = (raw.floor() as usize).clamp(2, n - 2);
    Ok((n1, n - n1))
}

/// Loss of `B_k(s1)` against `s2` for every `k = 0..=k_max`.
///
/// Entries are grouped by their distance `d = |i - j|` from the diagonal:
/// for each `k` the loss combines the in-band part `|s1 - s2|` with the
/// out-of-band part `|s2|`, each accumulated separately so no cancellation
/// occurs.
pub(crate) fn split_losses(s1: &Matrix, s2: &Matrix, k_max: usize, norm: RiskNorm) -> Vec<f64> {
    let p = s1.rows();
    match norm {
        RiskNorm::Frobenius => {
            let mut inside = vec![0.0; p];
            let mut outside = vec![0.0; p];
            for i in 0..p {
                for j in 0..p {
                    let d = i.abs_diff(j);
                    let r = s1[(i, j)] - s2[(i, j)];
                    inside[d] += r * r;
                    outside[d] += s2[(i, j)] * s2[(i, j)];
                }
            }
            let mut tail = vec![0.0; p + 1];
            for d in (0..p).rev() {
                tail[d] = tail[d + 1] + outside[d];
            }
            let mut head = NeumaierSum::new();
            (0..=k_max)
                .map(|k| {
                    head += inside[k];
                    (head.value() + tail[k + 1]).sqrt()
                })
                .collect()
        }
        RiskNorm::L11 => {
            let mut best = vec![0.0f64; k_max + 1];
            let mut inside = vec![0.0; p];
            let mut outside = vec![0.0; p];
            let mut tail = vec![0.0; p + 1];
            for j in 0..p {
                inside.iter_mut().for_each(|v| *v = 0.0);
                outside.iter_mut().for_each(|v| *v = 0.0);
                for i in 0..p {
                    let d = i.abs_diff(j);
                    inside[d] += (s1[(i, j)] - s2[(i, j)]).abs();
                    outside[d] += s2[(i, j)].abs();
                }
                tail[p] = 0.0;
                for d in (0..p).rev() {
                    tail[d] = tail[d + 1] + outside[d];
                }
                let mut head = 0.0;
                for (k, b) in best.iter_mut().enumerate() {
                    head += inside[k];
                    *b = b.max(head + tail[k + 1]);
                }
            }
            best
        }
    }
}

/// Sample-splitting bandwidth choice over `k = 0..=k_max`, ties to the
/// smallest `k`.
pub fn bl_bandwidth(
    data: &DataMatrix,
    variant: BlVariant,
    n_splits: usize,
    k_max: usize,
    seed: u64,
) -> Result<BandwidthEstimate> {
    let (n1, n2) = split_sizes(data.n(), variant)?;
    if n_splits == 0 {
        return Err(Error::InvalidParameter("n_splits must be >= 1".into()));
    }
    if k_max >= data.p() {
        return Err(Error::BandwidthOutOfRange {
            k: k_max,
            max: data.p() - 1,
        });
    }
    let norm = variant.norm();
    let per_split = (0..n_splits)
        .into_par_iter()
        .map(|v| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(v as u64);
            let mut idx: Vec<usize> = (0..data.n()).collect();
            idx.shuffle(&mut rng);
            let s1 = sample_covariance(&data.select_rows(&idx[..n1]))?;
            let s2 = sample_covariance(&data.select_rows(&idx[n1..]))?;
            Ok(split_losses(&s1, &s2, k_max, norm))
        })
        .collect::<Result<Vec<_>>>()?;
    let risk: Vec<f64> = (0..=k_max)
        .map(|k| per_split.iter().map(|l| l[k]).sum::<NeumaierSum>().value() / n_splits as f64)
        .collect();
    let mut k_hat = 0;
    for (k, r) in risk.iter().enumerate() {
        if *r < risk[k_hat] {
            k_hat = k;
        }
    }
    Ok(BandwidthEstimate {
        method: variant.method(),
        k_hat: Some(k_hat),
        diagnostics: Diagnostics::SampleSplit {
            norm,
            n1,
            n2,
            n_splits,
            seed,
            risk,
        },
    })
}

/// Default risk-search ceiling `min(p - 1, 4n)`.
pub fn default_bl_k_max(n: usize, p: usize) -> usize {
    p.saturating_sub(1).min(4 * n)
}
