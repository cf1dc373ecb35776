use crate::error::{Error, Result};

/// An `n x p` observation matrix; row `i` is observation `X_i`.
///
/// Values are stored row-major. Every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// Smallest `n` for which the fourth-order U-statistic is defined.
    pub const MIN_OBSERVATIONS: usize = 4;

    /// Builds a matrix from row-major values, checking that every entry is
    /// finite. `n` must be at least 1 and `p` at least 1; the stricter
    /// statistical minimums are checked by the operations that need them.
    pub fn from_row_major(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::Shape(format!("empty matrix ({n} x {p})")));
        }
        if values.len() != n * p {
            return Err(Error::Shape(format!(
                "expected {} values for {n} x {p}, got {}",
                n * p,
                values.len()
            )));
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: idx / p,
                col: idx % p,
            });
        }
        Ok(Self { n, p, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(n * p);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != p {
                return Err(Error::Shape(format!(
                    "row {i} has {} columns, expected {p}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::from_row_major(n, p, values)
    }

    pub fn zeros(n: usize, p: usize) -> Self {
        Self {
            n,
            p,
            values: vec![0.0; n * p],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Returns the sub-matrix made of the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut values = Vec::with_capacity(idx.len() * self.p);
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        Self {
            n: idx.len(),
            p: self.p,
            values,
        }
    }

    /// Applies `f` to every entry. The result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_row_major(self.n, self.p, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Column-major copy with each column centred at its mean.
    pub(crate) fn centered_columns(&self) -> Vec<Vec<f64>> {
        let n = self.n as f64;
        (0..self.p)
            .map(|j| {
                let mean = self.rows().map(|r| r[j]).sum::<f64>() / n;
                self.rows().map(|r| r[j] - mean).collect()
            })
            .collect()
    }

    pub(crate) fn require_min_n(&self, min: usize) -> Result<()> {
        if self.n < min {
            Err(Error::TooFewObservations { n: self.n, min })
        } else {
            Ok(())
        }
    }
}
