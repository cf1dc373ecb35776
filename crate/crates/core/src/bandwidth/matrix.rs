//! Small dense-matrix utilities: sample covariance, banding and norms.

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for m in 0..self.cols {
                let a = self[(i, m)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(m, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape("matrix dimensions differ".into()));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Sum of squared entries, i.e. `tr(A Aᵀ)`.
    pub fn sum_of_squares(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// Maximum absolute column sum, `‖A‖_(1,1)`.
    pub fn norm_11(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.sum_of_squares().sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Sample covariance with divisor `n - 1`. The result is exactly symmetric.
pub fn sample_covariance(data: &DataMatrix) -> Result<Matrix> {
    data.require_min_n(2)?;
    let cols = data.centered_columns();
    let p = data.p();
    let denom = (data.n() - 1) as f64;
    let mut s = Matrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let c = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum::<f64>() / denom;
            s[(i, j)] = c;
            s[(j, i)] = c;
        }
    }
    Ok(s)
}

/// `B_k(m)`: zeroes every entry with `|i - j| > k`.
pub fn band_matrix(m: &Matrix, k: usize) -> Result<Matrix> {
    let max = m.rows.max(m.cols).saturating_sub(1);
    if k > max {
        return Err(Error::BandwidthOutOfRange { k, max });
    }
    Ok(Matrix::from_fn(m.rows, m.cols, |i, j| {
        if i.abs_diff(j) <= k {
            m[(i, j)]
        } else {
            0.0
        }
    }))
}
