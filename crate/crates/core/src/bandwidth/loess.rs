//! Locally weighted linear regression with tricube weights, and the plain
//! least-squares line used when there are too few points for it.

use crate::error::{Error, Result};

#[inline]
fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        let t = 1.0 - u * u * u;
        t * t * t
    }
}

/// Weighted least-squares line evaluated at `x0`. `None` when fewer than
/// two distinct abscissae carry positive weight.
fn weighted_line_at(xs: &[f64], ys: &[f64], ws: &[f64], x0: f64) -> Option<f64> {
    let sw: f64 = ws.iter().sum();
    if sw.is_nan() || sw <= 0.0 {
        return None;
    }
    let xbar = xs.iter().zip(ws).map(|(x, w)| w * x).sum::<f64>() / sw;
    let ybar = ys.iter().zip(ws).map(|(y, w)| w * y).sum::<f64>() / sw;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for ((x, y), w) in xs.iter().zip(ys).zip(ws) {
        let dx = x - xbar;
        sxx += w * dx * dx;
        sxy += w * dx * (y - ybar);
    }
    let spread = xs
        .iter()
        .zip(ws)
        .filter(|(_, w)| **w > 0.0)
        .map(|(x, _)| (x - xbar).abs())
        .fold(0.0, f64::max);
    if spread == 0.0 || sxx.is_nan() || sxx <= 0.0 {
        return None;
    }
    Some(ybar + sxy / sxx * (x0 - xbar))
}

fn distinct_count(xs: &[f64]) -> usize {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

fn check_points(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::Shape(format!(
            "{} x values but {} y values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite regression input".into()));
    }
    if distinct_count(xs) < 2 {
        return Err(Error::InsufficientPoints);
    }
    Ok(())
}

/// Ordinary least-squares line fitted to all points, evaluated at each `x`.
pub fn ols_line_fit(xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
    check_points(xs, ys)?;
    let ws = vec![1.0; xs.len()];
    xs.iter()
        .map(|&x0| weighted_line_at(xs, ys, &ws, x0).ok_or(Error::InsufficientPoints))
        .collect()
}

/// Local linear fit at every `x`.
///
/// The neighbourhood of `x0` is its `⌈span · m⌉` nearest points; the
/// bandwidth `h` is the distance to the farthest of them and weights are
/// `(1 - (d/h)³)³`. If that leaves fewer than two distinct abscissae with
/// positive weight the neighbourhood grows one point at a time, and past
/// the whole sample `h` is doubled.
pub fn local_linear_fit(xs: &[f64], ys: &[f64], span: f64) -> Result<Vec<f64>> {
    if !(span > 0.0 && span <= 1.0) {
        return Err(Error::InvalidParameter(format!("span {span} outside (0, 1]")));
    }
    check_points(xs, ys)?;
    let m = xs.len();
    let q0 = ((span * m as f64).ceil() as usize).clamp(1, m);
    let mut dist = vec![0.0; m];
    let mut sorted = vec![0.0; m];
    let mut ws = vec![0.0; m];
    let mut fitted = Vec::with_capacity(m);
    for &x0 in xs {
        for (d, x) in dist.iter_mut().zip(xs) {
            *d = (x - x0).abs();
        }
        sorted.copy_from_slice(&dist);
        sorted.sort_by(f64::total_cmp);
        let mut q = q0;
        let mut h = sorted[q - 1];
        let value = loop {
            for (w, d) in ws.iter_mut().zip(&dist) {
                *w = if h > 0.0 { tricube(d / h) } else { 0.0 };
            }
            if let Some(v) = weighted_line_at(xs, ys, &ws, x0) {
                break v;
            }
            if q < m {
                q += 1;
                h = sorted[q - 1];
            } else {
                h = if h > 0.0 { 2.0 * h } else { sorted[m - 1] };
            }
        };
        fitted.push(value);
    }
    Ok(fitted)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent per-point WLS via the 2x2 normal equations and Cramer's
    /// rule, with weights computed from the nominal `⌈span m⌉` neighbourhood.
    fn oracle(xs: &[f64], ys: &[f64], span: f64) -> Vec<f64> {
        let m = xs.len();
        let q = (span * m as f64).ceil() as usize;
        xs.iter()
            .map(|&x0| {
                let mut d: Vec<f64> = xs.iter().map(|x| (x - x0).abs()).collect();
                d.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let h = d[q - 1];
                let (mut a00, mut a01, mut a11, mut b0, mut b1) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for (x, y) in xs.iter().zip(ys) {
                    let u = (x - x0).abs() / h;
                    let w = if u < 1.0 { (1.0 - u.powi(3)).powi(3) } else { 0.0 };
                    a00 += w;
                    a01 += w * x;
                    a11 += w * x * x;
                    b0 += w * y;
                    b1 += w * x * y;
                }
                let det = a00 * a11 - a01 * a01;
                let c0 = (b0 * a11 - a01 * b1) / det;
                let c1 = (a00 * b1 - a01 * b0) / det;
                c0 + c1 * x0
            })
            .collect()
    }

    #[test]
    fn reproduces_lines() {
        let xs: Vec<f64> = (0..15).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.7 * x).collect();
        for span in [0.3, 0.75, 1.0] {
            let fit = local_linear_fit(&xs, &ys, span).unwrap();
            for (f, y) in fit.iter().zip(&ys) {
                assert!((f - y).abs() < 1e-10);
            }
        }
        let fit = ols_line_fit(&xs, &ys).unwrap();
        assert!(fit.iter().zip(&ys).all(|(f, y)| (f - y).abs() < 1e-10));
    }

    #[test]
    fn outlier_is_shrunk_towards_line() {
        let xs: Vec<f64> = (0..30).map(f64::from).collect();
        let mut ys: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        ys[15] += 10.0;
        let fit = local_linear_fit(&xs, &ys, 0.75).unwrap();
        assert!(fit[15] > 30.0 && fit[15] < 40.0, "{}", fit[15]);
    }

    #[test]
    fn step_function_matches_oracle() {
        let xs: Vec<f64> = (0..40).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| if x < 20.0 { 1.0 } else { 0.0 }).collect();
        let fit = local_linear_fit(&xs, &ys, 0.75).unwrap();
        let expect = oracle(&xs, &ys, 0.75);
        for (f, e) in fit.iter().zip(&expect) {
            assert!((f - e).abs() < 1e-8);
        }
        // Transition is broadly decreasing.
        assert!(fit[5] > fit[20] && fit[20] > fit[35]);
    }

    #[test]
    fn tiny_samples_still_fit() {
        let fit = local_linear_fit(&[0.0, 1.0], &[1.0, 3.0], 0.75).unwrap();
        assert!((fit[0] - 1.0).abs() < 1e-12 && (fit[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(
            local_linear_fit(&[1.0, 1.0], &[0.0, 2.0], 0.5),
            Err(Error::InsufficientPoints)
        );
        assert!(local_linear_fit(&[0.0, 1.0], &[0.0, 1.0], 0.0).is_err());
        assert!(local_linear_fit(&[0.0, 1.0], &[0.0, 1.0], 1.5).is_err());
        assert!(ols_line_fit(&[0.0, 1.0], &[0.0]).is_err());
    }
}
