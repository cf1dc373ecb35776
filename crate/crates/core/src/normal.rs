//! Standard normal tail probabilities.

use std::f64::consts::SQRT_2;

/// Upper tail `1 - Φ(x)`, evaluated through `erfc` so that it keeps full
/// relative accuracy for large positive `x`.
pub fn upper_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Standard normal CDF `Φ(x)`.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}
