//! Testing whether a high-dimensional covariance matrix is banded, and
//! estimating its bandwidth, from an `n x p` sample with possibly `p ≫ n`.
//!
//! The building block is [`ustat::lag_profile`], which computes unbiased
//! estimates of the squared-covariance mass on every sub-diagonal. The
//! bandedness test ([`band_test`]), the bandwidth estimators
//! ([`bandwidth`]) and the moving-average simulation harness ([`simgen`])
//! are layered on top.

pub mod bandwidth;
pub mod data;
pub mod error;
pub mod normal;
pub mod simgen;
pub mod sum;
pub mod ustat;

pub use band_test::{run_test, scan, BandTestResult, TestScan};
pub use data::DataMatrix;
pub use error::{Error, Result};
pub use ustat::{lag_profile, lag_profile_bruteforce, p_value, t_stat, v_stat, w_stat, LagProfile};
