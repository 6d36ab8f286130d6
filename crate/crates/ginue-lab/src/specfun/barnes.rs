//! Barnes G-function at positive integers, where it is a product of
//! factorials.

use super::{domain, ln_gamma, SpecResult};

/// log G(n+1) = sum_{j=1}^{n-1} log j! for integer n >= 1,
/// so log_barnes_g(1) = log G(2) = 0.
pub fn log_barnes_g(n: u32) -> SpecResult<f64> {
    if n < 1 {
        return domain(format!("log_barnes_g: need n >= 1, got {n}"));
    }
    let mut sum = 0.0;
    for j in 1..n {
        sum += ln_gamma(j as f64 + 1.0);
    }
    Ok(sum)
}
