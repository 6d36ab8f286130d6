//! Polylogarithm at nonpositive integer order, where Li_{-m}(x) is the
//! rational function obtained by applying (x d/dx) m times to x/(1-x).

use super::{domain, SpecResult};

/// Li_{-m}(x) for m >= 0 and x < 1, via the Eulerian-number closed form
/// Li_{-m}(x) = (1-x)^{-m-1} sum_{k=0}^{m-1} A(m,k) x^{m-k} (m >= 1).
pub fn polylog_negint(m: u32, x: f64) -> SpecResult<f64> {
    if !x.is_finite() || x >= 1.0 {
        return domain(format!("polylog_negint: need x < 1, got {x}"));
    }
    if m == 0 {
        return Ok(x / (1.0 - x));
    }
    if m > 18 {
        // Eulerian numbers exceed 2^53 beyond this; nothing in this crate
        // needs cumulants of such high order.
        return domain(format!("polylog_negint: order {m} > 18 unsupported"));
    }
    let m = m as usize;
    // Eulerian triangle row m by the recurrence
    // A(n,k) = (k+1) A(n-1,k) + (n-k) A(n-1,k-1); every value here is an
    // integer below 2^53, so f64 arithmetic is exact.
    let mut row = vec![0.0f64; m];
    row[0] = 1.0;
    for n in 2..=m {
        for k in (1..n).rev() {
            row[k] = (k as f64 + 1.0) * row[k] + (n - k) as f64 * row[k - 1];
        }
    }
    let mut num = 0.0;
    for (k, a) in row.iter().enumerate() {
        num += a * x.powi((m - k) as i32);
    }
    Ok(num / (1.0 - x).powi(m as i32 + 1))
}
