//! Exponential integral E1.

use super::{domain, SpecResult};

/// E1(x) = int_x^inf e^{-t}/t dt for x > 0.
///
/// Power series below 1, Lentz continued fraction above.
pub fn expint_e1(x: f64) -> SpecResult<f64> {
    if !x.is_finite() || x <= 0.0 {
        return domain(format!("expint_e1: need x > 0, got {x}"));
    }
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let del = -term / k as f64;
            sum += del;
            if del.abs() < 1e-17 * (sum.abs() + 1.0) {
                break;
            }
        }
        Ok(sum - super::EULER_GAMMA - x.ln())
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                return Ok(h * (-x).exp());
            }
        }
        Err(super::SpecFunError::NoConvergence(format!("expint_e1 at x={x}")))
    }
}
