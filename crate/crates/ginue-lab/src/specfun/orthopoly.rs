//! Orthogonal polynomial recurrences: physicists' Hermite at complex
//! argument, generalized Laguerre, and the rescaled monic Hermite family
//! underlying the elliptic Gaussian kernel, kept in scaled form so that
//! degrees around 10^3 at large argument do not overflow.

use num_complex::Complex64;

use super::Scaled;

/// H_n(z), physicists' normalization: H_{n+1} = 2z H_n - 2n H_{n-1}.
pub fn hermite_phys(n: u32, z: Complex64) -> Complex64 {
    let mut prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * z;
    for k in 1..n {
        let next = 2.0 * z * cur - 2.0 * (k as f64) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// L_n^alpha(x): (n+1) L_{n+1} = (2n+1+alpha-x) L_n - (n+alpha) L_{n-1}.
pub fn laguerre(n: u32, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// The monic polynomials C_n(z) = (tau/2)^{n/2} H_n(z / sqrt(2 tau)),
/// which satisfy C_{n+1} = z C_n - n tau C_{n-1} and reduce to z^n as
/// tau -> 0. Returns C_0 .. C_n in mantissa-exponent form; true value of
/// entry k is mantissa * exp(log_scale).
pub fn monic_hermite_scaled(n: usize, tau: f64, z: Complex64) -> Vec<Scaled> {
    let mut out = Vec::with_capacity(n + 1);
    let mut log_offset = 0.0;
    // a, b hold C_{k-1}, C_k relative to the running offset.
    let mut a = Complex64::new(0.0, 0.0);
    let mut b = Complex64::new(1.0, 0.0);
    out.push(Scaled { mantissa: b, log_scale: log_offset });
    for k in 0..n {
        let next = z * b - (k as f64) * tau * a;
        a = b;
        b = next;
        let m = a.norm().max(b.norm());
        if m > 1e120 {
            let s = m.ln();
            let inv = (-s).exp();
            a *= inv;
            b *= inv;
            log_offset += s;
        }
        out.push(Scaled { mantissa: b, log_scale: log_offset });
    }
    out
}
