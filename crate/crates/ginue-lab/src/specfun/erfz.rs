//! Error function at complex argument.
//!
//! The boundary kernel evaluates erf along lines parallel to the imaginary
//! axis, where |erf| grows like exp(Im(z)^2), so the split of methods is
//! chosen by the real part: the Maclaurin series loses at most a factor
//! exp(2 Re(z)^2) to cancellation and is used for Re(z) <= 2.5, while the
//! Laplace continued fraction for erfc converges for larger real parts.
//! Arguments with |Im(z)| beyond about 26 overflow the result itself and are
//! outside the supported range.

use num_complex::Complex64;

use super::gamma::erf;

const SERIES_SPLIT: f64 = 2.5;
const SQRT_PI: f64 = 1.772_453_850_905_516;

/// erf(z) for complex z. Odd in z and real on the real axis.
pub fn erf_complex(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        return Complex64::new(erf(z.re), 0.0);
    }
    if z.re < 0.0 {
        return -erf_complex(-z);
    }
    if z.re <= SERIES_SPLIT {
        erf_series(z)
    } else {
        Complex64::new(1.0, 0.0) - erfc_cf(z)
    }
}

/// erfc(z) = 1 - erf(z).
pub fn erfc_complex(z: Complex64) -> Complex64 {
    if z.re > SERIES_SPLIT {
        erfc_cf(z)
    } else {
        Complex64::new(1.0, 0.0) - erf_complex(z)
    }
}

/// Maclaurin series erf(z) = (2/sqrt(pi)) sum_k (-1)^k z^{2k+1}/(k!(2k+1)).
fn erf_series(z: Complex64) -> Complex64 {
    let z2 = z * z;
    let mut power = z;
    let mut sum = z;
    let mut largest = z.norm();
    for k in 1..400 {
        power *= -z2 / k as f64;
        let term = power / (2 * k + 1) as f64;
        sum += term;
        largest = largest.max(term.norm());
        if term.norm() < 1e-18 * largest && (k as f64) > z.norm_sqr() {
            break;
        }
    }
    sum * (2.0 / SQRT_PI)
}

/// Laplace continued fraction
/// erfc(z) = e^{-z^2}/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))),
/// evaluated by the modified Lentz algorithm; valid for Re(z) > 0.
fn erfc_cf(z: Complex64) -> Complex64 {
    const FPMIN: f64 = 1e-290;
    let tiny = Complex64::new(FPMIN, 0.0);
    let mut f = z;
    if f.norm() < FPMIN {
        f = tiny;
    }
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for j in 1..400 {
        let a = Complex64::new(j as f64 / 2.0, 0.0);
        d = z + a * d;
        if d.norm() < FPMIN {
            d = tiny;
        }
        c = z + a / c;
        if c.norm() < FPMIN {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    (-z * z).exp() / (SQRT_PI * f)
}
