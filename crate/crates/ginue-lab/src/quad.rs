//! Quadrature rules: Gauss-Legendre on an interval (fixed and adaptive) and
//! a polar product rule for integrals over centered disks and annuli.

use num_complex::Complex64;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1], by
/// Newton iteration on P_n with the asymptotic root estimate as seed.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_with_deriv(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integral of f over [a, b] by a single n-point Gauss-Legendre rule.
pub fn integrate_gl<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let (xs, ws) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    xs.iter().zip(&ws).map(|(&x, &w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// Adaptive bisection with a 15-point rule per panel; returns the value and
/// an error estimate from the panel-vs-halves differences.
pub fn adaptive_gl<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (xs, ws) = gauss_legendre(15);
    fn panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, xs: &[f64], ws: &[f64]) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        xs.iter().zip(ws).map(|(&x, &w)| w * f(mid + half * x)).sum::<f64>() * half
    }
    // Explicit stack instead of recursion so pathological integrands hit the
    // depth cap rather than overflowing.
    let whole = panel(f, a, b, &xs, &ws);
    let mut stack = vec![(a, b, whole, 0u32)];
    let mut total = 0.0;
    let mut err_total = 0.0;
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(f, lo, mid, &xs, &ws);
        let right = panel(f, mid, hi, &xs, &ws);
        let err = (left + right - coarse).abs();
        if err < tol * ((hi - lo) / (b - a)).max(1e-3) || depth >= 40 {
            total += left + right;
            err_total += err;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    (total, err_total)
}

/// Product rule for integrals over the annulus r_min <= |z| <= r_max:
/// Gauss-Legendre in radius (with the r dr factor folded into the weight)
/// and the trapezoid rule in angle, which is spectrally accurate for the
/// periodic direction. Returns (points, weights) for sums
/// integral f d^2 z ~ sum_k w_k f(z_k).
pub fn polar_grid(r_min: f64, r_max: f64, n_r: usize, n_theta: usize) -> Vec<(Complex64, f64)> {
    let (xs, ws) = gauss_legendre(n_r);
    let half = 0.5 * (r_max - r_min);
    let mid = 0.5 * (r_max + r_min);
    let dtheta = 2.0 * std::f64::consts::PI / n_theta as f64;
    let mut grid = Vec::with_capacity(n_r * n_theta);
    for (&x, &w) in xs.iter().zip(&ws) {
        let r = mid + half * x;
        let wr = w * half * r * dtheta;
        for j in 0..n_theta {
            let theta = j as f64 * dtheta;
            grid.push((Complex64::from_polar(r, theta), wr));
        }
    }
    grid
}

/// Radial-only rule: integral_0^inf 2 pi r g(r) dr truncated at r_max,
/// for rotation-invariant integrands.
pub fn radial_integral<F: FnMut(f64) -> f64>(mut g: F, r_min: f64, r_max: f64, n: usize) -> f64 {
    integrate_gl(|r| 2.0 * std::f64::consts::PI * r * g(r), r_min, r_max, n)
}
