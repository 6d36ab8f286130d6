//! Machine checks of the electrostatic identities obeyed by the eigenvalue
//! point process in its Coulomb gas reading: charge neutrality and multipole
//! cancellation of the screening cloud around conditioned points, the
//! Stillinger-Lovett second moment and its fourth and sixth order companions,
//! the Carnie-Chan potential rule, the boundary dipole law, and the Ward
//! (stress) identity sampled by Metropolis at general coupling.
//!
//! Each check produces a [`Residual`]: the value the identity asserts, the
//! value the lab computed, and an error budget. Deterministic checks
//! integrate the exact determinantal correlations at coupling beta = 2. The
//! double integrals that fail Fubini (the potential and boundary dipole
//! rules) are evaluated strictly inner integral first, which is the order the
//! identities require. Improper integrals are cut off with the discarded
//! Gaussian tails bounded explicitly into `err_est`; the inverse square tail
//! of the boundary pair correlation parallel to the edge, which a plain
//! cutoff would miss, is added back from its closed asymptotic form.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::kernels::{kernel_limit, KernelError, LimitRegime};
use crate::quad::{adaptive_gl, gauss_legendre, integrate_gl};
use crate::sampler::CoulombChain;
use crate::specfun::{erf, erf_complex};
use crate::stats;

/// How a residual was obtained. Quadrature and closed-form values carry a
/// deterministic error budget; Monte Carlo values carry one standard error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Quadrature,
    MonteCarlo,
    ClosedForm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "mc",
            Method::ClosedForm => "closed-form",
        };
        f.write_str(s)
    }
}

/// Outcome of one identity check.
#[derive(Clone, Debug)]
pub struct Residual {
    pub name: String,
    pub target: f64,
    pub computed: f64,
    /// |computed - target|, never hidden behind a pass flag.
    pub residual: f64,
    pub method: Method,
    /// Quadrature: truncation plus discretisation bound. MC: one sigma.
    pub err_est: f64,
}

impl Residual {
    fn new(name: impl Into<String>, target: f64, computed: f64, method: Method, err_est: f64) -> Self {
        Residual {
            name: name.into(),
            target,
            computed,
            residual: (computed - target).abs(),
            method,
            err_est,
        }
    }
}

#[derive(Debug, Error)]
pub enum SumRuleError {
    #[error("bad arguments: {0}")]
    BadArguments(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("chain has never been swept; burn it in before measuring")]
    Unequilibrated,
}

pub type SumRuleResult<T> = Result<T, SumRuleError>;

fn bad(msg: impl Into<String>) -> SumRuleError {
    SumRuleError::BadArguments(msg.into())
}

/// Integration window for bulk quadratures. The correlations decay like
/// exp(-d^2) away from the conditioned points, so a disk of this radius
/// leaves tails far below every tolerance used here.
const BULK_WINDOW: f64 = 12.0;

fn bulk_kernel(w: Complex64, z: Complex64) -> SumRuleResult<Complex64> {
    Ok(kernel_limit(&LimitRegime::Bulk, w, z)?.value)
}

// ---------------------------------------------------------------------------
// Bulk screening moments around conditioned points
// ---------------------------------------------------------------------------

/// Weighted charge of the screening cloud around conditioned bulk points.
///
/// Conditioning the infinite gas on `anchors` and adding the unit point
/// charges sitting at the anchors themselves leaves an excess measure whose
/// moments against powers of the conjugate coordinate all vanish: the cloud
/// cancels not just the total charge but every multipole. The order `p`
/// moment is integrated over a disk of radius 12 and compared against zero.
///
/// The excess two-level density splits, by a Schur complement of the kernel
/// matrix on the anchor set, into `-rho_k(anchors)` times a positive quadratic
/// form in the kernel column, which is what the quadrature accumulates; the
/// conditioned point charges contribute their weights in closed form.
pub fn screening_residual(p: u32, anchors: &[Complex64]) -> SumRuleResult<Residual> {
    let k = anchors.len();
    if k == 0 || k > 3 {
        return Err(bad(format!("supported anchor counts are 1..=3, got {k}")));
    }
    if p > 8 {
        return Err(bad(format!("moment order {p} needs a wider window than {BULK_WINDOW}")));
    }
    let amax = anchors.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if amax > 3.0 {
        return Err(bad(format!("anchors must sit within |z| <= 3, got |z| = {amax:.3}")));
    }

    let mut gram = DMatrix::<Complex64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = bulk_kernel(anchors[i], anchors[j])?;
        }
    }
    let rho_k = gram.determinant().re;
    let inverse = gram
        .try_inverse()
        .filter(|_| rho_k > 1e-12)
        .ok_or_else(|| bad("anchors are too close together; the conditioned density vanishes"))?;

    // The anchor point charges, integrated against the delta factors.
    let charges: Complex64 = anchors.iter().map(|a| a.conj().powu(p)).sum();

    let cloud = |n_r: usize, n_theta: usize| -> SumRuleResult<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (z, w) in crate::quad::polar_grid(0.0, BULK_WINDOW, n_r, n_theta) {
            let mut column = [Complex64::new(0.0, 0.0); 3];
            for (ui, a) in column.iter_mut().zip(anchors) {
                *ui = bulk_kernel(*a, z)?;
            }
            let mut qform = 0.0;
            for i in 0..k {
                for j in 0..k {
                    qform += (column[i].conj() * inverse[(i, j)] * column[j]).re;
                }
            }
            acc += w * z.conj().powu(p) * (-rho_k * qform);
        }
        Ok(acc)
    };

    let fine = cloud(220, 512)?;
    let coarse = cloud(160, 384)?;
    let total = fine + rho_k * charges;
    // Outside the window the quadratic form is bounded by the largest inverse
    // entry times the Gaussian column norms, |u_i|^2 <= e^{-(r-a)^2}/pi^2.
    let inv_bound = inverse.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let tail = rho_k * inv_bound * k as f64 / (PI * PI)
        * 4.0
        * PI
        * BULK_WINDOW.powi(p as i32 + 2)
        * (-(BULK_WINDOW - amax).powi(2)).exp();
    let err = (fine - coarse).norm() + tail;
    Ok(Residual::new(
        format!("screening p={p} k={k}"),
        0.0,
        total.norm(),
        Method::Quadrature,
        err,
    ))
}

// ---------------------------------------------------------------------------
// Radial moments of the truncated pair correlation
// ---------------------------------------------------------------------------

/// Closed-form value of the order 2, 4 or 6 radial moment of the truncated
/// pair correlation of the plasma at coupling `beta` and density 1/pi. The
/// second moment is the Stillinger-Lovett law; the higher two carry the
/// thermal pressure factor (1 - beta/4) and its sixth order companion.
pub fn pair_moment_target(order: u32, beta: f64) -> SumRuleResult<f64> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(bad(format!("coupling must be positive, got {beta}")));
    }
    match order {
        2 => Ok(-2.0 / (PI * beta)),
        4 => Ok(-16.0 / (PI * beta * beta) * (1.0 - beta / 4.0)),
        6 => Ok(-18.0 / (PI * beta.powi(3)) * (beta - 6.0) * (beta - 8.0 / 3.0)),
        _ => Err(bad(format!(
            "no closed moment at order {order}; only 2, 4 and 6 are known"
        ))),
    }
}

fn pair_moment_residual(order: u32, name: &str) -> SumRuleResult<Residual> {
    let target = pair_moment_target(order, 2.0)?;
    let (xs, ws) = gauss_legendre(240);
    let half = 0.5 * BULK_WINDOW;
    let mut total = 0.0;
    for (&x, &w) in xs.iter().zip(&ws) {
        let r = half * (x + 1.0);
        let t2 = -bulk_kernel(Complex64::new(r, 0.0), Complex64::new(0.0, 0.0))?.norm_sqr();
        total += w * half * 2.0 * PI * r * r.powi(order as i32) * t2;
    }
    // Discarded mass: (2/pi) int_R^inf r^{m+1} e^{-r^2} dr, bounded by twice
    // the first term of its asymptotic series.
    let tail = (4.0 / PI) * BULK_WINDOW.powi(order as i32) * (-BULK_WINDOW * BULK_WINDOW).exp();
    Ok(Residual::new(name, target, total, Method::Quadrature, tail + 1e-12))
}

/// Second radial moment of the truncated pair correlation at beta = 2,
/// compared against the Stillinger-Lovett value -1/pi.
pub fn stillinger_lovett_residual() -> SumRuleResult<Residual> {
    pair_moment_residual(2, "stillinger_lovett")
}

/// Fourth or sixth radial moment at beta = 2, against -2/pi and -6/pi.
pub fn higher_moment_residual(order: u32) -> SumRuleResult<Residual> {
    if order != 4 && order != 6 {
        return Err(bad(format!("higher moments are order 4 or 6, got {order}")));
    }
    pair_moment_residual(order, &format!("pair_moment_{order}"))
}

// ---------------------------------------------------------------------------
// Carnie-Chan potential rule
// ---------------------------------------------------------------------------

/// Electric potential of the screening cloud plus its central charge at
/// distance `r`, obtained by integrating the log kernel against the bulk
/// excess pair measure over the inner variable first: the radial pieces
/// collapse to -(1/pi) times the integral of e^{-s^2}/s from r outward.
/// Returns the value and a quadrature-plus-tail error bound.
fn screened_potential(r: f64) -> (f64, f64) {
    let upper = r.max(8.0) + 1.0;
    let (v, e) = adaptive_gl(&mut |s: f64| (-s * s).exp() / s, r, upper, 1e-13);
    let tail = (-upper * upper).exp() / (2.0 * upper * upper);
    (-v / PI, (e + tail) / PI)
}

/// Carnie-Chan rule: minus beta times the plane integral of the screened
/// potential equals one. The integration order matters; integrating the
/// charge first would give zero by perfect screening, so the potential is
/// formed first and the plane integral taken second.
pub fn carnie_chan_residual() -> SumRuleResult<Residual> {
    let beta = 2.0;
    let outer_cut = 8.0;
    let mut inner_err: f64 = 0.0;
    let (outer, outer_err) = adaptive_gl(
        &mut |r: f64| {
            let (g, ge) = screened_potential(r);
            inner_err = inner_err.max(ge);
            2.0 * PI * r * g
        },
        0.0,
        outer_cut,
        1e-12,
    );
    let computed = -beta * outer;
    // |g(r)| <= e^{-r^2}/(2 pi r^2) past the cut, so the outer tail is tiny.
    let outer_tail = beta * (-outer_cut * outer_cut).exp() / outer_cut;
    let err = beta * (outer_err + PI * outer_cut * outer_cut * inner_err) + outer_tail;
    Ok(Residual::new("carnie_chan", 1.0, computed, Method::Quadrature, err))
}

// ---------------------------------------------------------------------------
// Boundary identities
// ---------------------------------------------------------------------------

/// ln |1 + erf(zeta)|^2, stable where the error function itself overflows.
///
/// The boundary pair correlation needs this at arguments with imaginary part
/// growing linearly in the along-edge separation, where |1 + erf| is of order
/// exp(Im^2 - Re^2). Past the representable range the large argument
/// expansion of erfc is used directly in logarithms.
fn log_abs2_one_plus_erf(zeta: Complex64) -> f64 {
    if zeta.im * zeta.im - zeta.re * zeta.re < 250.0 {
        let v = Complex64::new(1.0, 0.0) + erf_complex(zeta);
        return v.norm_sqr().ln();
    }
    // 1 + erf(zeta) = erfc(w) at w = -zeta, with |arg w| < 3 pi/4 here since
    // the imaginary part dominates. erfc(w) ~ e^{-w^2}/(sqrt(pi) w) times an
    // asymptotic series in 1/(2w^2); eight terms reach full precision for
    // the |w| >= 15 arguments that take this branch.
    let w = -zeta;
    let w2 = w * w;
    let mut term = Complex64::new(1.0, 0.0);
    let mut series = term;
    for m in 1..=8 {
        term *= -(2.0 * m as f64 - 1.0) / (2.0 * w2);
        series += term;
    }
    -2.0 * w2.re - 2.0 * w.norm().ln() - PI.ln() + series.norm_sqr().ln()
}

/// Truncated pair correlation of the boundary gas in edge coordinates
/// z = x + iy, bulk filling y > 0, evaluated in log space so the slow
/// inverse square decay along the boundary stays representable at any
/// separation.
fn edge_t2(z1: Complex64, z2: Complex64) -> f64 {
    let dx = z1.re - z2.re;
    let dy = z1.im - z2.im;
    let u = Complex64::new(0.5 * (z1.im + z2.im), 0.5 * (z2.re - z1.re));
    let s = -dx * dx - dy * dy + log_abs2_one_plus_erf(SQRT_2 * u) - (4.0 * PI * PI).ln();
    -s.exp()
}

/// Limiting boundary density profile, bulk side y > 0.
fn edge_density(y: f64) -> f64 {
    (1.0 + erf(SQRT_2 * y)) / (2.0 * PI)
}

/// First finite-size correction to the boundary profile, the coefficient of
/// the 1/sqrt(N) term in edge coordinates.
fn edge_density_correction(y: f64) -> f64 {
    (-2.0 * y * y).exp() * (y * y - 1.0) / (3.0 * PI * (2.0 * PI).sqrt())
}

/// Along-edge cutoff for the boundary row integrals. Beyond it the pair
/// correlation is pure inverse square with the closed coefficient
/// -(1/2 pi^3) e^{-2y^2 - 2y'^2}, which is integrated exactly.
const EDGE_X_CUT: f64 = 64.0;
const EDGE_X_PANELS: [f64; 7] = [0.0, 2.0, 4.0, 8.0, 16.0, 32.0, EDGE_X_CUT];
const EDGE_Y_SPAN: f64 = 7.0;

/// Integral over x' in R, y' in [-span, span] of
/// weight(y') * rho^T((0, y), (x', y')) for the boundary gas, with the
/// Lorentzian tail beyond the last x panel restored in closed form.
/// Returns the value and an error bound.
fn edge_row_integral(y: f64, weight: impl Fn(f64) -> f64) -> (f64, f64) {
    let (gx, gw) = gauss_legendre(32);
    let (hy, hw) = gauss_legendre(160);
    let p = Complex64::new(0.0, y);

    let mut total = 0.0;
    let mut tail = 0.0;
    let mut tail_mass = 0.0;
    for (&ty, &wy) in hy.iter().zip(&hw) {
        let yp = EDGE_Y_SPAN * ty;
        let wyp = EDGE_Y_SPAN * wy * weight(yp);
        if wyp == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for seg in EDGE_X_PANELS.windows(2) {
            let half = 0.5 * (seg[1] - seg[0]);
            let mid = 0.5 * (seg[1] + seg[0]);
            for (&tx, &wx) in gx.iter().zip(&gw) {
                let xp = mid + half * tx;
                row += wx * half * edge_t2(p, Complex64::new(xp, yp));
            }
        }
        // The integrand is even in x', so double the half line.
        total += wyp * 2.0 * row;

        // int_{|x'| > X} dx'/(a^2 + x'^2) = (2/|a|) atan(|a|/X), continuous
        // through a = 0 where it equals 2/X.
        let a = (y + yp).abs();
        let lorentz = if a < 1e-8 { 2.0 / EDGE_X_CUT } else { 2.0 * (a / EDGE_X_CUT).atan() / a };
        let coeff = (-2.0 * y * y - 2.0 * yp * yp).exp() / (2.0 * PI.powi(3));
        tail += wyp * (-coeff) * lorentz;
        tail_mass += wyp.abs() * coeff;
    }

    // Error budget: the next order of the along-edge expansion integrates to
    // (8/3) of the tail coefficient over the cube of the cutoff, plus the
    // Gaussian mass beyond the y' span.
    let err = (8.0 / 3.0) * tail_mass / EDGE_X_CUT.powi(3)
        + (1.0 + y.abs()) * (-2.0 * EDGE_Y_SPAN * EDGE_Y_SPAN).exp();
    (total + tail, err)
}

/// Charge deficit of the boundary screening cloud: conditioning on a point of
/// the boundary gas removes exactly one particle's worth of density from its
/// surroundings, at every distance from the edge. `ys` are the edge-normal
/// coordinates to probe (|y| <= 2); the reported value is the worst row sum
/// plus conditioned density, against a target of zero.
pub fn mass_one_residual(ys: &[f64]) -> SumRuleResult<Residual> {
    if ys.is_empty() {
        return Err(bad("need at least one probe coordinate"));
    }
    if ys.iter().any(|y| !y.is_finite() || y.abs() > 2.0) {
        return Err(bad("probe coordinates must satisfy |y| <= 2"));
    }
    let mut worst = 0.0f64;
    let mut err: f64 = 0.0;
    for &y in ys {
        let (row, e) = edge_row_integral(y, |_| 1.0);
        worst = worst.max((row + edge_density(y)).abs());
        err = err.max(e);
    }
    Ok(Residual::new("mass_one", 0.0, worst, Method::Quadrature, err))
}

/// Inner integral of the boundary dipole rule at height `y`: the first
/// moment of the screening cloud across the edge, x' integrated first.
/// Closed form -(8 pi^3)^{-1/2} e^{-2y^2}; returned by quadrature with its
/// error bound so the closed form can be checked against it.
pub fn edge_dipole_inner(y: f64) -> (f64, f64) {
    edge_row_integral(y, |yp| yp - y)
}

/// Boundary dipole rule: -2 pi beta times the edge-normal integral of the
/// inner dipole moment equals one. The inner integral is taken in closed
/// form (validated separately against quadrature) and the outer integral by
/// adaptive quadrature, strictly in that order; interchanging them would
/// annihilate the integrand by antisymmetry.
pub fn edge_dipole_residual() -> SumRuleResult<Residual> {
    let beta = 2.0;
    let cut = 6.0;
    let norm = (8.0 * PI.powi(3)).sqrt().recip();
    let (outer, outer_err) = adaptive_gl(&mut |y: f64| -norm * (-2.0 * y * y).exp(), -cut, cut, 1e-13);
    let computed = -2.0 * PI * beta * outer;
    let tail = 2.0 * PI * beta * norm * (-2.0 * cut * cut).exp() / cut;
    Ok(Residual::new(
        "edge_dipole",
        1.0,
        computed,
        Method::Quadrature,
        2.0 * PI * beta * outer_err + tail,
    ))
}

/// The three boundary density quadratures: the excess profile mass vanishes,
/// its first moment reproduces the integrated finite-size correction, and
/// that common value is -1/(8 pi) at beta = 2.
pub fn edge_density_sum_rules() -> SumRuleResult<[Residual; 3]> {
    let span = 8.0;
    let excess = |y: f64| edge_density(y) - if y > 0.0 { 1.0 / PI } else { 0.0 };
    // Split at the kink of the subtracted step.
    let mass = integrate_gl(excess, -span, 0.0, 96) + integrate_gl(excess, 0.0, span, 96);
    let dipole = integrate_gl(|y| y * excess(y), -span, 0.0, 96)
        + integrate_gl(|y| y * excess(y), 0.0, span, 96);
    let correction = integrate_gl(edge_density_correction, -span, span, 160);
    // Tails: the excess decays like e^{-2y^2} on both sides.
    let tail = (1.0 + span) * (-2.0 * span * span).exp();

    Ok([
        Residual::new("edge_excess_mass", 0.0, mass, Method::Quadrature, tail),
        Residual::new(
            "edge_dipole_matches_density_correction",
            correction,
            dipole,
            Method::Quadrature,
            2.0 * tail,
        ),
        Residual::new(
            "edge_dipole_moment",
            -1.0 / (8.0 * PI),
            dipole,
            Method::Quadrature,
            tail,
        ),
    ])
}

// ---------------------------------------------------------------------------
// Squared Hermite series identity for the boundary profile
// ---------------------------------------------------------------------------

/// Right hand side of the boundary profile identity: the squared Hermite
/// series e^{-4x^2}/pi * sum_{n>=1} H_{n-1}(sqrt2 x)^2 / (2^n n!), resummed
/// exactly. The terms fall off only like n^{-3/2}, so instead of truncating,
/// the 1/n factor is written as an integral over a generating variable and
/// the Mehler kernel collapses the sum, leaving a smooth one-dimensional
/// quadrature. Returns the value and an error estimate.
fn hermite_square_series(x: f64) -> (f64, f64) {
    let q = 4.0 * x * x;
    // sum_n H_{n-1}(t)^2/(2^n n!) = (1/2) int_0^1 (1-w^2)^{-1/2} e^{q w/(1+w)} dw
    // with t = sqrt2 x; substituting w = 1 - v^2 removes the endpoint
    // singularity and leaves an analytic integrand on [0, 1].
    let smooth = |v: f64| (q * (1.0 - v * v) / (2.0 - v * v)).exp() / (2.0 - v * v).sqrt();
    let fine = integrate_gl(smooth, 0.0, 1.0, 120);
    let coarse = integrate_gl(smooth, 0.0, 1.0, 80);
    let pref = (-q).exp() / PI;
    (pref * fine, pref * (fine - coarse).abs() + 1e-15)
}

/// Direct partial sum of the same series through `terms` terms, kept for
/// demonstrating convergence. The recurrence runs on Hermite polynomials
/// rescaled by sqrt(2^m m!), so the term of index n is G_{n-1}^2 / (2n) and
/// nothing overflows no matter how far the sum goes.
fn hermite_square_partial(x: f64, terms: usize) -> f64 {
    let t = SQRT_2 * x;
    let mut sum = 0.0;
    let mut gm_prev = 0.0f64;
    let mut gm = 1.0f64;
    for n in 1..=terms {
        sum += gm * gm / (2.0 * n as f64);
        let m = (n - 1) as f64;
        let next = t * (2.0 / (m + 1.0)).sqrt() * gm - (m / (m + 1.0)).sqrt() * gm_prev;
        gm_prev = gm;
        gm = next;
    }
    (-4.0 * x * x).exp() / PI * sum
}

/// Pointwise check of the closed identity between the boundary density
/// profile product and the squared Hermite series: for every real x,
/// (1 + erf(sqrt2 x))(1 - erf(sqrt2 x))/4 equals the series. Probes every
/// coordinate in `xs` (|x| <= 3) and reports the worst deviation.
pub fn sa3_identity_residual(xs: &[f64]) -> SumRuleResult<Residual> {
    if xs.is_empty() {
        return Err(bad("need at least one probe coordinate"));
    }
    if xs.iter().any(|x| !x.is_finite() || x.abs() > 3.0) {
        return Err(bad("probe coordinates must satisfy |x| <= 3"));
    }
    let mut worst = 0.0f64;
    let mut err: f64 = 0.0;
    for &x in xs {
        let e = erf(SQRT_2 * x);
        let lhs = 0.25 * (1.0 - e * e);
        let (rhs, re) = hermite_square_series(x);
        worst = worst.max((lhs - rhs).abs());
        err = err.max(re);
    }
    Ok(Residual::new(
        "hermite_series_identity",
        0.0,
        worst,
        Method::ClosedForm,
        err,
    ))
}

// ---------------------------------------------------------------------------
// Long wavelength expansion of the structure factor
// ---------------------------------------------------------------------------

/// First correction coefficient of the long wavelength law for the bulk
/// structure factor at beta = 2: expanding 2 pi beta S(k)/|k|^2 about k = 0
/// as 1 + c |k|^2 + ..., screening pins c at (beta/4 - 1)/(2 beta) = -1/8.
/// Extracted by Richardson differentiation of the closed structure factor.
pub fn structure_factor_expansion_residual() -> Residual {
    let d = |k: f64| {
        let s = crate::linstats::structure_factor([k, 0.0]);
        (2.0 * PI * 2.0 * s / (k * k) - 1.0) / (k * k)
    };
    let k0 = 0.2;
    let r1a = (4.0 * d(0.5 * k0) - d(k0)) / 3.0;
    let r1b = (4.0 * d(0.25 * k0) - d(0.5 * k0)) / 3.0;
    let extrapolated = (16.0 * r1b - r1a) / 15.0;
    Residual::new(
        "structure_factor_small_k",
        -0.125,
        extrapolated,
        Method::ClosedForm,
        (extrapolated - r1b).abs() + 1e-12,
    )
}

// ---------------------------------------------------------------------------
// Ward identity by Monte Carlo
// ---------------------------------------------------------------------------

/// A test function and its complex derivative for the stress identity.
pub struct WardStatistic {
    label: String,
    eval: Box<dyn Fn(Complex64) -> Complex64 + Send + Sync>,
    deriv: Box<dyn Fn(Complex64) -> Complex64 + Send + Sync>,
}

impl WardStatistic {
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        deriv: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        WardStatistic { label: label.into(), eval: Box::new(eval), deriv: Box::new(deriv) }
    }

    /// z^degree with its derivative.
    pub fn monomial(degree: u32) -> Self {
        WardStatistic::new(
            format!("z^{degree}"),
            move |z: Complex64| z.powu(degree),
            move |z: Complex64| {
                if degree == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    degree as f64 * z.powu(degree - 1)
                }
            },
        )
    }

    /// Constant test function; its pair and derivative terms vanish
    /// identically and the confinement term averages to zero by rotation
    /// invariance.
    pub fn constant(value: Complex64) -> Self {
        WardStatistic::new(
            format!("const {value}"),
            move |_| value,
            |_| Complex64::new(0.0, 0.0),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// The stress functional of one configuration of the Metropolis gas:
/// half the coupling times the symmetrised pair difference quotients, minus
/// the confinement force term, plus the derivative term. Its mean over the
/// stationary law vanishes for any smooth test function, which is what the
/// Monte Carlo residual checks. The radial potential gradient is taken by
/// central difference, exact for the quadratic default confinement.
pub fn ward_functional(chain: &CoulombChain, stat: &WardStatistic) -> Complex64 {
    let beta = chain.beta;
    let pts = &chain.positions;
    let values: Vec<Complex64> = pts.iter().map(|&z| (stat.eval)(z)).collect();

    let mut pair = Complex64::new(0.0, 0.0);
    for j in 0..pts.len() {
        for k in 0..j {
            let dz = pts[j] - pts[k];
            if dz.norm() < 1e-12 {
                pair += (stat.deriv)(pts[j]);
            } else {
                pair += (values[j] - values[k]) / dz;
            }
        }
    }

    let mut confine = Complex64::new(0.0, 0.0);
    for (&z, &v) in pts.iter().zip(&values) {
        let r = z.norm();
        if r < 1e-9 {
            continue;
        }
        let h = 1e-5 * (1.0 + r);
        let qp = (chain.potential_at(r + h) - chain.potential_at(r - h)) / (2.0 * h);
        confine += z.conj() * (qp / (2.0 * r)) * v;
    }

    let deriv: Complex64 = pts.iter().map(|&z| (stat.deriv)(z)).sum();
    0.5 * beta * pair - 0.5 * beta * confine + deriv
}

/// Monte Carlo residual of the stress identity: the chain is advanced `thin`
/// sweeps between measurements, `samples` measurements are averaged, and the
/// standard error comes from sixteen block means so that leftover sweep
/// correlation does not fake precision. The chain must already be burnt in.
pub fn ward_residual(
    chain: &mut CoulombChain,
    stat: &WardStatistic,
    samples: usize,
    thin: usize,
    rng: &mut impl Rng,
) -> SumRuleResult<Residual> {
    if samples < 32 {
        return Err(bad(format!("need at least 32 measurements, got {samples}")));
    }
    if thin == 0 {
        return Err(bad("thinning stride must be at least one sweep"));
    }
    if chain.sweeps_done() == 0 {
        return Err(SumRuleError::Unequilibrated);
    }
    let mut draws = Vec::with_capacity(samples);
    for _ in 0..samples {
        for _ in 0..thin {
            chain.sweep(rng);
        }
        draws.push(ward_functional(chain, stat));
    }
    let mean = draws.iter().sum::<Complex64>() / samples as f64;
    let sigma = block_sigma(&draws);
    Ok(Residual::new(
        format!("ward[{}]", stat.label()),
        0.0,
        mean.norm(),
        Method::MonteCarlo,
        sigma,
    ))
}

/// Standard error of the mean of correlated complex draws from sixteen
/// block means, combining both parts in quadrature.
fn block_sigma(draws: &[Complex64]) -> f64 {
    let blocks = 16.min(draws.len() / 2);
    let size = draws.len() / blocks;
    let mut re = Vec::with_capacity(blocks);
    let mut im = Vec::with_capacity(blocks);
    for chunk in draws.chunks(size).take(blocks) {
        let m = chunk.iter().sum::<Complex64>() / chunk.len() as f64;
        re.push(m.re);
        im.push(m.im);
    }
    let (_, se_re) = stats::mean_se(&re);
    let (_, se_im) = stats::mean_se(&im);
    se_re.hypot(se_im)
}

// ---------------------------------------------------------------------------
// Total squared modulus identity
// ---------------------------------------------------------------------------

/// Mean total squared modulus of the gas at coupling beta and size n:
/// 2n/beta + n(n-1)/2, the sum of the confinement and interaction virials.
pub fn second_moment_target(beta: f64, n: usize) -> SumRuleResult<f64> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(bad(format!("coupling must be positive, got {beta}")));
    }
    if n == 0 {
        return Err(bad("need at least one particle"));
    }
    Ok(2.0 * n as f64 / beta + 0.5 * (n * (n - 1)) as f64)
}

/// At beta = 2 the squared moduli are independent gamma variables of integer
/// shapes 1..n, so the identity closes without sampling: the means sum to
/// n(n+1)/2.
pub fn moment_identity_exact(n: usize) -> SumRuleResult<Residual> {
    let target = second_moment_target(2.0, n)?;
    let computed = (n * (n + 1)) as f64 / 2.0;
    Ok(Residual::new("second_moment_exact", target, computed, Method::ClosedForm, 0.0))
}

/// General coupling check of the same identity by Metropolis sampling of the
/// quadratically confined gas. Burn-in is run internally.
pub fn moment_identity_mc(
    beta: f64,
    n: usize,
    samples: usize,
    thin: usize,
    rng: &mut impl Rng,
) -> SumRuleResult<Residual> {
    let target = second_moment_target(beta, n)?;
    if samples < 32 {
        return Err(bad(format!("need at least 32 measurements, got {samples}")));
    }
    if thin == 0 {
        return Err(bad("thinning stride must be at least one sweep"));
    }
    let mut chain = crate::sampler::metropolis_coulomb(beta, n, |r| r * r, 400, rng);
    let mut draws = Vec::with_capacity(samples);
    for _ in 0..samples {
        for _ in 0..thin {
            chain.sweep(rng);
        }
        draws.push(Complex64::new(
            chain.positions.iter().map(|z| z.norm_sqr()).sum::<f64>(),
            0.0,
        ));
    }
    let mean = draws.iter().map(|d| d.re).sum::<f64>() / samples as f64;
    let sigma = block_sigma(&draws);
    Ok(Residual::new("second_moment_mc", target, mean, Method::MonteCarlo, sigma))
}

// ---------------------------------------------------------------------------
// Batch runner
// ---------------------------------------------------------------------------

/// Every deterministic residual at beta = 2, for the command line table and
/// the acceptance gate: screening moments, pair correlation moments, the two
/// order-sensitive double integrals, the boundary density rules, the squared
/// Hermite identity and the structure factor expansion.
pub fn quadrature_suite() -> SumRuleResult<Vec<Residual>> {
    let origin = Complex64::new(0.0, 0.0);
    let mut out = vec![
        screening_residual(0, &[origin])?,
        screening_residual(1, &[Complex64::new(0.6, 0.4)])?,
        screening_residual(0, &[origin, Complex64::new(1.0, 1.0)])?,
        stillinger_lovett_residual()?,
        higher_moment_residual(4)?,
        higher_moment_residual(6)?,
        carnie_chan_residual()?,
        edge_dipole_residual()?,
    ];
    out.extend(edge_density_sum_rules()?);
    out.push(mass_one_residual(&[-1.0, 0.0, 1.0])?);
    out.push(sa3_identity_residual(&[0.0, 0.5, 1.0])?);
    out.push(structure_factor_expansion_residual());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replica_rng;
    use crate::sampler::metropolis_coulomb;
    use crate::specfun::{expint_e1, hermite_phys};
    use proptest::prelude::*;

    #[test]
    fn pair_moment_targets_are_the_quoted_constants() {
        assert!((pair_moment_target(2, 2.0).unwrap() + 1.0 / PI).abs() < 1e-15);
        assert!((pair_moment_target(4, 2.0).unwrap() + 2.0 / PI).abs() < 1e-15);
        assert!((pair_moment_target(6, 2.0).unwrap() + 6.0 / PI).abs() < 1e-15);
        // The fourth moment changes sign through the beta = 4 pressure zero.
        assert_eq!(pair_moment_target(4, 4.0).unwrap(), 0.0);
        assert!(pair_moment_target(3, 2.0).is_err());
        assert!(pair_moment_target(2, -1.0).is_err());
    }

    #[test]
    fn screening_moments_vanish_for_conditioned_bulk_points() {
        let origin = Complex64::new(0.0, 0.0);
        let cases: [(u32, Vec<Complex64>); 4] = [
            (0, vec![origin]),
            (1, vec![origin]),
            (0, vec![origin, Complex64::new(1.0, 1.0)]),
            (2, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, -0.5), Complex64::new(0.4, 0.3)]),
        ];
        for (p, anchors) in cases {
            let r = screening_residual(p, &anchors).unwrap();
            assert!(r.residual < 1e-8, "{}: residual {}", r.name, r.residual);
            assert_eq!(r.target, 0.0);
        }
        assert!(screening_residual(0, &[]).is_err());
        assert!(screening_residual(9, &[origin]).is_err());
        assert!(screening_residual(0, &[Complex64::new(4.0, 0.0)]).is_err());
        // Coincident anchors kill the conditioned density.
        assert!(screening_residual(0, &[origin, origin]).is_err());
    }

    #[test]
    fn schur_split_matches_direct_determinants() {
        // The quadrature integrand comes from a Schur complement; rebuild the
        // same excess density from raw determinants at a few field points.
        let anchors = [Complex64::new(0.3, -0.2), Complex64::new(-0.8, 0.5)];
        let k = anchors.len();
        let mut gram = DMatrix::<Complex64>::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                gram[(i, j)] = bulk_kernel(anchors[i], anchors[j]).unwrap();
            }
        }
        let rho_k = gram.determinant().re;
        let inv = gram.clone().try_inverse().unwrap();
        for z in [Complex64::new(0.9, 0.1), Complex64::new(-0.4, -1.2)] {
            let mut full = DMatrix::<Complex64>::zeros(k + 1, k + 1);
            for i in 0..k {
                for j in 0..k {
                    full[(i, j)] = gram[(i, j)];
                }
                full[(i, k)] = bulk_kernel(anchors[i], z).unwrap();
                full[(k, i)] = bulk_kernel(z, anchors[i]).unwrap();
            }
            full[(k, k)] = bulk_kernel(z, z).unwrap();
            let direct = full.determinant().re - rho_k / PI;

            let u: Vec<Complex64> = anchors.iter().map(|&a| bulk_kernel(a, z).unwrap()).collect();
            let mut qform = 0.0;
            for i in 0..k {
                for j in 0..k {
                    qform += (u[i].conj() * inv[(i, j)] * u[j]).re;
                }
            }
            assert!((direct - (-rho_k * qform)).abs() < 1e-14, "split mismatch at {z}");
        }
    }

    #[test]
    fn pair_correlation_moments_match_quadrature() {
        let sl = stillinger_lovett_residual().unwrap();
        assert!((sl.target + 1.0 / PI).abs() < 1e-15);
        assert!(sl.residual < 1e-10, "second moment residual {}", sl.residual);

        let m4 = higher_moment_residual(4).unwrap();
        assert!(m4.residual < 1e-9, "fourth moment residual {}", m4.residual);
        let m6 = higher_moment_residual(6).unwrap();
        assert!(m6.residual < 1e-8, "sixth moment residual {}", m6.residual);
        assert!(higher_moment_residual(3).is_err());
    }

    #[test]
    fn screened_potential_matches_exponential_integral() {
        // Inner integral oracle: int_r^inf e^{-s^2}/s ds = E1(r^2)/2.
        for r in [0.3, 1.0, 2.0] {
            let (g, ge) = screened_potential(r);
            let oracle = -expint_e1(r * r).unwrap() / (2.0 * PI);
            assert!((g - oracle).abs() < 1e-11, "r={r}: {g} vs {oracle}");
            assert!(ge < 1e-11);
        }
    }

    #[test]
    fn carnie_chan_rule_integrates_to_one() {
        let r = carnie_chan_residual().unwrap();
        assert!(r.residual < 1e-8, "carnie_chan residual {}", r.residual);
        assert!(r.err_est.is_finite() && r.err_est > 0.0);
    }

    #[test]
    fn edge_pair_correlation_log_form_matches_kernel() {
        let pairs = [
            (Complex64::new(0.3, 0.2), Complex64::new(-1.1, 0.5)),
            (Complex64::new(0.0, -0.7), Complex64::new(2.0, 1.3)),
            (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
        ];
        for (z1, z2) in pairs {
            let k = kernel_limit(&LimitRegime::Edge, z1, z2).unwrap().value;
            let direct = -k.norm_sqr();
            let stable = edge_t2(z1, z2);
            assert!(
                (direct - stable).abs() < 1e-12 * (1.0 + direct.abs()),
                "mismatch at ({z1}, {z2}): {direct} vs {stable}"
            );
        }
        // Diagonal equals minus the squared density profile.
        let y = 0.4;
        let d = edge_t2(Complex64::new(0.0, y), Complex64::new(0.0, y));
        assert!((d + edge_density(y) * edge_density(y)).abs() < 1e-14);
    }

    #[test]
    fn log_erf_branches_agree_in_their_overlap() {
        // Both the direct evaluation and the asymptotic branch are valid for
        // arguments with im^2 - re^2 near 280; compare them explicitly.
        for (re, im) in [(1.0, 17.0), (3.0, 17.2), (-2.0, 16.9)] {
            let zeta = Complex64::new(re, im);
            let direct = (Complex64::new(1.0, 0.0) + erf_complex(zeta)).norm_sqr().ln();
            let asym = {
                let w = -zeta;
                let w2 = w * w;
                let mut term = Complex64::new(1.0, 0.0);
                let mut series = term;
                for m in 1..=8 {
                    term *= -(2.0 * m as f64 - 1.0) / (2.0 * w2);
                    series += term;
                }
                -2.0 * w2.re - 2.0 * w.norm().ln() - PI.ln() + series.norm_sqr().ln()
            };
            assert!(
                (direct - asym).abs() < 1e-9 * (1.0 + direct.abs()),
                "branch mismatch at {zeta}: {direct} vs {asym}"
            );
        }
    }

    #[test]
    fn edge_tail_is_inverse_square_with_the_closed_coefficient() {
        // Far along the boundary the pair correlation must follow the
        // Lorentzian asymptote used for the tail restoration.
        let (y, yp) = (0.3, -0.5);
        for xp in [40.0, 80.0] {
            let t2 = edge_t2(Complex64::new(0.0, y), Complex64::new(xp, yp));
            let asym = -(-2.0 * y * y - 2.0 * yp * yp).exp()
                / (2.0 * PI.powi(3) * ((y + yp).powi(2) + xp * xp));
            assert!(t2 < 0.0 && t2.is_finite());
            assert!(
                (t2 - asym).abs() < 0.01 * asym.abs(),
                "x'={xp}: {t2} vs {asym}"
            );
        }
    }

    #[test]
    fn mass_one_rows_cancel_the_conditioned_density() {
        let r = mass_one_residual(&[-1.0, 0.0, 1.0]).unwrap();
        assert!(r.residual < 1e-6, "mass one residual {}", r.residual);
        assert!(r.err_est < 1e-6, "error bound {}", r.err_est);
        assert!(mass_one_residual(&[]).is_err());
        assert!(mass_one_residual(&[2.5]).is_err());
    }

    #[test]
    fn edge_dipole_rule_integrates_to_one() {
        let r = edge_dipole_residual().unwrap();
        assert!(r.residual < 1e-10, "edge dipole residual {}", r.residual);

        // The closed inner integrand used above, validated by quadrature.
        let norm = (8.0 * PI.powi(3)).sqrt().recip();
        let (at_zero, err0) = edge_dipole_inner(0.0);
        assert!((at_zero + norm).abs() < 1e-6, "inner at 0: {at_zero} vs {}", -norm);
        assert!(err0 < 1e-6);
        let (at_y, _) = edge_dipole_inner(0.7);
        let closed = -norm * (-2.0 * 0.49f64).exp();
        assert!((at_y - closed).abs() < 1e-6, "inner at 0.7: {at_y} vs {closed}");
    }

    #[test]
    fn edge_density_rules_match() {
        let [mass, correction, dipole] = edge_density_sum_rules().unwrap();
        assert!(mass.residual < 1e-9, "excess mass {}", mass.residual);
        // Both the first moment and the integrated finite-size correction
        // evaluate to -1/(8 pi): by parts on y erfc(sqrt2 y) for the former,
        // Gaussian moments for the latter.
        let expected = -1.0 / (8.0 * PI);
        assert!((correction.computed - expected).abs() < 1e-9);
        assert!((correction.target - expected).abs() < 1e-9);
        assert!(correction.residual < 1e-9);
        assert_eq!(dipole.target, expected);
        assert!(dipole.residual < 1e-9);
    }

    #[test]
    fn hermite_series_identity_holds_pointwise() {
        let r = sa3_identity_residual(&[0.0, 0.5, 1.0]).unwrap();
        assert!(r.residual < 1e-10, "identity residual {}", r.residual);

        // At the origin the left side is exactly 1/4.
        let (rhs0, _) = hermite_square_series(0.0);
        assert!((rhs0 - 0.25).abs() < 1e-12, "series at 0: {rhs0}");

        // Far out both sides vanish together.
        let e3 = erf(SQRT_2 * 3.0);
        assert!(0.25 * (1.0 - e3 * e3) < 1e-8);
        let r3 = sa3_identity_residual(&[3.0]).unwrap();
        assert!(r3.residual < 1e-10);

        assert!(sa3_identity_residual(&[3.5]).is_err());
        assert!(sa3_identity_residual(&[]).is_err());
    }

    #[test]
    fn hermite_partial_sums_converge_to_the_resummed_value() {
        // The raw series decays like n^{-3/2}; its partial sums must close in
        // on the resummed value at the matching n^{-1/2} rate.
        for x in [0.0, 0.8] {
            let (full, _) = hermite_square_series(x);
            let p4 = hermite_square_partial(x, 4_000);
            let p16 = hermite_square_partial(x, 16_000);
            let e4 = (p4 - full).abs();
            let e16 = (p16 - full).abs();
            assert!(e4 < 0.02 && e16 < e4, "x={x}: errors {e4} then {e16}");
            let rate = e4 / e16;
            assert!((1.6..=2.4).contains(&rate), "x={x}: decay rate {rate}");
        }
    }

    #[test]
    fn rescaled_recurrence_matches_hermite_polynomials() {
        // G_m = H_m / sqrt(2^m m!) drives the partial sums; pin it to the
        // library Hermite values at a few degrees.
        let t = 1.3;
        let mut gm_prev = 0.0f64;
        let mut gm = 1.0f64;
        let mut scale = 1.0f64; // sqrt(2^m m!)
        for m in 0..=6u32 {
            let h = hermite_phys(m, Complex64::new(t, 0.0)).re;
            assert!(
                (gm * scale - h).abs() < 1e-10 * (1.0 + h.abs()),
                "degree {m}: {} vs {h}",
                gm * scale
            );
            let mf = m as f64;
            let next = t * (2.0 / (mf + 1.0)).sqrt() * gm - (mf / (mf + 1.0)).sqrt() * gm_prev;
            gm_prev = gm;
            gm = next;
            scale *= (2.0 * (mf + 1.0)).sqrt();
        }
    }

    #[test]
    fn structure_factor_expansion_coefficient_is_minus_eighth() {
        let r = structure_factor_expansion_residual();
        assert!(r.residual < 1e-6, "small k coefficient residual {}", r.residual);
        assert_eq!(r.target, -0.125);
    }

    #[test]
    fn ward_identity_holds_for_monomials() {
        let mut rng = replica_rng(41, 0, 0);
        let mut chain = metropolis_coulomb(2.0, 20, |r| r * r, 300, &mut rng);
        let z1 = WardStatistic::monomial(1);
        let r1 = ward_residual(&mut chain, &z1, 640, 2, &mut rng).unwrap();
        assert!(r1.err_est > 0.0);
        assert!(
            r1.residual <= 3.0 * r1.err_est,
            "ward z residual {} vs 3 sigma {}",
            r1.residual,
            3.0 * r1.err_est
        );

        let mut rng4 = replica_rng(41, 1, 0);
        let mut quartic = metropolis_coulomb(4.0, 12, |r| r * r, 300, &mut rng4);
        let z2 = WardStatistic::monomial(2);
        let r2 = ward_residual(&mut quartic, &z2, 640, 2, &mut rng4).unwrap();
        assert!(
            r2.residual <= 3.0 * r2.err_est,
            "ward z^2 residual {} vs 3 sigma {}",
            r2.residual,
            3.0 * r2.err_est
        );
    }

    #[test]
    fn ward_functional_vanishes_for_the_zero_function() {
        let mut rng = replica_rng(42, 0, 0);
        let mut chain = metropolis_coulomb(2.0, 10, |r| r * r, 50, &mut rng);
        let zero = WardStatistic::constant(Complex64::new(0.0, 0.0));
        let r = ward_residual(&mut chain, &zero, 64, 1, &mut rng).unwrap();
        assert_eq!(r.computed, 0.0);
        assert_eq!(r.err_est, 0.0);

        // Nonzero constants keep only the confinement term, which averages
        // out by rotation invariance.
        let c = WardStatistic::constant(Complex64::new(2.0, 0.0));
        let rc = ward_residual(&mut chain, &c, 640, 1, &mut rng).unwrap();
        assert!(rc.residual <= 3.0 * rc.err_est, "{} vs {}", rc.residual, rc.err_est);
    }

    #[test]
    fn ward_residual_rejects_fresh_chains() {
        let mut rng = replica_rng(43, 0, 0);
        let mut chain = CoulombChain::new(2.0, 8, |r| r * r, &mut rng);
        let stat = WardStatistic::monomial(1);
        assert!(matches!(
            ward_residual(&mut chain, &stat, 64, 1, &mut rng),
            Err(SumRuleError::Unequilibrated)
        ));
        chain.sweep(&mut rng);
        assert!(ward_residual(&mut chain, &stat, 64, 1, &mut rng).is_ok());
        assert!(ward_residual(&mut chain, &stat, 8, 1, &mut rng).is_err());
        assert!(ward_residual(&mut chain, &stat, 64, 0, &mut rng).is_err());
    }

    #[test]
    fn moment_identity_closes_exactly_at_beta_two() {
        let r3 = moment_identity_exact(3).unwrap();
        assert_eq!(r3.target, 6.0);
        assert_eq!(r3.computed, 6.0);
        assert_eq!(r3.residual, 0.0);

        assert_eq!(second_moment_target(4.0, 2).unwrap(), 2.0);
        assert!(second_moment_target(-2.0, 3).is_err());
        assert!(second_moment_target(2.0, 0).is_err());
    }

    #[test]
    fn moment_identity_matches_by_monte_carlo() {
        let mut rng = replica_rng(44, 0, 0);
        let r = moment_identity_mc(4.0, 2, 3000, 2, &mut rng).unwrap();
        assert_eq!(r.target, 2.0);
        assert!(r.residual <= 3.0 * r.err_est, "{} vs sigma {}", r.residual, r.err_est);

        let mut rng2 = replica_rng(44, 1, 0);
        let r2 = moment_identity_mc(2.0, 3, 3000, 2, &mut rng2).unwrap();
        assert_eq!(r2.target, 6.0);
        assert!(r2.residual <= 3.0 * r2.err_est, "{} vs sigma {}", r2.residual, r2.err_est);
    }

    #[test]
    fn quadrature_suite_meets_the_tolerance() {
        let rows = quadrature_suite().unwrap();
        assert!(rows.len() >= 13);
        let mut names = std::collections::HashSet::new();
        for r in &rows {
            assert!(names.insert(r.name.clone()), "duplicate name {}", r.name);
            assert!(r.method != Method::MonteCarlo);
            assert!(
                r.residual < 1e-6,
                "{}: residual {} above tolerance",
                r.name,
                r.residual
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn screening_quadrature_stays_below_tolerance(
            p in 0u32..=2,
            ax in -1.2f64..1.2,
            ay in -1.2f64..1.2,
            bx in -1.2f64..1.2,
            by in -1.2f64..1.2,
            pair in proptest::bool::ANY,
        ) {
            let mut anchors = vec![Complex64::new(ax, ay)];
            if pair {
                anchors.push(Complex64::new(bx, by));
            }
            match screening_residual(p, &anchors) {
                Ok(r) => prop_assert!(r.residual < 1e-6, "{}: {}", r.name, r.residual),
                // Nearly coincident anchors are legitimately rejected.
                Err(SumRuleError::BadArguments(_)) => {}
                Err(e) => return Err(TestCaseError::fail(format!("unexpected error {e}"))),
            }
        }
    }
}
