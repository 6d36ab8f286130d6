//! Fluctuations of linear eigenvalue statistics in the global chart.
//!
//! A smooth test function evaluated across the spectrum has order-one
//! fluctuations: the limiting covariance is a Dirichlet form over the unit
//! disk plus a boundary Fourier series, without any central-limit 1/sqrt(N)
//! normalisation. This module evaluates that covariance functional, the bulk
//! structure factor, the log-potential variance, and the exact characteristic
//! function of the squared-radius statistic, and backs them with a Monte
//! Carlo harness for distributional checks. Thinned variants (independent
//! deletion of eigenvalues, with an optional density-restoring rescale)
//! switch the variance from order one to order N and are supported at the
//! sample level.
//!
//! Test functions are evaluated on the closed global disk and a little
//! beyond; callers should keep evaluation meaningful out to radius 1.5,
//! which covers every sample an ensemble in the global chart can produce
//! at the sizes used here.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::rng::replica_rng;
use crate::sampler::{
    kostlan_radial_sample, sample_spectrum, EnsembleError, EnsembleSpec, RadialWeight, Scaling,
};
use crate::specfun::{expint_e1, SpecFunError, EULER_GAMMA};
use crate::stats::{ks_test, normal_cdf};

/// Number of boundary samples for the Fourier coefficients.
const BOUNDARY_POINTS: usize = 1 << 12;

/// Coefficients smaller than this no longer enter the boundary sum.
const COEFF_CUTOFF: f64 = 1e-12;

/// Step for the central-difference gradient fallback.
const GRAD_STEP: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum LinStatsError {
    #[error("bad arguments: {0}")]
    BadArguments(String),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}

pub type LinStatsResult<T> = Result<T, LinStatsError>;

type EvalFn = dyn Fn(Complex64) -> Complex64 + Send + Sync;
type GradFn = dyn Fn(Complex64) -> (Complex64, Complex64) + Send + Sync;

/// Test function on the plane: an evaluation callback, an optional gradient
/// callback (central differences otherwise), and lazily computed Fourier
/// coefficients of the restriction to the unit circle.
///
/// Smoothness is declared by the constructor, not detected: a sharp
/// indicator restricted to the unit circle looks constant, so no boundary
/// diagnostic can see the jump. Routines that assume smoothness refuse
/// functions declared non smooth.
pub struct TestFunction {
    label: String,
    smooth: bool,
    radial: bool,
    eval: Box<EvalFn>,
    grad: Option<Box<GradFn>>,
    boundary: OnceLock<Vec<Complex64>>,
}

impl TestFunction {
    /// Smooth test function from an evaluation callback.
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        TestFunction {
            label: label.into(),
            smooth: true,
            radial: false,
            eval: Box::new(eval),
            grad: None,
            boundary: OnceLock::new(),
        }
    }

    /// Smooth rotation invariant test function from a radial profile.
    /// Radial statistics of the rotation invariant ensembles can be sampled
    /// through the independent-moduli decomposition, which the Monte Carlo
    /// harness exploits.
    pub fn radial(
        label: impl Into<String>,
        profile: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    ) -> Self {
        let p = profile.clone();
        let grad = move |z: Complex64| {
            let r = z.norm();
            if r < GRAD_STEP {
                return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            }
            let d = (p(r + GRAD_STEP) - p(r - GRAD_STEP)) / (2.0 * GRAD_STEP);
            (
                Complex64::new(d * z.re / r, 0.0),
                Complex64::new(d * z.im / r, 0.0),
            )
        };
        TestFunction {
            label: label.into(),
            smooth: true,
            radial: true,
            eval: Box::new(move |z| Complex64::new(profile(z.norm()), 0.0)),
            grad: Some(Box::new(grad)),
            boundary: OnceLock::new(),
        }
    }

    /// Declares a non smooth function (for example a disk indicator).
    /// Such statistics belong to the counting machinery; the smooth-theory
    /// routines reject them.
    pub fn non_smooth(
        label: impl Into<String>,
        eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        TestFunction {
            smooth: false,
            ..TestFunction::new(label, eval)
        }
    }

    /// Attaches an analytic gradient callback (df/dx, df/dy).
    pub fn with_gradient(
        mut self,
        grad: impl Fn(Complex64) -> (Complex64, Complex64) + Send + Sync + 'static,
    ) -> Self {
        self.grad = Some(Box::new(grad));
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    pub fn is_radial(&self) -> bool {
        self.radial
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    /// Gradient at `z`: the attached callback, else central differences.
    pub fn gradient(&self, z: Complex64) -> (Complex64, Complex64) {
        if let Some(g) = &self.grad {
            return g(z);
        }
        let h = GRAD_STEP;
        let fx = ((self.eval)(z + h) - (self.eval)(z - h)) / (2.0 * h);
        let dy = Complex64::new(0.0, h);
        let fy = ((self.eval)(z + dy) - (self.eval)(z - dy)) / (2.0 * h);
        (fx, fy)
    }

    /// Fourier coefficients of the unit-circle restriction, index `n`
    /// running over `-BOUNDARY_POINTS/2 < n <= BOUNDARY_POINTS/2` in FFT
    /// storage order (negative indices wrap around).
    pub fn boundary_coefficients(&self) -> &[Complex64] {
        self.boundary.get_or_init(|| {
            let m = BOUNDARY_POINTS;
            let mut buf: Vec<Complex64> = (0..m)
                .map(|k| {
                    let theta = 2.0 * PI * k as f64 / m as f64;
                    (self.eval)(Complex64::new(theta.cos(), theta.sin()))
                })
                .collect();
            FftPlanner::new().plan_fft_forward(m).process(&mut buf);
            let scale = 1.0 / m as f64;
            for c in &mut buf {
                *c *= scale;
            }
            buf
        })
    }

    /// Coefficient `f_n`, negative indices included.
    pub fn boundary_coefficient(&self, n: i64) -> Complex64 {
        let m = BOUNDARY_POINTS as i64;
        let idx = n.rem_euclid(m) as usize;
        self.boundary_coefficients()[idx]
    }
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("smooth", &self.smooth)
            .field("radial", &self.radial)
            .finish()
    }
}

/// Bulk structure factor of the infinite Gaussian ensemble,
/// `S(k) = (1 - e^{-|k|^2/4})/pi`.
pub fn structure_factor(k: [f64; 2]) -> f64 {
    let k2 = k[0] * k[0] + k[1] * k[1];
    (1.0 - (-k2 / 4.0).exp()) / PI
}

/// Structure factor after independent deletion (retention probability
/// `zeta`) followed by the density-restoring rescale, so the intensity
/// stays 1/pi: `S(k) = (1 - zeta e^{-zeta |k|^2/4})/pi`. No longer
/// vanishing at k = 0: thinning destroys hyperuniformity.
pub fn structure_factor_thinned(k: [f64; 2], zeta: f64) -> LinStatsResult<f64> {
    if !(0.0..=1.0).contains(&zeta) || zeta == 0.0 {
        return Err(LinStatsError::BadArguments(format!(
            "retention probability must lie in (0, 1], got {zeta}"
        )));
    }
    let k2 = k[0] * k[0] + k[1] * k[1];
    Ok((1.0 - zeta * (-zeta * k2 / 4.0).exp()) / PI)
}

/// Covariance functional value with its quadrature and truncation
/// diagnostics. The value is complex in general; for real test functions
/// the imaginary part is numerical noise.
#[derive(Debug, Clone, Copy)]
pub struct CovEstimate {
    pub value: Complex64,
    /// Quadrature refinement error plus the discarded boundary tail.
    pub err_est: f64,
    /// Mass of the boundary series beyond the truncation point.
    pub boundary_tail: f64,
    /// False when the top of the coefficient spectrum has not decayed;
    /// the value is then untrustworthy and `err_est` reflects that.
    pub coefficients_decay: bool,
}

/// Limiting covariance of the global-chart statistics `sum f(z_j)` and
/// `conj(sum g(z_j))`: a Dirichlet form over the unit disk plus a boundary
/// Fourier series,
/// `(1/4pi) int grad f . grad conj(g) + (1/2) sum |n| f_n conj(g_n)`.
pub fn cov_smooth(f: &TestFunction, g: &TestFunction) -> LinStatsResult<CovEstimate> {
    for t in [f, g] {
        if !t.is_smooth() {
            return Err(LinStatsError::BadArguments(format!(
                "'{}' is declared non smooth; counting statistics have their own Bernoulli machinery",
                t.label()
            )));
        }
    }
    let bulk_full = bulk_dirichlet(f, g, 128, 256);
    let bulk_half = bulk_dirichlet(f, g, 64, 128);

    let fc = f.boundary_coefficients();
    let gc = g.boundary_coefficients();
    let half = (BOUNDARY_POINTS / 2) as i64;
    let coeff = |c: &[Complex64], n: i64| c[n.rem_euclid(BOUNDARY_POINTS as i64) as usize];
    let mut cut = 0i64;
    for n in 1..half {
        let mag = coeff(fc, n)
            .norm()
            .max(coeff(fc, -n).norm())
            .max(coeff(gc, n).norm())
            .max(coeff(gc, -n).norm());
        if mag >= COEFF_CUTOFF {
            cut = n;
        }
    }
    let mut boundary = Complex64::new(0.0, 0.0);
    for n in 1..=cut {
        let w = n as f64;
        boundary += w * coeff(fc, n) * coeff(gc, n).conj();
        boundary += w * coeff(fc, -n) * coeff(gc, -n).conj();
    }
    boundary *= 0.5;
    let mut tail = 0.0;
    for n in (cut + 1)..half {
        let w = 0.5 * n as f64;
        tail += w * coeff(fc, n).norm() * coeff(gc, n).norm();
        tail += w * coeff(fc, -n).norm() * coeff(gc, -n).norm();
    }
    let top_start = half - half / 4;
    let top = (top_start..half)
        .map(|n| {
            coeff(fc, n)
                .norm()
                .max(coeff(fc, -n).norm())
                .max(coeff(gc, n).norm())
                .max(coeff(gc, -n).norm())
        })
        .fold(0.0f64, f64::max);
    let decayed = top < 1e-9;
    let err_est = (bulk_full - bulk_half).norm()
        + tail
        + if decayed {
            0.0
        } else {
            // Aliasing of an undecayed spectrum: charge the whole top band.
            top * (half as f64).powi(2)
        };
    Ok(CovEstimate {
        value: bulk_full + boundary,
        err_est,
        boundary_tail: tail,
        coefficients_decay: decayed,
    })
}

/// `(1/4pi) int_{|r|<1} grad f . grad conj(g)` by polar Gauss-Legendre
/// (radial) times the trapezoidal rule (angular, spectrally accurate for
/// periodic integrands).
fn bulk_dirichlet(f: &TestFunction, g: &TestFunction, n_r: usize, n_t: usize) -> Complex64 {
    let (nodes, weights) = crate::quad::gauss_legendre(n_r);
    let dt = 2.0 * PI / n_t as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(&weights) {
        let r = 0.5 * (x + 1.0);
        let wr = 0.5 * w * r * dt;
        for j in 0..n_t {
            let theta = dt * j as f64;
            let z = Complex64::from_polar(r, theta);
            let (fx, fy) = f.gradient(z);
            let (gx, gy) = g.gradient(z);
            acc += wr * (fx * gx.conj() + fy * gy.conj());
        }
    }
    acc / (4.0 * PI)
}

/// Variance of the bulk potential-difference statistic
/// `-sum_j (log|x - r_j| - log|r_j|)` for the infinite ensemble:
/// `(2 log|x| + (|x|^2+1) E_1(|x|^2) - e^{-|x|^2} + C + 1)/2`
/// with `C` Euler's constant. Grows like `log|x|`: the potential is
/// log-correlated.
pub fn var_log_potential(x: Complex64) -> LinStatsResult<f64> {
    let s = x.norm_sqr();
    if !(s.is_finite() && s > 0.0) {
        return Err(LinStatsError::BadArguments(format!(
            "log-potential variance needs x != 0, got {x}"
        )));
    }
    let e1 = if s > 700.0 { 0.0 } else { expint_e1(s)? };
    Ok(0.5 * (s.ln() + (s + 1.0) * e1 - (-s).exp() + EULER_GAMMA + 1.0))
}

/// Characteristic function of `sum_j |z_j|^2 / N` for the finite Gaussian
/// ensemble: `(1 - ik/N)^{-N(N+1)/2}`, an immediate consequence of the
/// independent-moduli decomposition (a sum of Gamma variables).
pub fn charfn_sum_mod2(k: f64, n: usize) -> Complex64 {
    let nf = n as f64;
    let base = Complex64::new(1.0, -k / nf);
    let expo = -0.5 * nf * (nf + 1.0);
    (base.ln() * expo).exp()
}

/// Monte Carlo summary of a linear statistic over independent replicas.
#[derive(Debug, Clone, Copy)]
pub struct CltReport {
    pub mean: Complex64,
    /// Unbiased sample variance; for complex statistics the total
    /// `E|s - mean|^2`.
    pub variance: f64,
    /// Kolmogorov-Smirnov distance of the standardised statistic to the
    /// standard normal (the larger of the two parts when complex).
    pub ks_distance: f64,
    pub replicas: usize,
}

const STREAM_CLT: u64 = 21;
const STREAM_COV: u64 = 22;

/// Samples `sum_j f(z_j)` over independent replicas and summarises the
/// fluctuation law. Radial test functions on the rotation invariant kinds
/// are sampled through the independent moduli, anything else through the
/// full spectrum. `spec.scaling` chooses the chart the samples arrive in;
/// the limit formulas above correspond to the global chart.
pub fn clt_harness(
    spec: &EnsembleSpec,
    f: &TestFunction,
    replicas: usize,
    seed: u64,
) -> LinStatsResult<CltReport> {
    let samples = harness_samples(spec, f, replicas, seed, None)?;
    Ok(summarise(&samples))
}

/// Thinned variant: each eigenvalue is kept independently with probability
/// `zeta` before evaluation; with `rescale` the kept points shrink by
/// sqrt(zeta), restoring the bulk density. The variance of a smooth
/// statistic is then order N rather than order one.
pub fn clt_harness_thinned(
    spec: &EnsembleSpec,
    f: &TestFunction,
    zeta: f64,
    rescale: bool,
    replicas: usize,
    seed: u64,
) -> LinStatsResult<CltReport> {
    if !(zeta > 0.0 && zeta <= 1.0) {
        return Err(LinStatsError::BadArguments(format!(
            "retention probability must lie in (0, 1], got {zeta}"
        )));
    }
    let samples = harness_samples(spec, f, replicas, seed, Some((zeta, rescale)))?;
    Ok(summarise(&samples))
}

fn harness_samples(
    spec: &EnsembleSpec,
    f: &TestFunction,
    replicas: usize,
    seed: u64,
    thin: Option<(f64, bool)>,
) -> LinStatsResult<Vec<Complex64>> {
    if replicas < 100 {
        return Err(LinStatsError::BadArguments(format!(
            "at least 100 replicas needed for a distributional summary, got {replicas}"
        )));
    }
    if !f.is_smooth() {
        return Err(LinStatsError::BadArguments(format!(
            "'{}' is declared non smooth; use the counting machinery for indicator statistics",
            f.label()
        )));
    }
    let radial_weight = if f.is_radial() {
        RadialWeight::for_spec(spec).ok()
    } else {
        None
    };
    let divisor = match spec.scaling {
        Scaling::Raw => Some(1.0),
        Scaling::Global => Some(spec.global_divisor()),
        _ => None,
    };
    (0..replicas as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replica_rng(seed, rep, STREAM_CLT);
            let mut stat = Complex64::new(0.0, 0.0);
            match (radial_weight, divisor) {
                (Some(weight), Some(div)) => {
                    let moduli = kostlan_radial_sample(weight, spec.n, &mut rng)?;
                    for s in moduli {
                        if let Some((zeta, rescale)) = thin {
                            if rng.random::<f64>() >= zeta {
                                continue;
                            }
                            let scale = if rescale { zeta } else { 1.0 };
                            stat += f.eval(Complex64::new((scale * s).sqrt() / div, 0.0));
                        } else {
                            stat += f.eval(Complex64::new(s.sqrt() / div, 0.0));
                        }
                    }
                }
                _ => {
                    let spectrum = sample_spectrum(spec, seed, &mut rng)?;
                    for z in spectrum.eigenvalues {
                        if let Some((zeta, rescale)) = thin {
                            if rng.random::<f64>() >= zeta {
                                continue;
                            }
                            let w = if rescale { z * zeta.sqrt() } else { z };
                            stat += f.eval(w);
                        } else {
                            stat += f.eval(z);
                        }
                    }
                }
            }
            Ok(stat)
        })
        .collect()
}

fn summarise(samples: &[Complex64]) -> CltReport {
    let n = samples.len();
    let mean = samples.iter().sum::<Complex64>() / n as f64;
    let scale = samples.iter().map(|s| s.norm()).fold(0.0f64, f64::max);
    let is_real = samples
        .iter()
        .all(|s| s.im.abs() <= 1e-9 * (1.0 + scale));
    let var = samples
        .iter()
        .map(|s| (s - mean).norm_sqr())
        .sum::<f64>()
        / (n - 1) as f64;
    let ks_of = |part: fn(&Complex64) -> f64| {
        let centred: Vec<f64> = samples.iter().map(|s| part(s) - part(&mean)).collect();
        let sd = (centred.iter().map(|d| d * d).sum::<f64>() / (n - 1) as f64).sqrt();
        if sd == 0.0 {
            return 1.0;
        }
        let mut std: Vec<f64> = centred.iter().map(|d| d / sd).collect();
        ks_test(&mut std, normal_cdf).0
    };
    let ks = if is_real {
        ks_of(|s| s.re)
    } else {
        ks_of(|s| s.re).max(ks_of(|s| s.im))
    };
    CltReport {
        mean,
        variance: var,
        ks_distance: ks,
        replicas: n,
    }
}

/// Real-valued statistics of a family of test functions over shared
/// spectrum replicas. Returned layout: one row per function, one column per
/// replica. Sharing the samples lets several covariances be estimated from
/// a single (expensive) sampling pass.
pub fn mc_linear_statistics(
    spec: &EnsembleSpec,
    funcs: &[&TestFunction],
    replicas: usize,
    seed: u64,
) -> LinStatsResult<Vec<Vec<f64>>> {
    if replicas < 100 {
        return Err(LinStatsError::BadArguments(format!(
            "at least 100 replicas needed for a covariance estimate, got {replicas}"
        )));
    }
    let columns: Vec<Vec<f64>> = (0..replicas as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replica_rng(seed, rep, STREAM_COV);
            let spectrum = sample_spectrum(spec, seed, &mut rng)?;
            let mut stats = vec![Complex64::new(0.0, 0.0); funcs.len()];
            for z in spectrum.eigenvalues {
                for (stat, f) in stats.iter_mut().zip(funcs) {
                    *stat += f.eval(z);
                }
            }
            stats
                .iter()
                .zip(funcs)
                .map(|(s, f)| {
                    if s.im.abs() > 1e-9 * (1.0 + s.re.abs()) {
                        Err(LinStatsError::BadArguments(format!(
                            "'{}' is not real-valued on the samples",
                            f.label()
                        )))
                    } else {
                        Ok(s.re)
                    }
                })
                .collect::<LinStatsResult<Vec<f64>>>()
        })
        .collect::<LinStatsResult<_>>()?;
    let mut rows = vec![Vec::with_capacity(replicas); funcs.len()];
    for col in columns {
        for (row, v) in rows.iter_mut().zip(col) {
            row.push(v);
        }
    }
    Ok(rows)
}

/// Sample covariance of two statistic series with a jackknife standard
/// error.
pub fn covariance_with_jackknife(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert_eq!(a.len(), b.len());
    let nf = a.len() as f64;
    let sa: f64 = a.iter().sum();
    let sb: f64 = b.iter().sum();
    let sab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    crate::stats::jackknife(a.len(), |omit| match omit {
        None => (sab - sa * sb / nf) / (nf - 1.0),
        Some(i) => {
            let m = nf - 1.0;
            ((sab - a[i] * b[i]) - (sa - a[i]) * (sb - b[i]) / m) / (m - 1.0)
        }
    })
}

/// Monte Carlo covariance of two real-valued statistics on shared samples,
/// with a jackknife standard error. Used to cross-check `cov_smooth`.
pub fn mc_covariance(
    spec: &EnsembleSpec,
    f: &TestFunction,
    g: &TestFunction,
    replicas: usize,
    seed: u64,
) -> LinStatsResult<(f64, f64)> {
    let rows = mc_linear_statistics(spec, &[f, g], replicas, seed)?;
    Ok(covariance_with_jackknife(&rows[0], &rows[1]))
}
