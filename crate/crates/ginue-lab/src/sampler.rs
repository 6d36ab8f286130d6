//! Random matrix sampling for the GinUE family.
//!
//! Every ensemble in scope is realised as an explicit matrix model: elliptic
//! interpolation between GUE pairs, induced spectra via `(G^†G)^{1/2}U`,
//! spherical quotients `G_1^{-1}G_2`, truncations of Haar unitaries, and
//! products of such factors. Spectra come from the dense eigensolver in
//! [`crate::linalg`]. Two shortcuts avoid the eigensolver when only radial or
//! overlap data is needed: the independent-moduli decomposition of rotation
//! invariant ensembles (squared moduli are independent draws from tilted
//! radial weights), and the Schur-form representation of the diagonal
//! eigenvector overlap as a product over independent Gaussians. A Metropolis
//! chain extends sampling to general inverse temperature `beta`.

use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution, Gamma as GammaDist, StandardNormal};
use thiserror::Error;

use crate::linalg::{self, CMatrix};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Ensemble selector together with its kind-specific parameters.
///
/// Size parameters count extra rows: `InducedGinUE { n }` draws an `n x N`
/// Gaussian block, `TruncatedUnitary { n }` keeps the top `N x N` corner of an
/// `(n+N) x (n+N)` Haar unitary, and the product kinds carry one such
/// parameter per factor.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleKind {
    GinUE,
    /// Gaussian entries with correlation `tau` between a matrix and its
    /// adjoint; `tau = 0` is the GinUE, `tau -> 1` the GUE.
    EllipticGinUE { tau: f64 },
    /// Square top factor of an `n x N` Gaussian, `n >= N`.
    InducedGinUE { n: usize },
    /// Quotient of two independent square Gaussians.
    Spherical,
    /// Whitened rectangular Gaussian recombined with a Haar unitary:
    /// `a` is `n x N`, `X` is `N x m`, and the sample is
    /// `U ((a^†a)^{-1/2} X X^† (a^†a)^{-1/2})^{1/2}`-shaped, `n, m >= N`.
    InducedSpherical { n: usize, m: usize },
    /// Top corner of an `(n+N)`-dimensional Haar unitary, `n >= 1`.
    TruncatedUnitary { n: usize },
    /// Product of square factors; factor `i` has the induced law with
    /// `nu[i]` extra rows (all zeros gives a product of plain GinUE draws).
    ProductGinUE { nu: Vec<usize> },
    /// Product of truncated unitaries, factor `i` cut from an
    /// `(n[i]+N)`-dimensional Haar unitary.
    ProductTruncated { n: Vec<usize> },
}

impl EnsembleKind {
    /// Number of matrix factors (1 except for product kinds).
    pub fn factors(&self) -> usize {
        match self {
            EnsembleKind::ProductGinUE { nu } => nu.len(),
            EnsembleKind::ProductTruncated { n } => n.len(),
            _ => 1,
        }
    }

    fn label(&self) -> String {
        match self {
            EnsembleKind::GinUE => "ginue".to_string(),
            EnsembleKind::EllipticGinUE { tau } => format!("elliptic(tau={tau})"),
            EnsembleKind::InducedGinUE { n } => format!("induced(n={n})"),
            EnsembleKind::Spherical => "spherical".to_string(),
            EnsembleKind::InducedSpherical { n, m } => format!("induced-spherical(n={n},m={m})"),
            EnsembleKind::TruncatedUnitary { n } => format!("truncated(n={n})"),
            EnsembleKind::ProductGinUE { nu } => format!("product-ginue(nu={nu:?})"),
            EnsembleKind::ProductTruncated { n } => format!("product-truncated(n={n:?})"),
        }
    }
}

/// Coordinate convention applied to sampled eigenvalues.
///
/// `Raw` keeps eigensolver output; for Gaussian-weight kinds these fill a
/// disk of radius about `sqrt(N)` at unit mean spacing, which is also the
/// chart in which bulk-scaled statistics are read, so `Bulk` is an alias for
/// `Raw`. `Global` divides by `sqrt(N)` (by `N^{M/2}` for Ginibre products;
/// spherical and truncated kinds are already order-one and are left alone).
/// `Edge` maps `r e^{i theta}` to `(r - R) + i R theta` with `R` the edge
/// radius, the chart of the boundary kernel; it is defined for the kinds with
/// a Gaussian radial edge (GinUE and induced GinUE).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    Raw,
    Global,
    Bulk,
    Edge,
}

/// Validated ensemble description: kind, matrix size, coordinate convention.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    pub scaling: Scaling,
}

/// Sampling failures: invalid parameters or numerical breakdown downstream.
#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("invalid ensemble parameter: {0}")]
    BadParameter(String),
    #[error("operation not defined for this ensemble: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl From<linalg::LinalgError> for EnsembleError {
    fn from(e: linalg::LinalgError) -> Self {
        EnsembleError::Numeric(e.to_string())
    }
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, n: usize, scaling: Scaling) -> Result<Self, EnsembleError> {
        if n == 0 {
            return Err(EnsembleError::BadParameter("N must be positive".into()));
        }
        match &kind {
            EnsembleKind::EllipticGinUE { tau } => {
                if !(0.0..1.0).contains(tau) {
                    return Err(EnsembleError::BadParameter(format!(
                        "elliptic tau={tau} outside [0,1)"
                    )));
                }
            }
            EnsembleKind::InducedGinUE { n: rows } => {
                if *rows < n {
                    return Err(EnsembleError::BadParameter(format!(
                        "induced needs n >= N, got n={rows}, N={n}"
                    )));
                }
            }
            EnsembleKind::InducedSpherical { n: rows, m } => {
                if *rows < n || *m < n {
                    return Err(EnsembleError::BadParameter(format!(
                        "induced spherical needs n, m >= N, got n={rows}, m={m}, N={n}"
                    )));
                }
            }
            EnsembleKind::TruncatedUnitary { n: extra } => {
                if *extra == 0 {
                    return Err(EnsembleError::BadParameter(
                        "truncation needs n >= 1".into(),
                    ));
                }
            }
            EnsembleKind::ProductGinUE { nu } => {
                if nu.is_empty() {
                    return Err(EnsembleError::BadParameter(
                        "product needs at least one factor".into(),
                    ));
                }
            }
            EnsembleKind::ProductTruncated { n: extras }
                if (extras.is_empty() || extras.contains(&0)) => {
                    return Err(EnsembleError::BadParameter(
                        "truncated product needs factors with n >= 1".into(),
                    ));
                }
            _ => {}
        }
        if scaling == Scaling::Edge {
            match kind {
                EnsembleKind::GinUE | EnsembleKind::InducedGinUE { .. } => {}
                _ => {
                    return Err(EnsembleError::Unsupported(
                        "edge chart is defined for GinUE and induced GinUE only".into(),
                    ))
                }
            }
        }
        Ok(EnsembleSpec { kind, n, scaling })
    }

    /// One-line description used in output metadata.
    pub fn label(&self) -> String {
        format!(
            "{} N={} scaling={:?}",
            self.kind.label(),
            self.n,
            self.scaling
        )
    }

    /// Divisor taking raw to global coordinates.
    pub fn global_divisor(&self) -> f64 {
        let n = self.n as f64;
        match &self.kind {
            EnsembleKind::GinUE
            | EnsembleKind::EllipticGinUE { .. }
            | EnsembleKind::InducedGinUE { .. } => n.sqrt(),
            EnsembleKind::ProductGinUE { nu } => n.powf(nu.len() as f64 / 2.0),
            _ => 1.0,
        }
    }

    fn edge_radius(&self) -> Option<f64> {
        match &self.kind {
            EnsembleKind::GinUE => Some((self.n as f64).sqrt()),
            EnsembleKind::InducedGinUE { n } => Some((*n as f64).sqrt()),
            _ => None,
        }
    }

    /// Applies the spec's coordinate convention to one raw eigenvalue.
    pub fn scale_point(&self, z: Complex64) -> Complex64 {
        match self.scaling {
            Scaling::Raw | Scaling::Bulk => z,
            Scaling::Global => z / self.global_divisor(),
            Scaling::Edge => {
                let r_edge = self.edge_radius().expect("validated at construction");
                Complex64::new(z.norm() - r_edge, r_edge * z.arg())
            }
        }
    }
}

/// Sampled spectrum tagged with its generating spec and seed.
#[derive(Debug, Clone)]
pub struct ComplexSpectrum {
    pub eigenvalues: Vec<Complex64>,
    pub spec: EnsembleSpec,
    pub seed: u64,
}

fn standard_complex(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Matrix of iid standard complex Gaussians (`E|g|^2 = 1`).
pub fn sample_gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| standard_complex(rng))
}

/// Haar-distributed unitary via QR of a Gaussian matrix with the phase of the
/// R diagonal absorbed into Q.
pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> CMatrix {
    linalg::qr_haar_fix(sample_gaussian_matrix(n, n, rng))
}

/// Hermitian square root through a symmetric eigendecomposition; eigenvalues
/// are clamped at zero to absorb roundoff on positive semidefinite input.
fn hermitian_sqrt(h: &CMatrix) -> CMatrix {
    hermitian_power(h, 0.5)
}

fn hermitian_inv_sqrt(h: &CMatrix) -> CMatrix {
    hermitian_power(h, -0.5)
}

fn hermitian_power(h: &CMatrix, p: f64) -> CMatrix {
    let eig = SymmetricEigen::new(h.clone());
    let powered: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).powf(p))
        .collect();
    let mut scaled = eig.eigenvectors.clone();
    for (j, col) in powered.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*col);
    }
    &scaled * eig.eigenvectors.adjoint()
}

/// One square factor with the induced-Ginibre law carrying `extra` added rows.
fn induced_factor(n: usize, extra: usize, rng: &mut impl Rng) -> CMatrix {
    if extra == 0 {
        return sample_gaussian_matrix(n, n, rng);
    }
    let g = sample_gaussian_matrix(n + extra, n, rng);
    let root = hermitian_sqrt(&(g.adjoint() * &g));
    root * haar_unitary(n, rng)
}

/// Top `n x n` corner of an `(n+extra)`-dimensional Haar unitary.
fn truncated_factor(n: usize, extra: usize, rng: &mut impl Rng) -> CMatrix {
    let u = haar_unitary(n + extra, rng);
    u.view((0, 0), (n, n)).into_owned()
}

/// Builds one matrix realisation whose eigenvalue law is the spec's
/// eigenvalue PDF (product kinds are collapsed to the final square matrix).
pub fn build_ensemble_matrix(
    spec: &EnsembleSpec,
    rng: &mut impl Rng,
) -> Result<CMatrix, EnsembleError> {
    let n = spec.n;
    let m = match &spec.kind {
        EnsembleKind::GinUE => sample_gaussian_matrix(n, n, rng),
        EnsembleKind::EllipticGinUE { tau } => {
            let g1 = sample_gaussian_matrix(n, n, rng);
            let g2 = sample_gaussian_matrix(n, n, rng);
            let h1 = (&g1 + g1.adjoint()) * Complex64::new(0.5, 0.0);
            let h2 = (&g2 + g2.adjoint()) * Complex64::new(0.5, 0.0);
            h1 * Complex64::new((1.0 + tau).sqrt(), 0.0)
                + h2 * Complex64::new(0.0, (1.0 - tau).sqrt())
        }
        EnsembleKind::InducedGinUE { n: rows } => induced_factor(n, rows - n, rng),
        EnsembleKind::Spherical => loop {
            let g1 = sample_gaussian_matrix(n, n, rng);
            let g2 = sample_gaussian_matrix(n, n, rng);
            match linalg::solve_matrix(&g1, &g2) {
                Ok(q) => break q,
                // Singular G1 has probability zero; resample if the solver
                // still refuses the draw.
                Err(_) => continue,
            }
        },
        EnsembleKind::InducedSpherical { n: rows, m: cols } => {
            let a = sample_gaussian_matrix(*rows, n, rng);
            let x = sample_gaussian_matrix(n, *cols, rng);
            let whiten = hermitian_inv_sqrt(&(a.adjoint() * &a));
            let y = whiten * x;
            let root = hermitian_sqrt(&(&y * y.adjoint()));
            haar_unitary(n, rng) * root
        }
        EnsembleKind::TruncatedUnitary { n: extra } => truncated_factor(n, *extra, rng),
        EnsembleKind::ProductGinUE { nu } => {
            let mut prod = induced_factor(n, nu[0], rng);
            for extra in &nu[1..] {
                prod *= induced_factor(n, *extra, rng);
            }
            prod
        }
        EnsembleKind::ProductTruncated { n: extras } => {
            let mut prod = truncated_factor(n, extras[0], rng);
            for extra in &extras[1..] {
                prod *= truncated_factor(n, *extra, rng);
            }
            prod
        }
    };
    Ok(m)
}

/// Samples one spectrum: builds the matrix, runs the eigensolver, applies the
/// coordinate convention, and validates documented support bounds.
pub fn sample_spectrum(
    spec: &EnsembleSpec,
    seed: u64,
    rng: &mut impl Rng,
) -> Result<ComplexSpectrum, EnsembleError> {
    let a = build_ensemble_matrix(spec, rng)?;
    let raw = linalg::eigenvalues(&a)?;
    let bounded = matches!(
        spec.kind,
        EnsembleKind::TruncatedUnitary { .. } | EnsembleKind::ProductTruncated { .. }
    );
    if bounded {
        for z in &raw {
            if z.norm() > 1.0 + 1e-6 {
                return Err(EnsembleError::Numeric(format!(
                    "truncated-kind eigenvalue outside the unit disk: |z| = {}",
                    z.norm()
                )));
            }
        }
    }
    let eigenvalues = raw.into_iter().map(|z| spec.scale_point(z)).collect();
    Ok(ComplexSpectrum {
        eigenvalues,
        spec: spec.clone(),
        seed,
    })
}

/// Radial weight in the independent-moduli decomposition: for a rotation
/// invariant eigenvalue PDF with weight `w(|z|^2)`, the squared moduli are
/// independent with the `j`-th distributed as `w(s) s^{j-1} ds` (normalised),
/// `j = 1..N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialWeight {
    /// `w(s) = s^nu e^{-s}`: the `j`-th modulus is Gamma(nu + j, 1).
    Gamma { nu: f64 },
    /// `w(s) = (1-s)^{n-1}` on (0,1): the `j`-th modulus is Beta(j, n).
    Beta { n: f64 },
    /// `w(s) = s^nu (1+s)^{-total}`: `s/(1+s)` is Beta(nu + j, total - nu - j).
    BetaPrime { nu: f64, total: f64 },
}

impl RadialWeight {
    /// Maps an ensemble to its radial weight. Elliptic breaks rotation
    /// invariance and the product weights do not tilt into a named
    /// distribution, so those kinds are unsupported.
    pub fn for_spec(spec: &EnsembleSpec) -> Result<RadialWeight, EnsembleError> {
        let n = spec.n;
        match &spec.kind {
            EnsembleKind::GinUE => Ok(RadialWeight::Gamma { nu: 0.0 }),
            EnsembleKind::InducedGinUE { n: rows } => Ok(RadialWeight::Gamma {
                nu: (rows - n) as f64,
            }),
            EnsembleKind::TruncatedUnitary { n: extra } => Ok(RadialWeight::Beta {
                n: *extra as f64,
            }),
            EnsembleKind::Spherical => Ok(RadialWeight::BetaPrime {
                nu: 0.0,
                total: (n + 1) as f64,
            }),
            EnsembleKind::InducedSpherical { n: rows, m } => Ok(RadialWeight::BetaPrime {
                nu: (m - n) as f64,
                total: (rows + m - n + 1) as f64,
            }),
            other => Err(EnsembleError::Unsupported(format!(
                "no independent-moduli law for {}",
                other.label()
            ))),
        }
    }
}

/// Draws the `N` independent squared moduli `s_1, ..., s_N` for a rotation
/// invariant ensemble (valid for radial statistics only; the joint angular
/// structure is not reproduced).
pub fn kostlan_radial_sample(
    weight: RadialWeight,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<f64>, EnsembleError> {
    let mut out = Vec::with_capacity(n);
    for j in 1..=n {
        let j = j as f64;
        let s = match weight {
            RadialWeight::Gamma { nu } => {
                let dist = GammaDist::new(nu + j, 1.0)
                    .map_err(|e| EnsembleError::BadParameter(e.to_string()))?;
                dist.sample(rng)
            }
            RadialWeight::Beta { n: extra } => {
                let dist = BetaDist::new(j, extra)
                    .map_err(|e| EnsembleError::BadParameter(e.to_string()))?;
                dist.sample(rng)
            }
            RadialWeight::BetaPrime { nu, total } => {
                let b = total - nu - j;
                if b <= 0.0 {
                    return Err(EnsembleError::BadParameter(format!(
                        "beta-prime weight not normalisable at order {j} (total {total}, nu {nu})"
                    )));
                }
                let dist = BetaDist::new(nu + j, b)
                    .map_err(|e| EnsembleError::BadParameter(e.to_string()))?;
                let t: f64 = dist.sample(rng);
                t / (1.0 - t)
            }
        };
        out.push(s);
    }
    Ok(out)
}

/// One draw of (spectrum, diagonal overlap) from the Schur representation.
#[derive(Debug, Clone)]
pub struct OverlapDraw {
    /// Raw GinUE eigenvalues, the distinguished one first.
    pub eigenvalues: Vec<Complex64>,
    /// Diagonal eigenvector overlap of the distinguished eigenvalue.
    pub o11: f64,
}

/// Acceptance radius (raw coordinates) when conditioning on an off-origin
/// eigenvalue location: spectra are redrawn until some eigenvalue lands this
/// close to the target.
pub const OVERLAP_CONDITION_RADIUS: f64 = 0.05;

/// Samples the diagonal overlap `O_{11}` through its Schur-form product law:
/// given the eigenvalues, `O_11 = prod_{n>=2} (1 + |X_n|^2 / |z_1 - z_n|^2)`
/// with independent standard complex Gaussians `X_n`.
///
/// `condition = Some(w)` pins the distinguished eigenvalue near `w` (raw
/// coordinates). At `w = 0` this is exact: the remaining squared moduli are
/// independent Gamma(n, 1), `n = 2..N`. Elsewhere an accept-reject estimator
/// is used: full spectra are redrawn until an eigenvalue falls within
/// [`OVERLAP_CONDITION_RADIUS`] of `w`.
pub fn schur_overlap_sample(
    n: usize,
    condition: Option<Complex64>,
    rng: &mut impl Rng,
) -> Result<OverlapDraw, EnsembleError> {
    let spec = EnsembleSpec::new(EnsembleKind::GinUE, n, Scaling::Raw)?;
    let mut eigenvalues: Vec<Complex64>;
    match condition {
        Some(w) if w.norm() == 0.0 => {
            eigenvalues = Vec::with_capacity(n);
            eigenvalues.push(Complex64::new(0.0, 0.0));
            for k in 2..=n {
                let dist = GammaDist::new(k as f64, 1.0)
                    .map_err(|e| EnsembleError::BadParameter(e.to_string()))?;
                let s: f64 = dist.sample(rng);
                let theta = rng.random::<f64>() * std::f64::consts::TAU;
                eigenvalues.push(Complex64::from_polar(s.sqrt(), theta));
            }
        }
        Some(w) => {
            let mut attempts = 0usize;
            eigenvalues = loop {
                attempts += 1;
                assert!(
                    attempts <= 1_000_000,
                    "conditioning near {w} did not produce an eigenvalue within {OVERLAP_CONDITION_RADIUS}"
                );
                let a = build_ensemble_matrix(&spec, rng)?;
                let mut eigs = linalg::eigenvalues(&a)?;
                let (best, dist) = eigs
                    .iter()
                    .enumerate()
                    .map(|(i, z)| (i, (z - w).norm()))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("N >= 1");
                if dist <= OVERLAP_CONDITION_RADIUS {
                    eigs.swap(0, best);
                    break eigs;
                }
            };
        }
        None => {
            let a = build_ensemble_matrix(&spec, rng)?;
            let mut eigs = linalg::eigenvalues(&a)?;
            let pick = rng.random_range(0..n);
            eigs.swap(0, pick);
            eigenvalues = eigs;
        }
    }
    let z1 = eigenvalues[0];
    let mut o11 = 1.0;
    for z in &eigenvalues[1..] {
        let x = standard_complex(rng);
        o11 *= 1.0 + x.norm_sqr() / (z1 - z).norm_sqr();
    }
    Ok(OverlapDraw { eigenvalues, o11 })
}

/// Metropolis chain for the radial Coulomb gas at inverse temperature `beta`:
/// stationary density proportional to
/// `prod_{j<k} |z_j - z_k|^beta  exp(-(beta/2) sum_j q(|z_j|))`.
pub struct CoulombChain {
    pub beta: f64,
    pub n: usize,
    potential: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub positions: Vec<Complex64>,
    pub step_scale: f64,
    accepted: u64,
    proposed: u64,
    swept: u64,
}

impl CoulombChain {
    /// Starts a chain from uniform positions in the disk that supports the
    /// `q(r) = r^2` equilibrium at the given size.
    pub fn new(
        beta: f64,
        n: usize,
        potential: impl Fn(f64) -> f64 + Send + Sync + 'static,
        rng: &mut impl Rng,
    ) -> Self {
        let radius = (n as f64).sqrt().max(1.0);
        let positions = (0..n)
            .map(|_| {
                let r = radius * rng.random::<f64>().sqrt();
                let theta = rng.random::<f64>() * std::f64::consts::TAU;
                Complex64::from_polar(r, theta)
            })
            .collect();
        CoulombChain {
            beta,
            n,
            potential: Box::new(potential),
            positions,
            step_scale: 0.5,
            accepted: 0,
            proposed: 0,
            swept: 0,
        }
    }

    /// Confinement potential evaluated at radius `r`.
    pub fn potential_at(&self, r: f64) -> f64 {
        (self.potential)(r)
    }

    /// Number of sweeps performed since construction. Zero means the chain
    /// has never moved and is still at its uniform starting configuration.
    pub fn sweeps_done(&self) -> u64 {
        self.swept
    }

    /// Interaction-plus-confinement energy of particle `k` at position `z`,
    /// before the `beta` weighting.
    fn site_energy(&self, k: usize, z: Complex64) -> f64 {
        let mut e = 0.5 * (self.potential)(z.norm());
        for (j, zj) in self.positions.iter().enumerate() {
            if j != k {
                e -= (z - zj).norm().ln();
            }
        }
        e
    }

    /// One sweep: a Gaussian move proposed for each particle in turn.
    pub fn sweep(&mut self, rng: &mut impl Rng) {
        self.swept += 1;
        for k in 0..self.n {
            let old = self.positions[k];
            let dx: f64 = StandardNormal.sample(rng);
            let dy: f64 = StandardNormal.sample(rng);
            let prop = old + Complex64::new(dx, dy) * self.step_scale;
            let delta = self.site_energy(k, prop) - self.site_energy(k, old);
            self.proposed += 1;
            if delta <= 0.0 || rng.random::<f64>() < (-self.beta * delta).exp() {
                self.positions[k] = prop;
                self.accepted += 1;
            }
        }
    }

    /// Fraction of proposals accepted since the last counter reset.
    pub fn accept_rate(&self) -> f64 {
        if self.proposed == 0 {
            return 0.0;
        }
        self.accepted as f64 / self.proposed as f64
    }

    fn reset_counters(&mut self) {
        self.accepted = 0;
        self.proposed = 0;
    }

    /// Burn-in with step autotuning: after every batch of sweeps the step is
    /// nudged toward the 0.2..0.5 acceptance window.
    pub fn burn_in(&mut self, sweeps: usize, rng: &mut impl Rng) {
        let batch = 10.min(sweeps.max(1));
        let mut done = 0;
        while done < sweeps {
            self.reset_counters();
            for _ in 0..batch.min(sweeps - done) {
                self.sweep(rng);
            }
            done += batch;
            let rate = self.accept_rate();
            if rate < 0.2 {
                self.step_scale *= 0.8;
            } else if rate > 0.5 {
                self.step_scale *= 1.25;
            }
        }
        self.reset_counters();
    }

    /// Total energy `sum_j q(|z_j|)/2 - sum_{j<k} ln|z_j - z_k|`.
    pub fn energy(&self) -> f64 {
        let mut e = 0.0;
        for (j, zj) in self.positions.iter().enumerate() {
            e += 0.5 * (self.potential)(zj.norm());
            for zk in &self.positions[..j] {
                e -= (zj - zk).norm().ln();
            }
        }
        e
    }
}

/// Builds a chain and runs an autotuned burn-in of `n_sweeps` sweeps.
pub fn metropolis_coulomb(
    beta: f64,
    n: usize,
    potential: impl Fn(f64) -> f64 + Send + Sync + 'static,
    n_sweeps: usize,
    rng: &mut impl Rng,
) -> CoulombChain {
    let mut chain = CoulombChain::new(beta, n, potential, rng);
    chain.burn_in(n_sweeps, rng);
    chain
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replica_rng;
    use crate::specfun::{inc_beta_reg, reg_gamma_lower};
    use crate::stats::{ks_test, ks_two_sample, mean_se};

    fn spec(kind: EnsembleKind, n: usize) -> EnsembleSpec {
        EnsembleSpec::new(kind, n, Scaling::Raw).unwrap()
    }

    #[test]
    fn gaussian_entry_moments() {
        let mut rng = replica_rng(7, 0, 0);
        let g = sample_gaussian_matrix(200, 500, &mut rng);
        let k = (g.nrows() * g.ncols()) as f64;
        let mean = g.iter().sum::<Complex64>() / k;
        // Entries have unit modulus-squared variance, so the mean of k draws
        // has standard error 1/sqrt(2k) per part.
        let se = (0.5 / k).sqrt();
        assert!(mean.re.abs() < 5.0 * se, "re mean {}", mean.re);
        assert!(mean.im.abs() < 5.0 * se, "im mean {}", mean.im);
        let abs2 = g.iter().map(|z| z.norm_sqr()).sum::<f64>() / k;
        assert!((abs2 - 1.0).abs() < 5.0 * (1.0 / k).sqrt(), "E|g|^2 {abs2}");
    }

    #[test]
    fn trace_of_gram_matches_entry_count() {
        let mut rng = replica_rng(8, 0, 0);
        let mut traces = Vec::new();
        for _ in 0..40 {
            let g = sample_gaussian_matrix(50, 50, &mut rng);
            traces.push((g.adjoint() * &g).trace().re);
        }
        let (mean, se) = mean_se(&traces);
        assert!((mean - 2500.0).abs() < 4.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn ginue_radial_law_matches_gamma_mixture() {
        // Squared moduli of a finite GinUE spectrum form, unordered, an equal
        // mixture of Gamma(j,1) laws across orders j = 1..N.
        let sp = spec(EnsembleKind::GinUE, 2);
        let mut rng = replica_rng(9, 0, 0);
        let mut s = Vec::new();
        for k in 0..4000 {
            let spect = sample_spectrum(&sp, k, &mut rng).unwrap();
            s.extend(spect.eigenvalues.iter().map(|z| z.norm_sqr()));
        }
        let (_, p) = ks_test(&mut s, |x| {
            0.5 * (reg_gamma_lower(1.0, x).unwrap() + reg_gamma_lower(2.0, x).unwrap())
        });
        assert!(p > 1e-3, "p = {p}");
    }

    #[test]
    fn elliptic_at_zero_tau_is_ginue() {
        let sp = spec(EnsembleKind::EllipticGinUE { tau: 0.0 }, 30);
        let mut rng = replica_rng(10, 0, 0);
        let mut abs2 = Vec::new();
        for _ in 0..200 {
            let j = build_ensemble_matrix(&sp, &mut rng).unwrap();
            abs2.extend(j.iter().map(|z| z.norm_sqr()));
        }
        let (mean, se) = mean_se(&abs2);
        assert!((mean - 1.0).abs() < 4.0 * se, "E|J_jk|^2 = {mean} (se {se})");
    }

    #[test]
    fn elliptic_support_is_the_ellipse() {
        let tau = 0.5;
        let sp = EnsembleSpec::new(EnsembleKind::EllipticGinUE { tau }, 100, Scaling::Global)
            .unwrap();
        let mut rng = replica_rng(11, 0, 0);
        let fuzz = 1.0 + 4.0 / (sp.n as f64).sqrt();
        for k in 0..5 {
            let spect = sample_spectrum(&sp, k, &mut rng).unwrap();
            for z in &spect.eigenvalues {
                let q = (z.re / (1.0 + tau)).powi(2) + (z.im / (1.0 - tau)).powi(2);
                assert!(q < fuzz * fuzz, "point {z} outside inflated ellipse");
            }
        }
    }

    #[test]
    fn induced_radial_law_matches_shifted_gamma_mixture() {
        let sp = spec(EnsembleKind::InducedGinUE { n: 20 }, 10);
        let mut rng = replica_rng(12, 0, 0);
        let mut s = Vec::new();
        for k in 0..400 {
            let spect = sample_spectrum(&sp, k, &mut rng).unwrap();
            s.extend(spect.eigenvalues.iter().map(|z| z.norm_sqr()));
        }
        let (_, p) = ks_test(&mut s, |x| {
            (1..=10)
                .map(|j| reg_gamma_lower((10 + j) as f64, x).unwrap())
                .sum::<f64>()
                / 10.0
        });
        assert!(p > 1e-3, "p = {p}");
    }

    #[test]
    fn spherical_radial_law_matches_beta_prime_mixture() {
        let n = 6;
        let sp = spec(EnsembleKind::Spherical, n);
        let mut rng = replica_rng(13, 0, 0);
        let mut s = Vec::new();
        for k in 0..1500 {
            let spect = sample_spectrum(&sp, k, &mut rng).unwrap();
            s.extend(spect.eigenvalues.iter().map(|z| z.norm_sqr()));
        }
        let (_, p) = ks_test(&mut s, |x| {
            let t = x / (1.0 + x);
            (1..=n)
                .map(|j| inc_beta_reg(j as f64, (n + 1 - j) as f64, t).unwrap())
                .sum::<f64>()
                / n as f64
        });
        assert!(p > 1e-3, "p = {p}");
    }

    #[test]
    fn induced_spherical_radial_law() {
        let (n, rows, m) = (4usize, 6usize, 5usize);
        let sp = spec(EnsembleKind::InducedSpherical { n: rows, m }, n);
        let mut rng = replica_rng(14, 0, 0);
        let mut s = Vec::new();
        for k in 0..1500 {
            let spect = sample_spectrum(&sp, k, &mut rng).unwrap();
            s.extend(spect.eigenvalues.iter().map(|z| z.norm_sqr()));
        }
        // Weight s^{m-N} (1+s)^{-(n+m-N+1)} tilted by s^{j-1} maps under
        // t = s/(1+s) to Beta(m-N+j, n+1-j).
        let (_, p) = ks_test(&mut s, |x| {
            let t = x / (1.0 + x);
            (1..=n)
                .map(|j| inc_beta_reg((m - n + j) as f64, (rows + 1 - j) as f64, t).unwrap())
                .sum::<f64>()
                / n as f64
        });
        assert!(p > 1e-3, "p = {p}");
    }

    #[test]
    fn truncated_single_eigenvalue_is_uniform_on_disk() {
        let sp = spec(EnsembleKind::TruncatedUnitary { n: 1 }, 1);
        let mut rng = replica_rng(15, 0, 0);
        let mut s = Vec::new();
        for k in 0..4000 {
            let spect = sample_spectrum(&sp, k, &mut rng).unwrap();
            s.push(spect.eigenvalues[0].norm_sqr());
        }
        // Uniform on the unit disk means |z|^2 is uniform on (0,1).
        let (_, p) = ks_test(&mut s, |x| x.clamp(0.0, 1.0));
        assert!(p > 1e-3, "p = {p}");
    }

    #[test]
    fn truncated_spectra_stay_in_the_unit_disk() {
        let sp = spec(EnsembleKind::TruncatedUnitary { n: 3 }, 12);
        let mut rng = replica_rng(16, 0, 0);
        for k in 0..30 {
            let spect = sample_spectrum(&sp, k, &mut rng).unwrap();
            for z in &spect.eigenvalues {
                assert!(z.norm() <= 1.0 + 1e-8);
            }
        }
    }

    #[test]
    fn product_mean_squared_modulus_matches_moment_ratio() {
        // E s_j for the j-th radial order is the ratio of consecutive weight
        // moments; for nu = (0,0) this is j^2, summing to N(N+1)(2N+1)/6.
        let sp = spec(EnsembleKind::ProductGinUE { nu: vec![0, 0] }, 5);
        let mut rng = replica_rng(17, 0, 0);
        let mut sums = Vec::new();
        for k in 0..2500 {
            let spect = sample_spectrum(&sp, k, &mut rng).unwrap();
            sums.push(spect.eigenvalues.iter().map(|z| z.norm_sqr()).sum::<f64>());
        }
        let (mean, se) = mean_se(&sums);
        assert!((mean - 55.0).abs() < 4.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn truncated_product_mean_squared_modulus() {
        // For factors n = (2,3) at N = 2 the moment ratios give
        // E s_j = j^2 / ((2+j)(3+j)): 1/12 + 1/5.
        let sp = spec(EnsembleKind::ProductTruncated { n: vec![2, 3] }, 2);
        let mut rng = replica_rng(18, 0, 0);
        let mut sums = Vec::new();
        for k in 0..4000 {
            let spect = sample_spectrum(&sp, k, &mut rng).unwrap();
            sums.push(spect.eigenvalues.iter().map(|z| z.norm_sqr()).sum::<f64>());
        }
        let (mean, se) = mean_se(&sums);
        let expect = 1.0 / 12.0 + 1.0 / 5.0;
        assert!((mean - expect).abs() < 4.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn bi_unitary_invariance_of_ginue() {
        let sp = spec(EnsembleKind::GinUE, 8);
        let mut rng = replica_rng(19, 0, 0);
        let mut plain = Vec::new();
        let mut rotated = Vec::new();
        for _ in 0..400 {
            let g = build_ensemble_matrix(&sp, &mut rng).unwrap();
            plain.extend(linalg::eigenvalues(&g).unwrap().iter().map(|z| z.norm()));
            let g = build_ensemble_matrix(&sp, &mut rng).unwrap();
            let u = haar_unitary(8, &mut rng);
            let v = haar_unitary(8, &mut rng);
            let m = u * g * v;
            rotated.extend(linalg::eigenvalues(&m).unwrap().iter().map(|z| z.norm()));
        }
        let (_, p) = ks_two_sample(&mut plain, &mut rotated);
        assert!(p > 1e-3, "p = {p}");
    }

    #[test]
    fn kostlan_orders_match_eigensolver_orders() {
        // Sorted squared moduli from full spectra agree per order statistic
        // with sorted independent Gamma draws.
        let n = 5;
        let sp = spec(EnsembleKind::GinUE, n);
        let mut rng = replica_rng(20, 0, 0);
        let reps = 1200;
        let mut by_eig = vec![Vec::new(); n];
        let mut by_radial = vec![Vec::new(); n];
        for k in 0..reps {
            let spect = sample_spectrum(&sp, k as u64, &mut rng).unwrap();
            let mut s: Vec<f64> = spect.eigenvalues.iter().map(|z| z.norm_sqr()).collect();
            s.sort_by(f64::total_cmp);
            for (i, v) in s.iter().enumerate() {
                by_eig[i].push(*v);
            }
            let mut s = kostlan_radial_sample(RadialWeight::Gamma { nu: 0.0 }, n, &mut rng).unwrap();
            s.sort_by(f64::total_cmp);
            for (i, v) in s.iter().enumerate() {
                by_radial[i].push(*v);
            }
        }
        for i in 0..n {
            let (_, p) = ks_two_sample(&mut by_eig[i], &mut by_radial[i]);
            assert!(p > 1e-3, "order {i}: p = {p}");
        }
    }

    #[test]
    fn kostlan_first_order_is_exponential() {
        let mut rng = replica_rng(21, 0, 0);
        let mut s = Vec::new();
        for _ in 0..10_000 {
            s.push(kostlan_radial_sample(RadialWeight::Gamma { nu: 0.0 }, 1, &mut rng).unwrap()[0]);
        }
        let (_, p) = ks_test(&mut s, |x| 1.0 - (-x).exp());
        assert!(p > 1e-2, "p = {p}");
    }

    #[test]
    fn kostlan_max_matches_brute_force_maximum() {
        let mut rng = replica_rng(22, 0, 0);
        let mut direct = Vec::new();
        for _ in 0..5000 {
            let s = kostlan_radial_sample(RadialWeight::Gamma { nu: 0.0 }, 3, &mut rng).unwrap();
            direct.push(s.into_iter().fold(f64::MIN, f64::max));
        }
        // Independent maxima have CDF = product of the three Gamma CDFs.
        let (_, p) = ks_test(&mut direct, |x| {
            reg_gamma_lower(1.0, x).unwrap() * reg_gamma_lower(2.0, x).unwrap() * reg_gamma_lower(3.0, x).unwrap()
        });
        assert!(p > 1e-3, "p = {p}");
    }

    #[test]
    fn induced_weight_shifts_the_gamma_order() {
        let sp = spec(EnsembleKind::InducedGinUE { n: 9 }, 4);
        let w = RadialWeight::for_spec(&sp).unwrap();
        assert_eq!(w, RadialWeight::Gamma { nu: 5.0 });
        let mut rng = replica_rng(23, 0, 0);
        let mut first = Vec::new();
        for _ in 0..6000 {
            first.push(kostlan_radial_sample(w, 4, &mut rng).unwrap()[0]);
        }
        let (_, p) = ks_test(&mut first, |x| reg_gamma_lower(6.0, x).unwrap());
        assert!(p > 1e-3, "p = {p}");
    }

    #[test]
    fn overlap_single_eigenvalue_is_unity() {
        let mut rng = replica_rng(24, 0, 0);
        let d = schur_overlap_sample(1, None, &mut rng).unwrap();
        assert_eq!(d.o11, 1.0);
    }

    #[test]
    fn conditioned_overlap_is_inverse_beta() {
        let n = 20;
        let mut rng = replica_rng(25, 0, 0);
        let mut inv = Vec::new();
        for _ in 0..5000 {
            let d = schur_overlap_sample(n, Some(Complex64::new(0.0, 0.0)), &mut rng).unwrap();
            inv.push(1.0 / d.o11);
        }
        let (_, p) = ks_test(&mut inv, |x| inc_beta_reg(2.0, (n - 1) as f64, x).unwrap());
        assert!(p > 1e-3, "p = {p}");
    }

    #[test]
    fn conditioned_overlap_mean_is_n() {
        let n = 100;
        let mut rng = replica_rng(26, 0, 0);
        let mut o = Vec::new();
        for _ in 0..20_000 {
            let d = schur_overlap_sample(n, Some(Complex64::new(0.0, 0.0)), &mut rng).unwrap();
            o.push(d.o11);
        }
        let (mean, se) = mean_se(&o);
        assert!((mean - n as f64).abs() < 4.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn metropolis_second_moment_beta_four() {
        // At beta = 4, N = 2 the confined pair satisfies <sum |z|^2> = 2.
        let mut rng = replica_rng(27, 0, 0);
        let mut chain = metropolis_coulomb(4.0, 2, |r| r * r, 400, &mut rng);
        let mut vals = Vec::new();
        for _ in 0..4000 {
            for _ in 0..5 {
                chain.sweep(&mut rng);
            }
            vals.push(chain.positions.iter().map(|z| z.norm_sqr()).sum::<f64>());
        }
        let (mean, se) = mean_se(&vals);
        assert!((mean - 2.0).abs() < 6.0 * se, "mean {mean} se {se}");
        let rate = chain.accept_rate();
        assert!(rate > 0.1 && rate < 0.7, "acceptance {rate}");
    }

    #[test]
    fn metropolis_second_moment_beta_two() {
        // <sum |z|^2> = 2N/beta + N(N-1)/2 = 10 + 45 at beta = 2, N = 10.
        let mut rng = replica_rng(28, 0, 0);
        let mut chain = metropolis_coulomb(2.0, 10, |r| r * r, 400, &mut rng);
        let mut vals = Vec::new();
        for _ in 0..2500 {
            for _ in 0..4 {
                chain.sweep(&mut rng);
            }
            vals.push(chain.positions.iter().map(|z| z.norm_sqr()).sum::<f64>());
        }
        let (mean, se) = mean_se(&vals);
        assert!((mean - 55.0).abs() < 8.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let sp = spec(EnsembleKind::GinUE, 6);
        let a = sample_spectrum(&sp, 3, &mut replica_rng(99, 3, 0)).unwrap();
        let b = sample_spectrum(&sp, 3, &mut replica_rng(99, 3, 0)).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        let c = sample_spectrum(&sp, 4, &mut replica_rng(99, 4, 0)).unwrap();
        assert_ne!(a.eigenvalues, c.eigenvalues);
    }

    #[test]
    fn parameter_validation_rejects_bad_specs() {
        assert!(EnsembleSpec::new(EnsembleKind::GinUE, 0, Scaling::Raw).is_err());
        assert!(
            EnsembleSpec::new(EnsembleKind::EllipticGinUE { tau: 1.0 }, 4, Scaling::Raw).is_err()
        );
        assert!(
            EnsembleSpec::new(EnsembleKind::InducedGinUE { n: 3 }, 4, Scaling::Raw).is_err()
        );
        assert!(
            EnsembleSpec::new(EnsembleKind::TruncatedUnitary { n: 0 }, 4, Scaling::Raw).is_err()
        );
        assert!(
            EnsembleSpec::new(EnsembleKind::Spherical, 4, Scaling::Edge).is_err()
        );
        assert!(EnsembleSpec::new(
            EnsembleKind::ProductTruncated { n: vec![1, 0] },
            4,
            Scaling::Raw
        )
        .is_err());
    }

    #[test]
    fn edge_chart_recentres_the_boundary() {
        let sp = EnsembleSpec::new(EnsembleKind::GinUE, 25, Scaling::Edge).unwrap();
        let z = Complex64::from_polar(5.0, 0.3);
        let u = sp.scale_point(z);
        assert!((u.re - 0.0).abs() < 1e-12);
        assert!((u.im - 1.5).abs() < 1e-12);
    }
}
