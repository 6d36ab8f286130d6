//! Dense complex linear algebra on top of nalgebra's factorizations:
//! eigenvalues via complex Schur, right eigenvectors by triangular
//! back-substitution on the Schur form, determinants via LU, and the
//! phase-fixing step that turns a QR factor into a Haar unitary.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

#[derive(Debug, thiserror::Error)]
pub enum LinalgError {
    #[error("Schur iteration failed to converge for a {0}x{0} matrix")]
    SchurFailed(usize),
    #[error("eigenvalue sum deviates from trace by {0:.3e} (tolerance {1:.3e})")]
    TraceMismatch(f64, f64),
    #[error("singular matrix in {0}")]
    Singular(&'static str),
}

/// Eigenvalues of a general complex matrix, with the trace consistency
/// check sum(lambda) = tr A enforced at 1e-8 * ||A||.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>, LinalgError> {
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), 1e-14, 0)
        .ok_or(LinalgError::SchurFailed(a.nrows()))?;
    let (_, t) = schur.unpack();
    let vals: Vec<Complex64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    check_trace(a, &vals)?;
    Ok(vals)
}

fn check_trace(a: &CMatrix, vals: &[Complex64]) -> Result<(), LinalgError> {
    let tr = a.trace();
    let sum: Complex64 = vals.iter().sum();
    let scale = a.norm().max(1e-300);
    let dev = (tr - sum).norm();
    if dev > 1e-8 * scale {
        return Err(LinalgError::TraceMismatch(dev, 1e-8 * scale));
    }
    Ok(())
}

/// Eigenvalues together with unit-norm right eigenvectors (as columns).
pub struct Eigen {
    pub values: Vec<Complex64>,
    pub right: CMatrix,
}

/// Full right eigendecomposition: Schur A = Q T Q^H, then for each
/// eigenvalue the triangular system (T - lambda I) y = 0 is solved by
/// back-substitution and rotated back by Q. Our matrices are drawn from
/// continuous distributions, so eigenvalues are simple almost surely;
/// near-degenerate denominators are floored rather than treated as errors.
pub fn eigen_right(a: &CMatrix) -> Result<Eigen, LinalgError> {
    let n = a.nrows();
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), 1e-14, 0)
        .ok_or(LinalgError::SchurFailed(n))?;
    let (q, t) = schur.unpack();
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    check_trace(a, &values)?;
    let floor = 1e-300;
    let mut right = CMatrix::zeros(n, n);
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        y[k] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for (l, &yl) in y.iter().enumerate().take(k + 1).skip(j + 1) {
                s += t[(j, l)] * yl;
            }
            let mut denom = t[(j, j)] - values[k];
            if denom.norm() < floor {
                denom = Complex64::new(floor, 0.0);
            }
            y[j] = -s / denom;
        }
        // Rotate back and normalize; only the leading k+1 entries of y are
        // nonzero.
        let mut v = CVector::zeros(n);
        for (l, &yl) in y.iter().enumerate().take(k + 1) {
            if yl != Complex64::new(0.0, 0.0) {
                for i in 0..n {
                    v[i] += q[(i, l)] * yl;
                }
            }
        }
        let norm = v.norm();
        for i in 0..n {
            right[(i, k)] = v[i] / norm;
        }
        for e in y.iter_mut().take(k + 1) {
            *e = Complex64::new(0.0, 0.0);
        }
    }
    Ok(Eigen { values, right })
}

/// Determinant via LU.
pub fn det(a: &CMatrix) -> Complex64 {
    a.clone().lu().determinant()
}

/// log |det A| via the LU diagonal, stable when the determinant itself
/// would over- or underflow.
pub fn log_abs_det(a: &CMatrix) -> Result<f64, LinalgError> {
    let lu = a.clone().lu();
    let u = lu.u();
    let mut s = 0.0;
    for i in 0..u.nrows() {
        let d = u[(i, i)].norm();
        if d == 0.0 {
            return Err(LinalgError::Singular("log_abs_det"));
        }
        s += d.ln();
    }
    Ok(s)
}

/// Solve A x = b via LU.
pub fn solve(a: &CMatrix, b: &CVector) -> Result<CVector, LinalgError> {
    a.clone().lu().solve(b).ok_or(LinalgError::Singular("solve"))
}

/// Solve A X = B column-wise via one LU factorization.
pub fn solve_matrix(a: &CMatrix, b: &CMatrix) -> Result<CMatrix, LinalgError> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or(LinalgError::Singular("solve_matrix"))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = h.clone().symmetric_eigenvalues().iter().cloned().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

/// Turn a square complex Gaussian matrix into a Haar-distributed unitary:
/// QR factorization followed by the diagonal phase fix U = Q diag(r_jj/|r_jj|),
/// which removes the sign ambiguity that would otherwise bias Q.
pub fn qr_haar_fix(g: CMatrix) -> CMatrix {
    let n = g.nrows();
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}
