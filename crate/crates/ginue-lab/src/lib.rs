//! Numerical laboratory for the complex Ginibre ensemble (GinUE) and its
//! relatives: elliptic, induced, spherical, truncated-unitary and product
//! ensembles.
//!
//! The crate pairs exact finite-N formulas (correlation kernels, gap and
//! counting statistics, sum rules, free energies, overlap laws) with Monte
//! Carlo sampling of the underlying random matrices, so that every closed
//! form can be cross-checked as a machine-verifiable residual.
//!
//! Conventions used throughout:
//! - A standard complex Gaussian `g` has `E|g|^2 = 1` (real and imaginary
//!   parts independent with variance 1/2 each).
//! - Unscaled (`raw`) GinUE eigenvalues fill the disk of radius `sqrt(N)`
//!   with mean density `1/pi`; `global` scaling divides by `sqrt(N)`.
//! - All randomness flows through [`rng::replica_rng`], a counter-based
//!   generator keyed by `(seed, replica, stream)`, so batch runs are
//!   reproducible independently of thread count.

pub mod cli;
pub mod counting;
pub mod kernels;
pub mod linalg;
pub mod linstats;
pub mod output;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod specfun;
pub mod stats;
