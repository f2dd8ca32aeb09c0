//! Root (psi-function) density estimator.
//!
//! The density of a sample is reconstructed as the square of a unit-norm
//! expansion in an orthonormal basis,
//!
//! ```text
//! p(x) = psi(x)^2,    psi(x) = sum_i c_i phi_i(x),    sum_i c_i^2 = 1,
//! ```
//!
//! with the coefficient vector `c` estimated by maximum likelihood. Squaring
//! guarantees a nonnegative density, and the unit-sphere geometry gives the
//! estimator closed-form Fisher information and covariance matrices, a
//! confidence cone instead of per-parameter intervals, and chi-square tests
//! for goodness of fit and two-sample homogeneity that hold in any basis.
//!
//! Modules:
//!
//! - [`numerics`]: symmetric eigensolver, chi-square distribution functions,
//!   quadrature, and a seeded random stream.
//! - [`basis`]: Chebyshev-Hermite and histogram bases, affine standardization,
//!   DFT histogram smoothing.
//! - [`solver`]: the likelihood equation as a fixed-point iteration with a
//!   stabilizing mixing parameter, plus convergence diagnostics.
//! - [`inference`]: Fisher/covariance matrices, confidence cone, chi-square
//!   criteria, and the square-root binomial normal approximation.
//! - [`selection`]: choosing the number of expansion terms by a
//!   noise-vs-truncation risk, and noise shrinkage of fitted coefficients.
//! - [`densmat`]: density matrices for pure and mixed statistical states and
//!   principal-component merging of homogeneous samples.
//! - [`baselines`]: Rosenblatt-Parzen kernel and Chentsov orthogonal-series
//!   reference estimators with the L1 discrepancy metric.
//! - [`bench`]: Monte Carlo comparison harness over Gaussian mixtures.

pub mod basis;
pub mod baselines;
pub mod bench;
pub mod densmat;
pub mod inference;
pub mod numerics;
pub mod selection;
pub mod solver;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
