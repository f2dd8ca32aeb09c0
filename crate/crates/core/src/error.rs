use thiserror::Error;

/// Errors reported by the estimator library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument violated a precondition (non-symmetric matrix, parameter
    /// out of range, too few points, ...).
    #[error("rejected input: {0}")]
    RejectedInput(String),

    /// A sample carries no usable scale information (all points equal).
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// A function produced a non-finite value during quadrature.
    #[error("non-finite value of {what} at x = {at}")]
    NonFinite { what: String, at: f64 },

    /// An iteration cannot contract (lambda_min <= 0).
    #[error("non-contracting iteration: lambda_min = {0}")]
    NonContracting(f64),

    /// Spectrum truncation removed every component.
    #[error("degenerate smoothing: all spectral components removed")]
    DegenerateSmoothing,

    /// Two states do not share a basis (kind, order, edges or affine differ).
    #[error("incompatible states: {0}")]
    IncompatibleStates(String),

    /// A matrix fails the density-matrix conditions.
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    /// The two leading weights of a density matrix coincide, so no principal
    /// component is distinguished.
    #[error("ambiguous principal component: leading weights differ by {0:e}")]
    PrincipalComponentTie(f64),

    /// The eigensolver failed to reduce the off-diagonal norm.
    #[error("eigensolver did not converge within {0} sweeps")]
    EigenNoConvergence(usize),
}
