//! Error and warning types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parametric drive unstable: |lambda| = {lambda:.6e} >= delta_c = {delta_c:.6e}")]
    Instability { lambda: f64, delta_c: f64 },

    #[error("operator not Hermitian within {tol:.1e}: max|A - A^dag| = {defect:.3e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("non-finite entries in operator or state")]
    NonFinite,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "integration failure at t = {t:.6e}: step size {h:.3e} underflowed \
         (err = {err:.3e}, tolerance {rtol:.1e})"
    )]
    Integration { t: f64, h: f64, err: f64, rtol: f64 },

    #[error("state positivity violated at t = {t:.6e}: min eigenvalue {min_eig:.3e}")]
    Positivity { t: f64, min_eig: f64 },

    #[error(
        "steady state not unique: smallest |eigenvalues| of the Liouvillian are {evals:?}"
    )]
    DegenerateSteadyState { evals: Vec<f64> },

    #[error("Fock cutoff insufficient: tail mass {tail:.3e} exceeds {limit:.1e}")]
    CutoffInsufficient { tail: f64, limit: f64 },

    #[error("evolution invariant violated: {0}")]
    InvariantViolated(String),

    #[error("linear algebra backend error: {0}")]
    Linalg(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Non-fatal diagnostics surfaced to callers (and ultimately to run manifests).
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Squeezed-state support is too close to the truncation boundary.
    CutoffTail { tail: f64, limit: f64 },
    /// Correlation function had not decayed to the target ratio at t_max.
    CorrelationNotDecayed { achieved: f64, target: f64 },
    /// Wigner grid too coarse for the normalization check.
    WignerNormalization { integral: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::CutoffTail { tail, limit } => write!(
                f,
                "squeeze-unitary tail mass {tail:.3e} exceeds {limit:.1e}; escalate the Fock cutoff"
            ),
            Warning::CorrelationNotDecayed { achieved, target } => write!(
                f,
                "correlation decayed to {achieved:.3e} of its initial value at t_max (target {target:.1e})"
            ),
            Warning::WignerNormalization { integral } => write!(
                f,
                "Wigner grid integral {integral:.4} deviates from 1 by more than 1e-2; grid too coarse or too small"
            ),
        }
    }
}
