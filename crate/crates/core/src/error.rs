use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Input outside the domain of the operation (real spectral parameter, non-Hermitian matrix, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameter combination rejected by the hypotheses of a bound.
    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("seminorm diverges: gamma/n inconsistent with f ({0})")]
    SeminormDiverges(String),

    #[error("quadrature did not reach tolerance {target:e}: achieved {achieved:e} after {evaluations} evaluations")]
    Quadrature {
        target: f64,
        achieved: f64,
        evaluations: usize,
    },

    #[error("frequency support not resolved: need at least N = {required_n} points per axis (have {have})")]
    Nyquist { required_n: usize, have: usize },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Constraint-style failures map to exit code 1, numeric ones to 2.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. } | Error::Numeric(_) | Error::SeminormDiverges(_)
        )
    }
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Numeric(e.to_string())
    }
}
