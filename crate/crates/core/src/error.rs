use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("solver did not converge (best residual {residual:.3e} after {iterations} iterations)")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by out-of-domain or malformed input, as opposed
    /// to numerical failure.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::NoConvergence { .. } | Error::Degenerate(_))
    }
}
