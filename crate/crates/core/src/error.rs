use thiserror::Error;

/// Errors raised by kernel evaluation, the saddle-point solver and the
/// recovery pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid kernel parameters: {0}")]
    InvalidKernel(String),

    #[error("{what} is not implemented for polyharmonic exponent s = {s}")]
    UnsupportedDerivative { what: &'static str, s: f64 },

    #[error("kernel derivative is singular at coincident points for s = {s}")]
    Singular { s: f64 },

    #[error("kernel of exponent s = {s} is not conditionally positive definite for polynomial order q = {q} (need q >= {min_q})")]
    IncompatibleOrder { s: f64, q: usize, min_q: usize },

    #[error("functional {functional} not polynomially consistent on {nodes} (residual {residual:.3e})")]
    Inconsistent {
        functional: String,
        nodes: String,
        residual: f64,
    },

    #[error("reduced matrix M^T A M is numerically singular (rcond {rcond:.3e}); A is not definite on N(B^T)")]
    NotDefinite { rcond: f64 },

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("weights violate polynomial exactness (residual {residual:.3e})")]
    NotExact { residual: f64 },

    #[error("normal vector is not unit length (norm {norm})")]
    NonUnitNormal { norm: f64 },

    #[error("degenerate node set: {0}")]
    Degenerate(String),

    #[error("invalid node set: {0}")]
    InvalidNodes(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
