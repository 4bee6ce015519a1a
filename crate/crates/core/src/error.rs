use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size limit exceeded: {what} is {value}, maximum {max}")]
    SizeLimit {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("graph is disconnected: vertex {0} unreachable from vertex 0")]
    Disconnected(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("QL iteration did not converge for eigenvalue {index}")]
    NoConvergence { index: usize },

    #[error("conjugate gradients stalled after {iterations} iterations (relative residual {residual:e})")]
    SolverStalled { iterations: usize, residual: f64 },

    #[error(
        "quadrature tail too large: estimated defect {defect:e} exceeds tolerance {tolerance:e}"
    )]
    Quadrature { defect: f64, tolerance: f64 },

    #[error(
        "boundary layer under-resolved: estimated DtN error {estimate:e} exceeds {tolerance:e}"
    )]
    Resolution { estimate: f64, tolerance: f64 },

    #[error("cache file is corrupt: {0}")]
    CorruptCache(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of a numerical method (as opposed to bad input or IO).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::SolverStalled { .. }
                | Error::Quadrature { .. }
                | Error::Resolution { .. }
        )
    }
}
