use alloc::string::String;

/// Errors raised by the numerical kernel.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("matrix must be square, got {nrows}x{ncols}")]
    NotSquare { nrows: usize, ncols: usize },
    #[error("index ({row}, {col}) out of range for {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
    #[error("dimension {dim} overflows the platform index range")]
    Overflow { dim: u128 },
    #[error("dense operation on dimension {dim} exceeds the configured cap {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },
    #[error("matrix-exponential action did not converge (error estimate {estimate:.3e})")]
    ExpmvNoConvergence { estimate: f64 },
    #[error("shifted matrix is singular or nearly so (condition estimate {condition:.3e})")]
    Singular { condition: f64 },
    #[error("iterative solver did not converge (relative residual {residual:.3e})")]
    SolverNoConvergence { residual: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown layout slot `{0}`")]
    UnknownSlot(String),
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
