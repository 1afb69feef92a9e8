use thiserror::Error;

/// Errors produced by the channel, noise, simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {got}")]
    EntryCount {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid dimension profile: {0}")]
    InvalidDimensions(String),

    #[error("matrix is not Hermitian (relative deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (relative deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.6e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("map is not completely positive (chi has eigenvalue {min_eigenvalue:.6e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("Kraus operators are not trace preserving (deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("state vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("basis is not orthonormal (deviation {deviation:.3e})")]
    NonOrthonormalBasis { deviation: f64 },

    #[error(
        "trace {trace} matches neither the normalized (1) nor the canonical ({dim}) convention"
    )]
    AmbiguousTrace { trace: f64, dim: usize },

    #[error("parameter {name} = {value} is out of range: {reason}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid relaxation parameters: {0}")]
    InvalidRelaxation(String),

    #[error("unknown gate: {0}")]
    UnknownGate(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("trace drift at step {step}: trace = {trace}")]
    TraceDrift { step: usize, trace: f64 },
}

impl Error {
    /// True for failures caused by the numbers themselves (loss of complete
    /// positivity, trace drift, non-physical matrices) rather than by malformed
    /// input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian { .. }
                | Error::NotUnitary { .. }
                | Error::NotPositive { .. }
                | Error::NotCompletelyPositive { .. }
                | Error::NotTracePreserving { .. }
                | Error::TraceDrift { .. }
                | Error::NonFinite { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
