use thiserror::Error;

/// Errors raised by the complex, decomposition, intersection and overlay routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("integer overflow in chain arithmetic")]
    Overflow,

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid cell name {0:?}")]
    InvalidName(String),

    #[error("duplicate cell {name:?} in dimension {dim}")]
    DuplicateCell { dim: usize, name: String },

    #[error("unknown cell {name:?} in dimension {dim}")]
    UnknownCell { dim: usize, name: String },

    #[error("zero coefficient for ({row}, {col})")]
    ZeroEntry { row: String, col: String },

    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("edge {0:?} has identical boundary vertices")]
    LoopEdge(String),

    #[error("{0}")]
    Precondition(String),

    #[error("singular system")]
    Singular,

    #[error("degenerate intersection: {0}")]
    DegenerateIntersection(String),

    #[error("point lies on a simplex boundary")]
    BoundaryPoint,

    #[error("ambiguous vertex identification near {0:?}")]
    AmbiguousMerge(Vec<f64>),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn checked_add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(Error::Overflow)
}

pub(crate) fn checked_mul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b).ok_or(Error::Overflow)
}
