use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("scalar {0} has negative valuation; no residue in F_p")]
    NegativeValuation(String),
    #[error("digit expansion of zero is empty")]
    ZeroInput,
    #[error("vector {0} does not have norm 1")]
    NormNotOne(String),
    #[error("zero vector in an orthogonality test")]
    ZeroVector,
    #[error("input vectors are linearly dependent")]
    DependentInput,
    #[error("lattice of rank {rank} in dimension {dim} is not full rank")]
    NotFullRank { rank: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("dataset is empty or has only zero vectors")]
    EmptyData,
    #[error("bad index subset: {0}")]
    BadSubset(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("operation requires dimension {expected}, found {found}")]
    WrongDimension { expected: usize, found: usize },
    #[error("corner fit for subset {subset} did not stabilize up to M = {bound}")]
    NonStabilizing { subset: String, bound: i64 },
    #[error("precision {precision} cannot resolve tail point {target} (censoring bound {bound})")]
    PrecisionTooLow {
        precision: u32,
        target: i64,
        bound: i64,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    /// True for malformed input, false for domain failures.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. })
    }
}
