use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure mode of the library. The CLI maps these onto exit codes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An ordering or floor could not be decided at the working precision.
    #[error("precision insufficient at {bits} bits")]
    PrecisionInsufficient { bits: u32 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("radicand {0} is a perfect square; write the entry as a rational")]
    PerfectSquareRadicand(String),

    #[error("malformed entry: {0}")]
    MalformedEntry(String),

    #[error("integer vector j must be nonzero")]
    ZeroVectorJ,

    #[error("approximation function increases between q = {} and q = {q}", q - 1)]
    MonotonicityViolation { q: u64 },

    #[error("j = {j:?} makes some j·row an integer; the reciprocal sum is undefined")]
    ZeroDenominator { j: Vec<i64> },

    #[error("phi must take values in (0, 1): {0}")]
    PhiOutOfRange(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("matrix is not badly approximable: product vanishes at j = {j:?}")]
    NotBad { j: Vec<i64> },

    #[error("need at least two record minima, found {found}")]
    InsufficientRecords { found: usize },

    #[error("delta out of range: {0}")]
    DeltaOutOfRange(String),

    #[error("enumeration of {requested} points exceeds the budget of {budget}")]
    BudgetExceeded { requested: u128, budget: u64 },

    #[error("the dyadic route requires a non-increasing approximation function")]
    NonMonotonePsi,

    #[error("nu = {0} is below 1/n")]
    NuTooSmall(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn is_precision(&self) -> bool {
        matches!(self, Error::PrecisionInsufficient { .. })
    }
}
