use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NonHermitianInput(f64),

    #[error("negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("tensor dimension {dim} exceeds cap {cap}")]
    DimensionCapExceeded { dim: usize, cap: usize },

    #[error("matrix is not positive semi-definite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("trace is not 1 (got {0})")]
    TraceNotOne(f64),

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("probability vector is not normalized (sum {0})")]
    NotNormalized(f64),

    #[error("priors must be positive and sum to 1 (got {0}, {1})")]
    InvalidPriors(f64, f64),

    #[error("hypotheses are orthogonal")]
    OrthogonalHypotheses,

    #[error("state is not faithful (full rank required)")]
    NotFaithful,

    #[error("interpolation parameter {0} outside (0, 1)")]
    SOutOfRange(f64),

    #[error("r = {r} lies in the infinite-exponent region r < {threshold}")]
    InfiniteExponentRegion { r: f64, threshold: f64 },

    #[error("support of size {size} exceeds the type-class limit {max}")]
    SupportTooLarge { size: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what}: independent routes disagree by {deviation:e}")]
    ConsistencyCheck { what: &'static str, deviation: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
