use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("duplicate label {0:?} in {1}")]
    DuplicateLabel(String, &'static str),

    #[error("{what}: length {found} does not match expected {expected}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("negative weight {value} at {what}")]
    NegativeWeight { what: String, value: String },

    #[error("weights of {what} sum to {sum}, expected exactly 1")]
    NotNormalized { what: String, sum: String },

    #[error("{what}: index {index} out of range for codomain of size {size}")]
    IndexOutOfRange {
        what: String,
        index: usize,
        size: usize,
    },

    #[error("empty list of random variables")]
    EmptyVariableList,

    #[error("kernels do not share a source: {0}")]
    SourceMismatch(String),

    #[error("contingency cube has zero total count")]
    ZeroTotal,

    #[error("margin {0} vanishes")]
    ZeroMargin(&'static str),

    #[error("covariance matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
