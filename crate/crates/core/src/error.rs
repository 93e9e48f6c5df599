use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MecsError {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("mode count mismatch: {left} vs {right}")]
    ModeMismatch { left: usize, right: usize },

    #[error("term {index} has {got} labels, expected {expected}")]
    LabelCount {
        index: usize,
        got: usize,
        expected: usize,
    },

    #[error("superposition has zero norm")]
    ZeroNorm,

    #[error("overlap p = {0} must lie in [0, 1]")]
    OverlapOutOfRange(f64),

    #[error("overlap p = {0} makes the two-state basis degenerate (requires p < 1)")]
    DegenerateBasis(f64),

    #[error("null state: 2 + 2 p^N cos(theta) = {0} vanishes")]
    NullState(f64),

    #[error("party count {got} is below the minimum {min}")]
    TooFewParties { got: usize, min: usize },

    #[error("party count {0} exceeds the dense-vector limit")]
    TooManyParties(usize),

    #[error("invalid split k = {k} for N = {n} (need 1 <= k <= N-1)")]
    InvalidSplit { k: usize, n: usize },

    #[error("{0}")]
    Unsupported(String),

    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("invalid outcome: {0}")]
    InvalidOutcome(String),

    #[error("truncation too small: {0}")]
    Truncation(String),
}

pub type Result<T> = std::result::Result<T, MecsError>;
