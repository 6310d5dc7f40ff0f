use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("frequencies or polynomials refer to different symbol bases")]
    BasisMismatch,

    #[error("invalid symbol basis: {0}")]
    InvalidBasis(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("operation requires a nonempty {0}")]
    Empty(&'static str),

    #[error("{what} index {index} out of range (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("frequency collision: {0}")]
    FrequencyCollision(String),

    #[error("support cap exceeded: {requested} terms requested, cap is {cap}")]
    SupportCap { requested: usize, cap: usize },

    #[error("torus dimension {dim} too large for tensor quadrature (max {max})")]
    TensorDimension { dim: usize, max: usize },

    #[error("integrand produced a non-finite value")]
    NonFinite,

    #[error("integer exponent does not fit in 64 bits")]
    ExponentOverflow,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("hypothesis check failed: {0}")]
    Hypothesis(String),

    #[error("integration failure: {0}")]
    Integration(String),

    #[error("budget exhausted: {0}")]
    Budget(String),

    #[error("config error: {0}")]
    Config(String),

    /// An exactly computed invariant failed; indicates a bug.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}
