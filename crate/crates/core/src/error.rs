use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported order: {what} = {value} (supported maximum {max})")]
    UnsupportedOrder {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point outside the domain: coordinate {index} = {value} not in [{lo}, {hi}]")]
    Domain {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("node set has no lattice structure; use the dense solver instead")]
    Structure,

    #[error("ill-conditioned circulant system: minimal symbol modulus {min_modulus:e} (max {max_modulus:e})")]
    IllConditioned { min_modulus: f64, max_modulus: f64 },

    #[error("linear system residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error(
        "schedule underflow: a = {a} must exceed max(beta^(-1/q), 1/2) = {bound}; \
         M is too small for the admissible parameter schedule"
    )]
    ScheduleUnderflow { a: f64, bound: f64 },

    #[error("degenerate data: zero variance in dimension {0}")]
    DegenerateData(usize),

    #[error("unknown example mixture '{0}'")]
    UnknownExample(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
