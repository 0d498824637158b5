use thiserror::Error;

/// Errors raised when a contract of the simulation library is violated.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("path dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("state norm {0} exceeds 1")]
    NormExceeded(f64),

    #[error("matrix is not unitary (max deviation of M^dagger M from I: {0:e})")]
    NotUnitary(f64),

    #[error("matrix is not contractive (largest singular value {0})")]
    NotContractive(f64),

    #[error("{name} = {value} outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("negative probability {0}")]
    NegativeProbability(f64),

    #[error("distribution is not normalized (sum = {0})")]
    Unnormalized(f64),

    #[error("labels and probabilities differ in length ({labels} vs {probs})")]
    LabelMismatch { labels: usize, probs: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("estimation failed: {0}")]
    Estimation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn out_of_range(name: &'static str, value: f64, min: f64, max: f64) -> Self {
        Error::OutOfRange {
            name,
            value,
            min,
            max,
        }
    }
}
