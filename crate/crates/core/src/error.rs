//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operation requires a single output neuron, network has {0}")]
    OutputNotScalar(usize),

    #[error("activation `{0}` has no Taylor coefficients; supply them explicitly")]
    MissingTaylorCoefficients(String),

    #[error("unknown activation kind `{0}`")]
    UnknownActivation(String),

    #[error("empirical measure is invalid: {0}")]
    InvalidMeasure(String),

    #[error("too few atoms: need at least {needed}, measure has {got}")]
    InsufficientAtoms { needed: usize, got: usize },

    #[error("outer weight of neuron {neuron} is {value:.3e}, inside the deactivation margin {margin:.3e}")]
    OutsideEfficientMargin {
        neuron: usize,
        value: f64,
        margin: f64,
    },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("linear algebra failure: {0}")]
    Linalg(&'static str),

    #[error("rank verification failed after {attempts} attempts; singular values {singular_values:?}")]
    RankVerificationFailed {
        attempts: usize,
        singular_values: Vec<f64>,
    },

    #[error("probe budget exhausted: {0}")]
    ProbeBudgetExhausted(String),

    #[error("parse error in {file} line {line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("malformed network file: field `{field}`: {message}")]
    MalformedNetwork { field: &'static str, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by files and encodings rather than by the
    /// mathematical contract of an operation.
    pub fn is_io_or_parse(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::Json(_)
                | Error::Parse { .. }
                | Error::MalformedNetwork { .. }
                | Error::UnknownActivation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
