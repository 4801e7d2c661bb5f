use thiserror::Error;

pub type Result<T, E = ShsimError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ShsimError {
    /// Invalid or inconsistent setup: basis sizes, de-aliasing, semantic config checks.
    #[error("configuration error in `{key}`: {message}")]
    Config { key: String, message: String },

    /// Malformed config text.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} out of range: {value} not in [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },

    #[error("degenerate initial condition: Z_n(u0) vanishes for n = {n}")]
    DegenerateInitialCondition { n: usize },

    #[error("integration failed at step {step} (t = {time}): {reason}")]
    Integration {
        step: usize,
        time: f64,
        reason: String,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl ShsimError {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        ShsimError::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
