use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported problem: {0}")]
    UnsupportedProblem(String),

    #[error("insufficient data: class `{class}` has {count} samples, at least {required} required")]
    InsufficientData {
        class: String,
        count: usize,
        required: usize,
    },

    #[error("bootstrap failed to draw both classes after {attempts} attempts")]
    DegenerateBootstrap { attempts: usize },

    #[error("insufficient neighbors: requested {requested}, only {available} available")]
    InsufficientNeighbors { requested: usize, available: usize },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
