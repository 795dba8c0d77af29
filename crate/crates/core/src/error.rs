use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the verification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("entity surface form {0:?} is empty after normalization")]
    Normalization(String),

    #[error("confidence {0} is outside [0, 1]")]
    Confidence(f64),

    #[error("malformed claim directive on line {line}: {reason}")]
    MalformedDirective { line: usize, reason: String },

    #[error("{source_name}:{line}: {message}")]
    Format {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Parse(#[from] crate::logic::ParseError),

    #[error("rule is not range-restricted: {0}")]
    UnsafeRule(String),

    #[error("forward chaining exceeded the cap of {cap} inferred edges")]
    FixpointBudgetExceeded { cap: usize },

    #[error("fusion input {name} = {value} is outside [0, 1]")]
    InputOutOfRange { name: &'static str, value: f64 },

    #[error("invalid fusion weights: {0}")]
    InvalidWeights(String),

    #[error("degenerate training data: {0}")]
    DegenerateData(String),

    #[error("generator unavailable: {0}")]
    GeneratorUnavailable(String),

    #[error("no valid substitute object for predicate {0}")]
    InsufficientEntities(String),

    #[error("metric {0} is undefined: its denominator is zero")]
    UndefinedMetric(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed document: {0}")]
    Document(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn format(source_name: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
