use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} index {index} out of range 1..={max}")]
    Index {
        what: &'static str,
        index: usize,
        max: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: field `{field}` {reason}")]
    Config { field: &'static str, reason: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("collusion attack undefined: trace has no eavesdropper rows")]
    AttackUndefined,

    #[error("correlation undefined: {0} has zero variance")]
    UndefinedCorrelation(&'static str),

    #[error("sequences not aligned: {left} vs {right} samples")]
    Alignment { left: usize, right: usize },

    #[error("degenerate entropy: input sequence is constant")]
    DegenerateEntropy,

    #[error("{test}: sequence of {got} bits is shorter than the required {needed}")]
    Length {
        test: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Fails with [`Error::Alignment`] unless the two lengths match.
pub(crate) fn check_aligned(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::Alignment { left, right });
    }
    Ok(())
}
