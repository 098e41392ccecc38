use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("time {t} outside the schedule window [{lo}, {hi}]")]
    Domain { t: f64, lo: f64, hi: f64 },

    #[error("singular schedule: {0}")]
    SingularSchedule(String),

    #[error("integration accuracy: {0}")]
    IntegrationAccuracy(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Range(_) => 2,
            _ => 1,
        }
    }
}
