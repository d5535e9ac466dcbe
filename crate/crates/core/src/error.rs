use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the analytics pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Record { line: u64, message: String },

    #[error("input is not sorted by timestamp at line {line} (set the resort flag to accept unsorted input)")]
    Unsorted { line: u64 },

    #[error("missing column `{0}` in header")]
    MissingColumn(String),

    #[error("non-trading day {0}")]
    NonTradingDay(chrono::NaiveDate),

    #[error("invalid calendar: {0}")]
    Calendar(String),

    #[error("invalid fee schedule: {0}")]
    FeeSchedule(String),

    #[error("cannot close out {investor}/{stock}: no period-end price")]
    CannotCloseOut { investor: String, stock: String },

    #[error("insufficient tape for {stock}: need {needed} timestamps, have {available}")]
    InsufficientTape {
        stock: String,
        needed: usize,
        available: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn record(line: u64, message: impl Into<String>) -> Self {
        Error::Record {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Non-fatal finding reported alongside a stage's output.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub stage: &'static str,
    pub line: Option<u64>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(stage: &'static str, message: impl Into<String>) -> Self {
        Self {
            stage,
            line: None,
            message: message.into(),
        }
    }

    pub fn at_line(stage: &'static str, line: u64, message: impl Into<String>) -> Self {
        Self {
            stage,
            line: Some(line),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(line) => write!(f, "[{}] line {}: {}", self.stage, line, self.message),
            None => write!(f, "[{}] {}", self.stage, self.message),
        }
    }
}
