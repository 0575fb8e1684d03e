use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid `{field}`: {message}")]
    Semantic { field: String, message: String },

    #[error("I/O error: {0}")]
    Io(String),

    #[error(transparent)]
    Engine(#[from] schottky_core::Error),

    /// A computation finished but did not certify; outputs were written.
    #[error("certificate failure: {0}")]
    Certificate(String),
}

/// Machine-readable error line written to stderr.
#[derive(Debug, Serialize)]
pub struct ErrorRecord<'a> {
    pub error: &'a str,
    pub subcommand: &'a str,
    pub message: String,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Semantic { .. } => "semantic",
            CliError::Io(_) => "io",
            CliError::Engine(_) => "engine",
            CliError::Certificate(_) => "certificate",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Semantic { .. } => 2,
            CliError::Io(_) => 3,
            CliError::Engine(_) => 4,
            CliError::Certificate(_) => 5,
        }
    }

    pub fn record(&self, subcommand: &str) -> String {
        let rec = ErrorRecord {
            error: self.kind(),
            subcommand,
            message: self.to_string(),
        };
        serde_json::to_string(&rec).expect("record serialises")
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
