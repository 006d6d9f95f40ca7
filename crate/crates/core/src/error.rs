use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("corpus contains no tokens")]
    EmptyCorpus,
    #[error("invalid token: {0}")]
    InvalidToken(String),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("request for zero items")]
    EmptyRequest,
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),
    #[error("target {k} outside [0, {max}]")]
    InvalidTarget { k: String, max: String },
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),
    #[error("invalid prefix: {0}")]
    InvalidPrefix(String),
    #[error("sequence of length {len} shorter than n = {n}")]
    SequenceTooShort { len: usize, n: usize },
    #[error("invalid base {ch:?} at line {line}")]
    InvalidBase { ch: char, line: usize },
    #[error("fewer than two occurrences of delimiter {0:?}")]
    NoTokens(char),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("rank table is empty")]
    EmptyTable,
    #[error("{discarded} of {total} bootstrap replicates had fewer than two fit points")]
    UnstableResample { discarded: usize, total: usize },
    #[error("no FASTA records in {0}")]
    EmptyFile(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}: not valid UTF-8")]
    Encoding(PathBuf),
    #[error("tokenizer configuration differs across inputs: {0}")]
    ConfigMismatch(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

/// Coarse error classes, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorFamily {
    Io,
    Validation,
    Statistics,
}

impl Error {
    pub fn family(&self) -> ErrorFamily {
        match self {
            Error::Io { .. } | Error::Encoding(_) | Error::EmptyFile(_) => ErrorFamily::Io,
            Error::InsufficientData(_) | Error::EmptyTable | Error::UnstableResample { .. } => ErrorFamily::Statistics,
            _ => ErrorFamily::Validation,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
