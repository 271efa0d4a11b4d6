use std::fmt;
use std::io;

/// Errors produced by parsing, validation, and numerical routines.
#[derive(Debug)]
pub enum Error {
    /// Malformed input line (bedGraph, manifest, or labels file).
    Parse {
        line: usize,
        message: String,
    },
    /// Structurally invalid data or parameter.
    InvalidInput(String),
    /// A labeled or requested sample has no data.
    MissingSample(String),
    /// Training cannot proceed, e.g. every target interval is unbounded.
    DegenerateTraining(String),
    /// Non-finite value encountered during optimization.
    Numeric {
        iteration: usize,
        message: String,
    },
    Io(io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid_input(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }

    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            Error::InvalidInput(message) => write!(f, "invalid input: {message}"),
            Error::MissingSample(sample) => write!(f, "no data for sample {sample}"),
            Error::DegenerateTraining(message) => {
                write!(f, "degenerate training problem: {message}")
            }
            Error::Numeric { iteration, message } => {
                write!(f, "numerical error at iteration {iteration}: {message}")
            }
            Error::Io(err) => write!(f, "io error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(err: io::Error) -> Self {
        Error::Io(err)
    }
}
