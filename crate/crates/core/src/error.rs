use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate state: agents {i} and {j} are {distance:e} apart (minimum {min_separation:e})")]
    Degenerate {
        i: usize,
        j: usize,
        distance: f64,
        min_separation: f64,
    },

    #[error("coincident points: pairwise term is undefined at zero separation")]
    CoincidentPoints,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid value for `{name}`: {reason}")]
    Invalid { name: String, reason: String },

    #[error("no equilibrium distance for non-positive preference k = {k}")]
    NoEquilibrium { k: f64 },

    #[error("inconsistent motor command: outputs sum to {sum:e}, expected 0")]
    InconsistentCommand { sum: f64 },

    #[error("step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("trajectory too short: {0}")]
    TooShort(String),

    #[error("config error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { message: String, line: Option<usize> },

    #[error("malformed trajectory file {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Broad failure class, used for process exit codes and C error codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Runtime,
    Io,
}

impl Error {
    pub fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Error::Config {
            message: message.into(),
            line: None,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Dimension { .. }
            | Error::Invalid { .. }
            | Error::NoEquilibrium { .. }
            | Error::InconsistentCommand { .. }
            | Error::Config { .. } => ErrorKind::Validation,
            Error::Degenerate { .. }
            | Error::CoincidentPoints
            | Error::Step { .. }
            | Error::EmptyTrajectory
            | Error::TooShort(_) => ErrorKind::Runtime,
            Error::Format { .. } | Error::Io { .. } => ErrorKind::Io,
        }
    }

    /// Process exit status: 1 validation, 2 runtime, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Validation => 1,
            ErrorKind::Runtime => 2,
            ErrorKind::Io => 3,
        }
    }
}
