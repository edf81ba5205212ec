use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by how the CLI maps them to exit codes: validation
/// problems (bad values, malformed files, unusable configuration) exit with
/// code 1, while I/O and remote-routing failures exit with code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// A structurally bad record in a data file. `row` is the 1-based data
    /// row index (the header is row 0).
    #[error("{}: row {row}: {msg}", path.display())]
    Malformed {
        path: PathBuf,
        row: usize,
        msg: String,
    },

    #[error("calibration error: {0}")]
    Calibration(String),

    /// AAM cannot serve this trip (origin and destination resolve to the
    /// same hub, so the air segment has zero length).
    #[error("AAM infeasible: {0}")]
    Infeasible(String),

    #[error("routing error: {0}")]
    Routing(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Wraps a failure with the identity of the trip being evaluated.
    #[error("trip {origin} -> {dest}: {source}")]
    Trip {
        origin: String,
        dest: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Process exit code for the CLI: 1 for validation problems, 2 for I/O
    /// and routing failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::Config(_)
            | Error::Malformed { .. }
            | Error::Calibration(_)
            | Error::Infeasible(_) => 1,
            Error::Routing(_) | Error::Io { .. } => 2,
            Error::Trip { source, .. } => source.exit_code(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: impl Into<PathBuf>, row: usize, msg: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            row,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
