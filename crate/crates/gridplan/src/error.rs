//! Crate-wide error type.

use thiserror::Error;

/// All failures surfaced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A file could not be parsed into the expected schema.
    #[error("schema error in {file}: {message}")]
    Schema { file: String, message: String },

    /// Domain validation failed. Every violation found is listed, not only
    /// the first.
    #[error("validation failed:\n{}", .0.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n"))]
    Validation(Vec<String>),

    /// An enumeration or model-size guard tripped.
    #[error("size guard exceeded for {what}: {size} > cap {cap}")]
    SizeGuard {
        what: String,
        size: usize,
        cap: usize,
    },

    /// Model construction error (duplicate names, unknown variables, ...).
    #[error("model error: {0}")]
    Model(String),

    /// MPS text could not be parsed.
    #[error("MPS parse error at line {line}: {message}")]
    MpsParse { line: usize, message: String },

    /// A solver failed, returned an unusable status, or produced a solution
    /// that fails integrality validation.
    #[error("solver error: {0}")]
    Solver(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn schema(file: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            file: file.into(),
            message: message.into(),
        }
    }

    /// Process exit code for the CLI: 2 validation, 3 solver, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema { .. } | Error::Validation(_) | Error::SizeGuard { .. } => 2,
            Error::Model(_) | Error::MpsParse { .. } | Error::Solver(_) => 3,
            Error::Io { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
