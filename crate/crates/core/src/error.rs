use std::path::Path;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A scenario or module parameter violated one of its invariants.
    #[error("configuration error: {field}: {message}")]
    Config { field: String, message: String },

    /// Bad input handed to an operation (unsorted series, out-of-range value, ...).
    #[error("input error: {0}")]
    Input(String),

    /// Scenario text could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The curtain device rejected a command.
    #[error("device error: {0}")]
    Device(String),

    /// A wire-protocol line was malformed or arrived in the wrong session state.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// File or socket I/O failure, with the path or endpoint that caused it.
    #[error("i/o error: {context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        Error::Io {
            context: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
