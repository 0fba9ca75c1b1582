use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("ingestion error{}: {message}", location(*row, column.as_deref()))]
    Ingest {
        row: Option<usize>,
        column: Option<String>,
        message: String,
    },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("external solver error: {message}\n{output}")]
    Adapter { message: String, output: String },

    #[error("missing credentials: {0}")]
    Credentials(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn location(row: Option<usize>, column: Option<&str>) -> String {
    match (row, column) {
        (Some(r), Some(c)) => format!(" at row {r}, column `{c}`"),
        (Some(r), None) => format!(" at row {r}"),
        (None, Some(c)) => format!(" in column `{c}`"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { field: field.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
