use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("config [{section}] {key}: {reason}")]
    ConfigValue {
        section: String,
        key: String,
        reason: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Data(#[from] DataError),

    #[error("{0}")]
    Core(#[from] msvi_core::Error),

    #[error("manifest: {0}")]
    Manifest(String),
}

/// Problems in a CSV of group elements. Row numbers count data rows from 1
/// (the header is row 0).
#[derive(Debug, Error)]
pub enum DataError {
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },

    #[error("header: expected {expected:?}, found {found:?}")]
    Header { expected: String, found: String },

    #[error("row {row}: expected {expected} columns, found {found}")]
    Columns { row: usize, expected: usize, found: usize },

    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse { row: usize, column: usize, value: String },

    #[error("row {row}: rotation is not orthogonal (defect {defect:e})")]
    NonOrthogonal { row: usize, defect: f64 },

    #[error("row {row}: rotation has determinant {det} (reflection)")]
    Reflection { row: usize, det: f64 },

    #[error("row {row}: node ({j}, {a}) is outside the grid or not prescribed here")]
    UnexpectedNode { row: usize, j: usize, a: usize },

    #[error("row {row}: node ({j}, {a}) appears twice")]
    Duplicate { row: usize, j: usize, a: usize },

    #[error("missing node ({j}, {a}); expected {expected} rows, found {found}")]
    Missing { j: usize, a: usize, expected: usize, found: usize },
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

pub fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
