use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = SmiError> = std::result::Result<T, E>;

/// Every failure the engine can report.
///
/// Input and configuration problems are separated from numerical failures so
/// that drivers can map them onto different exit codes (see
/// [`SmiError::is_numerical`]).
#[derive(Debug, Error)]
pub enum SmiError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed CSV: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("{path}, row {row}: {message}")]
    Row {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("{path}: duplicate indicator id `{id}` on rows {first_row} and {second_row}")]
    DuplicateIndicator {
        path: PathBuf,
        id: String,
        first_row: usize,
        second_row: usize,
    },

    #[error("{path}: duplicate state `{state}` on rows {first_row} and {second_row}")]
    DuplicateState {
        path: PathBuf,
        state: String,
        first_row: usize,
        second_row: usize,
    },

    #[error("{path}: header does not match the indicator registry (missing: [{}]; unexpected: [{}]{})",
        missing.join(", "), extra.join(", "),
        if *out_of_order { "; columns out of registry order" } else { "" })]
    HeaderMismatch {
        path: PathBuf,
        missing: Vec<String>,
        extra: Vec<String>,
        out_of_order: bool,
    },

    #[error("{path}: non-numeric or non-finite cells: {}", cells.iter().map(|c| format!("({}, {}) = {:?}", c.state, c.indicator, c.raw)).collect::<Vec<_>>().join("; "))]
    BadCells { path: PathBuf, cells: Vec<BadCell> },

    #[error("at least {required} {what} required, found {found}")]
    TooFew {
        what: &'static str,
        required: usize,
        found: usize,
    },

    #[error("indicator `{indicator}` is constant (min = max = {value}); min-max normalization is undefined")]
    DegenerateColumn { indicator: String, value: f64 },

    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("total weight is zero; the composite index is undefined")]
    ZeroTotalWeight,
}

/// One unparseable observation cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BadCell {
    pub state: String,
    pub indicator: String,
    pub raw: String,
}

impl SmiError {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SmiError::NoConvergence { .. } | SmiError::ZeroTotalWeight
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SmiError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        SmiError::Csv {
            path: path.into(),
            source,
        }
    }
}
