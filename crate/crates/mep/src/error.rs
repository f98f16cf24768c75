use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by plan construction, verification and analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// A plan invariant is violated. Coordinates are 0-based when present.
    #[error("invalid plan: {reason}{}", fmt_coords(.row, .col))]
    InvalidPlan {
        reason: String,
        row: Option<usize>,
        col: Option<usize>,
    },

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("duplicate {what} index {index}")]
    DuplicateIndex { what: &'static str, index: usize },

    #[error("incidence of a factor with itself is its replication vector; indices must differ")]
    SameFactor,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("level {level} of factor {factor} is unused (replication 0)")]
    UnusedLevel { factor: String, level: usize },

    #[error("{0}")]
    BadParams(String),

    #[error(
        "supersaturated replacing array: {0} (pass relax_saturation to allow an intermediate)"
    )]
    Supersaturated(String),

    #[error("unknown catalog entry {name:?}{}", .suggestion.as_ref().map(|s| format!(" (did you mean {s:?}?)")).unwrap_or_default())]
    UnknownEntry {
        name: String,
        suggestion: Option<String>,
    },

    #[error("factor {factor} is not connected (rank {rank}, need {expected})")]
    NotConnected {
        factor: String,
        rank: usize,
        expected: usize,
    },

    #[error("integer overflow in exact arithmetic")]
    Overflow,

    #[error("dataset does not match plan: {0}")]
    DataMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error("search exhausted without a solution: {0}")]
    SearchExhausted(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn fmt_coords(row: &Option<usize>, col: &Option<usize>) -> String {
    match (row, col) {
        (Some(r), Some(c)) => format!(" (row {r}, column {c})"),
        (Some(r), None) => format!(" (row {r})"),
        (None, Some(c)) => format!(" (column {c})"),
        (None, None) => String::new(),
    }
}
