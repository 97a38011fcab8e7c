use thiserror::Error;

/// Errors raised by simulation, sampling and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    /// The protocol description is malformed or incomplete.
    #[error("specification error: {0}")]
    Spec(String),

    /// A numeric parameter lies outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A transcript or table does not have the expected length.
    #[error("shape error: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A rejection loop or walk exceeded its configured iteration cap.
    #[error("iteration cap of {cap} exceeded in {context}")]
    IterationCap { context: String, cap: u64 },

    /// An internal invariant failed. Always a bug.
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Exact enumeration would exceed the size guard.
    #[error("enumeration guard exceeded: {entries} entries > {limit}")]
    Guard { entries: u64, limit: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
