use thiserror::Error;

/// Errors surfaced by the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Fewer RSUs in range than a localization fix requires.
    #[error("insufficient coverage: {in_range} of {needed} required RSUs in range")]
    InsufficientCoverage { needed: usize, in_range: usize },

    /// The anchor layout does not determine a position (collinear RSUs or a
    /// numerically singular system).
    #[error("degenerate geometry: condition number {cond:.3e} exceeds {limit:.1e}")]
    DegenerateGeometry { cond: f64, limit: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// SMO ran out of its iteration budget before reaching the KKT tolerance.
    #[error("SMO did not converge after {iterations} iterations (KKT violation {violation:.3e})")]
    NonConvergence { iterations: u64, violation: f64 },

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("empty grid")]
    EmptyGrid,

    #[error("missing model: {0}")]
    MissingModel(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: String, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
