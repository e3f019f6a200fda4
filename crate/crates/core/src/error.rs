use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coupling width {eps} outside [0, min(p, 1 - p)] for p = {p}")]
    InvalidCoupling { p: f64, eps: f64 },

    #[error("percolation parameter {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("reachable set from the source segment died out at level {level}")]
    EmptyReachable { level: usize },

    #[error("insufficient samples: gathered {got}, needed {needed}")]
    InsufficientSamples { got: usize, needed: usize },

    #[error("degenerate fit: only {usable} usable points (need at least {needed})")]
    DegenerateFit { usable: usize, needed: usize },

    #[error("no decay events observed")]
    NoDecayEvents,

    #[error("empty sample")]
    EmptySample,

    #[error("path starts below zero ({0})")]
    NegativeStart(f64),

    #[error("replicate invalidation rate {rate:.4} exceeds the allowed {max:.4}")]
    TooManyInvalid { rate: f64, max: f64 },

    #[error("fixture parse error at line {line}: {msg}")]
    Fixture { line: usize, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
