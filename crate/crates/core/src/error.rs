use thiserror::Error;

/// Errors raised by heatlab computations.
#[derive(Debug, Error)]
pub enum HeatlabError {
    #[error("unsupported group descriptor: {0}")]
    UnsupportedGroup(String),

    #[error("operation `{op}` is not available for group {group}: {reason}")]
    Unsupported {
        op: &'static str,
        group: String,
        reason: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource cap exceeded: {what} needs {needed}, limit is {limit}")]
    ResourceCap {
        what: &'static str,
        needed: usize,
        limit: usize,
    },

    #[error("heat kernel truncation too aggressive: value {value:e} at a node is not positive")]
    Positivity { value: f64 },

    #[error("character series does not settle within {cap} terms (|Im| too large for the cutoff)")]
    SeriesDivergence { cap: usize },

    #[error("internal consistency failure in {what}: {lhs:e} vs {rhs:e}")]
    Consistency {
        what: &'static str,
        lhs: f64,
        rhs: f64,
    },

    #[error("tensor functional violates the enveloping-algebra relations (residual {residual:e})")]
    IdealViolation { residual: f64 },

    #[error("least-squares inversion did not reach the residual floor: {residual:e} after cutoff {cutoff}")]
    ResidualFloor { residual: f64, cutoff: f64 },

    #[error("truncation overflow: {0}")]
    Truncation(String),

    #[error("group invariant violated: {0}")]
    Invariant(String),

    #[error("mesh mismatch: path has {path} steps, loop has {lp}")]
    MeshMismatch { path: usize, lp: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, HeatlabError>;
