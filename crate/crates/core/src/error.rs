use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("energy hierarchy violated: {0}")]
    Hierarchy(String),

    #[error("unstable phonon mode {mode}: squared frequency {omega_sq:e} is not positive")]
    UnstableMode { mode: usize, omega_sq: f64 },

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("rate matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below tolerance {tolerance:e}")]
    InvalidChannel { eigenvalue: f64, tolerance: f64 },

    #[error("compiler did not converge after {restarts} restarts (best relative residual {best_residual:e})")]
    NoConvergence { restarts: usize, best_residual: f64 },

    #[error("sideband frequency collision: {0}")]
    FrequencyCollision(String),

    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("operator is not unitary: {0}")]
    NotUnitary(String),

    #[error("malformed lattice: {0}")]
    Lattice(String),

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
