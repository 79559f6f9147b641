use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("embedding dimension {dim} too small, need at least {needed}")]
    EmbeddingTooSmall { dim: usize, needed: usize },

    #[error("inconsistent rotation spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("no period <= {p_max} found")]
    PeriodExceeds { p_max: usize },

    #[error("map is not periodic: |h^p(x) - x| = {residual:e}")]
    PeriodViolation { residual: f64 },

    #[error("balanced orbit: |sum h^i(x)| = {residual:e}")]
    BalancedOrbit { residual: f64 },

    #[error("origin is not in the convex hull (distance {distance:e})")]
    OriginNotInHull { distance: f64 },

    #[error("point set has diameter 2; no proper enclosing cap")]
    AntipodalSet,

    #[error("degenerate orbit: coincident points")]
    DegenerateOrbit,

    #[error("conjugating matrix is singular or has condition number {cond:e} > {max:e}")]
    IllConditioned { cond: f64, max: f64 },

    #[error("circle map is not a valid homeomorphism: {0}")]
    InvalidCircleMap(String),

    #[error("winding number unresolved after {samples} samples")]
    ResolutionExhausted { samples: usize },

    #[error("{solver} did not converge after {iterations} iterations (best residual {residual:e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("invalid check configuration: {0}")]
    InvalidConfig(String),

    #[error("serialization: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
