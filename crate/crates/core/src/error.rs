use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field does not live on the expected grid")]
    GridMismatch,

    #[error("point ({0}, {1}) lies outside the grid")]
    OutOfDomain(f64, f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("Newton iteration stalled after {iterations} steps (residual {residual:.3e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    /// The solver converged, but to a field that violates a sign, ordering or
    /// symmetry property of the sought solution.
    #[error("converged to a non-physical state: {0}")]
    NonPhysical(String),

    #[error("linear solve failed: {0}")]
    Linalg(String),

    #[error("malformed field file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
