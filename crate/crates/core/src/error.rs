use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// One message per violated field invariant.
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("delay buffer too large: {n_tau} steps exceeds the limit of {max}")]
    DelayBufferTooLarge { n_tau: usize, max: usize },

    #[error("initial data does not match the grid: {0}")]
    InitShape(String),

    #[error("energy identity needs at least 3 samples, got {0}")]
    WindowTooShort(usize),

    #[error("energy reached zero/negative; fit undefined")]
    NonPositiveEnergy,

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("eigen oracle not converged: h gives {coarse}, h/2 gives {fine}")]
    EigenNotConverged { coarse: f64, fine: f64 },

    #[error("incomplete root capture: winding count {winding}, roots found {found}")]
    IncompleteRootCapture { winding: i64, found: usize },

    #[error("cross-validation failed: {0}")]
    CrossValidation(String),
}
