use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates a documented constraint.
    #[error("constraint violation: {0}")]
    Constraint(String),

    /// Two positions are closer than the minimum-separation guard.
    #[error("separation {separation:.3e} below guard {guard:.3e} (units of lambda0)")]
    Coincident { separation: f64, guard: f64 },

    #[error("geometry: {0}")]
    Geometry(String),

    /// Lattice sum refused or failed to converge.
    #[error("convergence: {0}")]
    Convergence(String),

    #[error("eigensolver failed on {dim}x{dim} matrix (max |entry| {max_abs:.3e}): {reason}")]
    Eigen {
        dim: usize,
        max_abs: f64,
        reason: String,
    },

    /// Wilson loop gap closing.
    #[error("gap closing: {0}")]
    GapClosing(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("png: {0}")]
    Png(String),
}

impl Error {
    /// Stable machine-readable tag used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Constraint(_) => "constraint",
            Error::Coincident { .. } => "coincident",
            Error::Geometry(_) => "geometry",
            Error::Convergence(_) => "convergence",
            Error::Eigen { .. } => "eigensolver",
            Error::GapClosing(_) => "gap_closing",
            Error::UnknownScenario(_) => "unknown_scenario",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Png(_) => "png",
        }
    }
}
