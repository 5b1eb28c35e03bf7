use thiserror::Error;

/// Errors raised by the simulators, solvers and the experiment runner.
#[derive(Debug, Error)]
pub enum SlfvError {
    /// A parameter set that can never be simulated (bad dimension, alpha out of range, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A call-site argument outside the documented domain of an operation.
    #[error("input error: {0}")]
    Input(String),

    /// An event whose ball would wrap onto itself on the torus.
    #[error("L > 4R violated: event radius {radius}, torus side {side}")]
    DomainViolation { radius: f64, side: f64 },

    /// A requested length scale below the grid resolution.
    #[error("resolution error: {0}")]
    Resolution(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SlfvError>;

pub(crate) fn config_err(msg: impl Into<String>) -> SlfvError {
    SlfvError::Config(msg.into())
}

pub(crate) fn input_err(msg: impl Into<String>) -> SlfvError {
    SlfvError::Input(msg.into())
}
