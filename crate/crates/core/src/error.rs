use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("numerical blow-up at step {step} (t = {time})")]
    NumericalBlowup { step: usize, time: f64 },

    #[error("no avoided crossing found: {0}")]
    NoCrossingFound(String),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("signal too weak: oscillation amplitude {amplitude:.3e}")]
    WeakSignal { amplitude: f64 },

    #[error("optimization failed after {evaluations} evaluations: {reason}")]
    OptimizationFailed {
        evaluations: usize,
        reason: String,
        log: Vec<crate::optimize::Evaluation>,
    },

    #[error("config error in [{section}]: {message}")]
    Config { section: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
