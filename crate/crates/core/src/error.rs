use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mode index {index} out of range for a space with {count} modes")]
    ModeIndex { index: usize, count: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("occupation {occupation} of mode {mode} exceeds truncation dim {dim}")]
    Occupation { mode: usize, occupation: usize, dim: usize },

    #[error("invalid space: {0}")]
    Space(String),

    #[error("partial trace needs a nonempty keep set")]
    EmptyKeep,

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("ambiguous normal-mode classification: {0}")]
    Classification(String),

    #[error("step size underflow at t = {t} us (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("positivity violation at t = {t} us: min eigenvalue {min_eigenvalue:e}")]
    Positivity { t: f64, min_eigenvalue: f64 },

    #[error("step budget of {0} exhausted")]
    StepBudget(usize),

    #[error("steady state did not converge: {0}")]
    SteadyStateConvergence(String),

    #[error("multiple steady states detected: {0}")]
    MultipleSteadyStates(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
