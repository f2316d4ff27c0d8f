use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain where the formula or model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("time step {dt} exceeds the stability cap; use dt <= {required}")]
    StepTooLarge { dt: f64, required: f64 },

    #[error("basis dimension {dim} exceeds the cap of {cap}")]
    SizeCap { dim: usize, cap: usize },

    #[error("eigensolver did not converge: residual {residual:e}")]
    NoConvergence { residual: f64 },

    #[error("integration accuracy lost: {0}")]
    Accuracy(String),

    /// Configuration problems carry the offending key so the CLI can name it.
    #[error("config error in key `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("non-finite value in series `{series}` at index {index}")]
    NonFinite { series: String, index: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
