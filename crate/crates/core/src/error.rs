use thiserror::Error;

/// Errors produced anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("qubit index out of range: {0}")]
    Index(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("input outside domain: {0}")]
    Domain(String),
    #[error("unsupported method: {0}")]
    UnsupportedMethod(String),
    #[error("ill-conditioned system (condition estimate {condition:.3e}): {message}")]
    Conditioning { condition: f64, message: String },
    #[error("degenerate model: {0}")]
    DegenerateModel(String),
    #[error("decomposition failed: {0}")]
    Decomposition(String),
    #[error("numerical abort at step {step}: {message}")]
    NumericalAbort {
        step: usize,
        message: String,
        trace: Option<Box<crate::train::TrainTrace>>,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag for the error family.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Capacity(_) => "capacity",
            Error::Index(_) => "index",
            Error::Validation(_) => "validation",
            Error::Shape(_) => "shape",
            Error::Domain(_) => "domain",
            Error::UnsupportedMethod(_) => "unsupported_method",
            Error::Conditioning { .. } => "conditioning",
            Error::DegenerateModel(_) => "degenerate_model",
            Error::Decomposition(_) => "decomposition",
            Error::NumericalAbort { .. } => "numerical_abort",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalAbort { .. } | Error::Conditioning { .. } | Error::Decomposition(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
