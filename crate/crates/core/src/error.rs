/// Crate-wide error type. Invalid inputs are reported as values, never
/// panics; panics are reserved for internal invariant breaches.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("linear program: {0}")]
    Lp(String),

    #[error("witness: {0}")]
    Witness(String),

    #[error("forest: {0}")]
    Forest(String),

    #[error("bounds: {0}")]
    Bounds(String),

    #[error("experiment: {0}")]
    Experiment(String),

    #[error("serialization: {0}")]
    Serialization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }
}
