use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numerical failure: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("size limit exceeded: {0}")]
    Size(String),
    #[error("validity error: {0}")]
    Validity(String),
    #[error("spectral gap violated, eigenvalues too close to zero: {0:?}")]
    Gap(Vec<f64>),
    #[error("time outside domain: {0}")]
    Domain(String),
    #[error("window too small: captured mass {mass}")]
    WindowTooSmall { mass: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn numerical(message: impl Into<String>, residual: f64) -> Self {
        Error::Numerical {
            message: message.into(),
            residual,
        }
    }
}
