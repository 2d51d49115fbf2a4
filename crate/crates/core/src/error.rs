use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("unsupported form: {0}")]
    UnsupportedForm(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// The Newton Jacobian became numerically singular.
    #[error("singular jacobian: {0}")]
    Singular(String),

    #[error("certification failed at check {check}, index {index}: {detail}")]
    CertificationFailed {
        check: String,
        index: usize,
        detail: String,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
