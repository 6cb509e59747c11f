use thiserror::Error;

/// Errors raised by the solver and the analysis toolbox.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerically singular matrix: pivot magnitude {pivot:.3e} at row {row}")]
    Singular { pivot: f64, row: usize },
    #[error("gram matrix `{tag}` is not positive definite")]
    Indefinite { tag: String },
    #[error("unknown proposition id `{id}`; supported ids: {supported}")]
    UnknownProposition { id: String, supported: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
