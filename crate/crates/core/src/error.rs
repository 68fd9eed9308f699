use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid: block count {blocks} does not divide fine size {fine}")]
    NonDivisibleGrid { fine: usize, blocks: usize },

    #[error("{value} is not a node of a grid with mesh {mesh}")]
    NotANode { value: f64, mesh: f64 },

    #[error("degenerate path: {0}")]
    DegeneratePath(String),

    #[error("circulant embedding of size {size} has negative eigenvalue {min_eigenvalue}")]
    EmbeddingFailed { size: usize, min_eigenvalue: f64 },

    #[error("solution exceeded 1e12 in magnitude at step {index}")]
    BlowUp { index: usize },

    #[error("order estimate undefined: {0}")]
    OrderUndefined(String),

    #[error("drift attestation missing: {0}")]
    NotAttested(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
