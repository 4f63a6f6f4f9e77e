use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("cutoff too small: {context} needs cutoff at least {needed}")]
    CutoffTooSmall { needed: usize, context: String },
    #[error("product leaves the truncated space: {0}")]
    OutsideTruncation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
