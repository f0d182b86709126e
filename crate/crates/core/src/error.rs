use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid automorphism: {0}")]
    InvalidAutomorphism(String),
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(u8, u8),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
