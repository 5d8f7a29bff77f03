use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("topology error: {0}")]
    Topology(String),
    #[error("membership error: {0}")]
    Membership(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),
    #[error("invalid function: {}", .0.join("; "))]
    InvalidFunction(Vec<String>),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
