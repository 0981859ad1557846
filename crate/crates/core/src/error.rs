use thiserror::Error;

/// Error kinds, grouped by how callers are expected to react: bad input,
/// a violated operation contract, a refused exhaustive search, or a failed
/// re-certification of a claimed result.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("certification failure: {0}")]
    Certification(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub fn certification(msg: impl Into<String>) -> Self {
        Error::Certification(msg.into())
    }
}
