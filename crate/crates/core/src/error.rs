use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter or argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An enumeration or truncation would exceed its configured size cap.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// A sampler state broke one of its structural invariants.
    #[error("state invariant violated: {0}")]
    Invariant(String),

    /// The operation needs a closed-form quantity the prior does not provide.
    #[error("unsupported prior: {0}")]
    UnsupportedPrior(String),

    /// The slice sampler needed more than `cap` realized components.
    #[error("slice truncation overflow: more than {cap} components required")]
    TruncationOverflow { cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
