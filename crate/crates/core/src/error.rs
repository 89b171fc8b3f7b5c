use alloc::string::String;

/// Errors reported by the abstraction pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A precondition on an argument does not hold.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A configured resource limit would be exceeded.
    #[error("capacity exceeded: {what} needs more than {limit} entries{hint}")]
    Capacity {
        what: String,
        limit: usize,
        hint: &'static str,
    },
    /// Text could not be interpreted with the given alphabet.
    #[error("cannot parse {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
