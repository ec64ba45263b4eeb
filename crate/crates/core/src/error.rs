use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument is outside the domain where the operation (or the result behind it) applies.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A certified comparison came out the wrong way. Every such check encodes a
    /// proven inequality, so this means either a bug or a false published bound.
    #[error("inequality falsified: {0}")]
    Falsified(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("precision cap of {cap} bits reached: {what}")]
    PrecisionCap { cap: u32, what: String },

    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// Exact arithmetic produced something structurally impossible
    /// (e.g. a non-vanishing low-order remainder coefficient).
    #[error("internal consistency violation: {0}")]
    Consistency(String),
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
