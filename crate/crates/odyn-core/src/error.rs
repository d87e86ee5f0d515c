use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text (edge lists, profile files).
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Structurally invalid graph or profile.
    #[error("{0}")]
    Invalid(String),

    /// An argument violated a documented precondition.
    #[error("{0}")]
    Contract(String),

    /// The linear solver could not produce a usable factorization or the
    /// residual check failed afterwards.
    #[error("linear solve failed: {0}")]
    Solver(String),

    /// Exhaustive search was asked to enumerate too many assignments.
    #[error("exhaustive search refused: {count} endpoint assignments exceed the limit of {limit}")]
    Oversized { count: u128, limit: u128 },

    /// A Monte-Carlo walk hit the hard step cap without being absorbed.
    #[error("monte-carlo walk exceeded {cap} steps without absorbing")]
    WalkCap { cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
