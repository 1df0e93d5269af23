use thiserror::Error;

/// Errors raised anywhere in the crate.
///
/// [`Error::is_domain_rejection`] separates impossibility results (a
/// disconnected network, a scheme that cannot exist) from malformed input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("outcome {outcome} on site {site} has zero probability")]
    ZeroNormBranch { site: usize, outcome: usize },
    #[error("site {0} is entangled with the rest of the register")]
    EntangledSite(usize),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("graph is disconnected; no spanning tree exists")]
    NoSpanningTree,
    #[error("{what} is limited to {limit}, got {got}")]
    LimitExceeded {
        what: &'static str,
        limit: usize,
        got: usize,
    },
    #[error("no protocol exists: {0}")]
    NoProtocol(String),
    #[error("no scheme exists: {0}")]
    NoScheme(String),
    #[error("scheme constraint violated: {0}")]
    Constraint(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal check failed: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for impossibility results rather than bad input or IO failures.
    pub fn is_domain_rejection(&self) -> bool {
        matches!(
            self,
            Error::NoSpanningTree | Error::NoProtocol(_) | Error::NoScheme(_) | Error::Constraint(_)
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
