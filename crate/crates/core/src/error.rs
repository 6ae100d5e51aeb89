use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("support overflow: {0}")]
    SupportOverflow(String),

    #[error("resolution too coarse: derivative order {order} needs res > {}, got {res}", 2 * order)]
    ResolutionTooCoarse { order: usize, res: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid function: {0}")]
    InvalidGrid(String),

    #[error("invalid Young function: {0}")]
    InvalidYoung(String),

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error("infeasible exponents: {0}")]
    InfeasibleExponents(String),

    #[error("hypothesis failure [{clause}]: {detail}")]
    Hypothesis { clause: String, detail: String },

    #[error("exponent balance violated: {0}")]
    ExponentBalance(String),

    /// A right-hand norm vanished while the left-hand norm did not; this cannot
    /// happen for valid space pairs and indicates a bug upstream.
    #[error("internal inconsistency: {0}")]
    BugSentinel(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }
}
