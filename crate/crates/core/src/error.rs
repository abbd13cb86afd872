use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Point evaluation landed on a jump set or singular point; the caller
    /// has to use one-sided traces instead.
    #[error("ambiguous evaluation at ({x:.6e}, {y:.6e}): point lies on the jump set")]
    OnJumpSet { x: f64, y: f64 },

    #[error("point ({x:.6e}, {y:.6e}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("trajectory exceeded {0} events")]
    Runaway(usize),

    #[error("empty sample: {0}")]
    Empty(String),

    #[error("curve spec: {0}")]
    CurveSpec(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
