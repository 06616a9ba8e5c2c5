use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A finite computation overflowed or produced NaN. Distinct from a
    /// constraint violation, which is an explicit `+inf`.
    #[error("numerical blow-up in {context}: {value}")]
    NumericalBlowup { context: String, value: f64 },

    #[error("undefined extended-real operation: {0}")]
    UndefinedArithmetic(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty sample set: {0}")]
    EmptySamples(String),

    #[error("point {point:?} lies outside the effective domain ({context})")]
    OutsideDomain { point: Vec<f64>, context: String },

    /// A theorem or calculus rule was asked to run on inputs that do not
    /// satisfy its hypotheses.
    #[error("hypothesis not met: {0}")]
    Refused(String),

    #[error("sampling failed: {0}")]
    Sampling(String),
}

impl Error {
    pub fn refused(msg: impl Into<String>) -> Self {
        Error::Refused(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn is_refusal(&self) -> bool {
        matches!(self, Error::Refused(_))
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
