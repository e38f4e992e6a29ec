use thiserror::Error;

/// Failure modes shared by every layer of the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The operands are outside the mathematical domain of the operation
    /// (inverting zero, a non-primitive direction, repeated nodes, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A truncated computation cannot certify its answer at the working precision.
    #[error("precision error: {0}")]
    Precision(String),
    /// The requested enumeration or search exceeds the configured budget.
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// An exact identity that must hold by construction failed.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("Eisenstein hypothesis fails at coefficient {index}: {reason}")]
    NotEisenstein { index: usize, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn is_precision(&self) -> bool {
        matches!(self, Error::Precision(_))
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget(_))
    }
}
