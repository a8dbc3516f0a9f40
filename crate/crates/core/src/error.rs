use thiserror::Error;

use crate::multiindex::MultiIndex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why a vector of series has no (computable) compositional inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InversionFailure {
    /// Component `index` (0-based) has a nonzero constant term.
    UnitComponent { index: usize },
    /// The linear part at the origin has zero determinant.
    SingularJacobian,
    /// Affine inversion was requested for a component of degree > 1.
    NonAffine { index: usize },
    /// A unit vector that is not affine; no inversion procedure is known.
    NonAffineUnit,
}

impl std::fmt::Display for InversionFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InversionFailure::UnitComponent { index } => {
                write!(f, "component g{} is a unit (nonzero constant term)", index + 1)
            }
            InversionFailure::SingularJacobian => {
                write!(f, "Jacobian at the origin is singular (det = 0)")
            }
            InversionFailure::NonAffine { index } => {
                write!(f, "component g{} has total degree > 1", index + 1)
            }
            InversionFailure::NonAffineUnit => write!(
                f,
                "non-affine unit vector: inversion of general unit series is an open problem"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("truncation order mismatch: {left} vs {right}")]
    OrderMismatch { left: i32, right: i32 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("composition not defined: {0}")]
    Composability(String),

    #[error("composability condition diverges at beta = {beta}")]
    Diverged { beta: MultiIndex },

    #[error("composability condition undecided at beta = {beta} within the summation budget")]
    Undecided { beta: MultiIndex },

    #[error("not invertible: {0}")]
    Inversion(InversionFailure),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
