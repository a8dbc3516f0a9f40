//! Exact arithmetic on truncated multivariate formal power series over ℚ:
//! ring operations, formal derivatives and Jacobians, composition (exact for
//! nonunit inner vectors, numerically checked for unit ones), the chain rule,
//! and compositional inverses.

pub mod calculus;
pub mod cli;
pub mod composition;
pub mod error;
pub mod expr;
pub mod format;
pub mod inversion;
pub mod linalg;
pub mod multiindex;
pub mod series;
mod vector;

pub use calculus::JacobianMatrix;
pub use composition::{CoefficientOracle, ConvergenceReport, SeriesVector, SummationBudget};
pub use error::{Error, InversionFailure, Result};
pub use multiindex::MultiIndex;
pub use series::{Rational, TruncatedSeries};
