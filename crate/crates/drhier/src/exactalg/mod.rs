//! Arithmetic substrate: Gaussian-rational scalars, sparse multivariate
//! polynomials, Bernoulli numbers and weighted power-sum closed forms,
//! iterated Laurent expansions, and exact interpolation.
//!
//! Every operation here is pure and exact; errors signal genuine
//! precondition violations (or, for [`ExactAlgError::DivisionNotExact`],
//! the failure of a divisibility statement that a caller is testing).

mod scalar;
mod poly;
mod bernoulli;
mod laurent;
mod interp;

pub use scalar::{ExactScalar, Rational};
pub use poly::{MultiPoly, VarSet};
pub use bernoulli::{bernoulli, faulhaber_sum};
pub use laurent::{IteratedLaurent, SectorFactor, sector_coeff};
pub use interp::{
    interpolate_multivariate, lagrange_interpolate, matrix_rank, solve_linear_system,
    symmetric_multilinear_coeff,
};

use thiserror::Error;

/// Errors from the arithmetic layer.
#[derive(Debug, Error)]
pub enum ExactAlgError {
    /// A quotient had a nonzero remainder. This is how failed divisibility
    /// statements surface; callers must propagate it, never swallow it.
    #[error("exact division failed: {0}")]
    DivisionNotExact(String),
    /// The divisor passed to linear division was not a usable linear form.
    #[error("invalid linear divisor: {0}")]
    InvalidDivisor(String),
    /// A redundant interpolation node contradicted the fitted polynomial,
    /// signalling a degree-bound violation upstream.
    #[error("interpolation inconsistent: {0}")]
    InterpolationInconsistent(String),
    /// A Laurent-expansion truncation window could not cover the target.
    #[error("truncation window too small: {0}")]
    WindowTooSmall(String),
}
