//! Exact top intersection numbers of ψ-, κ- and λ-classes on moduli of
//! stable curves (certified for genus ≤ 2), and evaluation of decorated
//! boundary-graph tautological expressions.

mod cache;
mod hodge;
mod psi;
mod taut;

pub use cache::{load_cache, save_cache, verify_cache, CacheError, CacheStats};
pub(crate) use cache::{dr_insert, dr_lookup};
pub use hodge::hodge_psi_integral;
pub use psi::psi_top_integral;
pub use taut::{BoundarySpec, DecoratedGraph, TautExpr};

use thiserror::Error;

/// Errors from intersection-number computations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntNumError {
    /// The integrand degree does not match the moduli dimension, or the
    /// moduli space itself does not exist. Wrong-degree queries are caller
    /// bugs, never silent zeros.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// λ-class reduction is implemented through genus 3 only.
    #[error("tautological reduction is capped at genus 3; got genus {0}")]
    GenusOutOfRange(u32),
}
