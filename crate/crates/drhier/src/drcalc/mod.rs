//! Double ramification cycles and their intersection pairings.
//!
//! The centrepiece is [`dr_cycle`], which assembles the double
//! ramification cycle `DR_g(a₁,…,aₙ)` as an explicit decorated-graph
//! expression via the spanning-tree expansion: a sum over stable graphs
//! with at most `g` edges, whose per-graph coefficients are extracted
//! from iterated Laurent expansions of exponential and Bernoulli edge
//! factors.  Weights may be integers or polynomials in formal symbols,
//! so the same code path serves numeric pairings and symbolic
//! divisibility checks.
//!
//! On top of the cycle sit three consumers:
//! * [`dr_hodge_integral`] pairs a DR cycle against ψ/λ/CohFT
//!   insertions (the building block of the hierarchy's Hamiltonian
//!   densities),
//! * [`dr_pushforward_forget`] verifies that forgetting a weight-`b`
//!   point leaves a class divisible by `b²`,
//! * [`a_class_integral`] evaluates the rubber-space graph expansion
//!   behind the quantum A-class, with its polynomiality properties
//!   checked by [`a_class_polynomiality_report`].

mod aclass;
mod cohft;
mod cycle;
mod pushforward;
mod splice;

pub use aclass::{
    a_class_integral, a_class_polynomiality_report, a_class_slice, AClassSlice,
    PolynomialityReport,
};
pub use cohft::CohFt;
pub use cycle::{dr_cycle, dr_cycle_numeric, dr_hodge_integral, DRPolyClass};
pub use pushforward::{dr_pushforward_forget, PushforwardReport};

use crate::exactalg::ExactAlgError;
use crate::intnum::IntNumError;
use crate::modgraph::ModGraphError;
use thiserror::Error;

/// Errors from the DR-cycle layer.
#[derive(Debug, Error)]
pub enum DrCalcError {
    /// Ramification weights must sum to zero.
    #[error("ramification profile does not balance: {0}")]
    ProfileUnbalanced(String),
    /// The requested genus exceeds what the integral tables support.
    #[error("genus {0} out of supported range (max {1})")]
    GenusOutOfRange(u32, u32),
    /// A pushforward coefficient escaped the ideal (b²).
    #[error("pushforward divisibility failure: {0}")]
    DivisibilityViolation(String),
    /// A pairing polynomial was not divisible by the total weight 𝐚.
    #[error("total-weight division failure: {0}")]
    DivisionNotExact(String),
    /// A fitted polynomial family violated a degree/parity/divisibility claim.
    #[error("polynomial property violated: {0}")]
    PropertyViolation(String),
    /// Errors bubbling up from the intersection-number layer.
    #[error(transparent)]
    IntNum(#[from] IntNumError),
    /// Errors bubbling up from the arithmetic layer.
    #[error(transparent)]
    ExactAlg(#[from] ExactAlgError),
    /// Errors bubbling up from the graph layer.
    #[error(transparent)]
    Graph(#[from] ModGraphError),
}
