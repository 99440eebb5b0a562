//! The quantum DR hierarchy: Hamiltonian densities, the star product,
//! two-point functions with their integration constants, correlators by
//! three independent evaluation routes, and the verification suites.
//!
//! Everything here reduces to finitely many DR–Hodge pairings at fixed
//! integer ramification data.  The organizing ideas:
//!
//! * A density is stored through its symmetric coefficient functions
//!   `C_m(a₁,…,a_m)` in the divided power-sum representation — no global
//!   symbolic `p`-algebra is ever materialized ([`density`]).
//! * Coefficients live in the truncated ring [`Trunc`] over ℚ(𝗂) graded by
//!   (ℏ, ε², μ) exponents, with an explicit exactness order so that any
//!   request beyond the built truncation fails loudly instead of returning
//!   a silently wrong value.
//! * Correlators are computed by three routes — the ordered-vertex graph
//!   sum with free leaves ([`correlator::route_a`]), the compressed graph
//!   sum after forgetting free leaves ([`correlator::route_b`]), and the
//!   definitional nested one-sided star products ([`correlator::route_c`])
//!   — and any disagreement is a fatal error.

mod correlator;
mod density;
mod pairing;
mod series;
mod theory;
mod twopoint;
mod verify;

pub use correlator::{
    correlator, inserted_correlator, CorrelatorKey, CorrelatorValue, Route,
};
pub use density::{
    commutator, hamiltonian_coefficient, hamiltonian_density, star_commutator, tilde_star,
    Density,
};
pub use pairing::{dr_pairing, vertex_factor};
pub use series::Trunc;
pub use theory::{degree_condition, DegreeCase, HodgeCohFt, TrivialCohFt};
pub use twopoint::{derivative_two_point, two_point, TwoPoint};
pub use verify::{
    compatibility_check, level_report, verify_quantum_a, verify_string_dilaton, CaseStatus,
    LevelVerdict, ReportCase, VerifyReport,
};

use crate::drcalc::DrCalcError;
use crate::exactalg::ExactAlgError;
use crate::modgraph::ModGraphError;
use thiserror::Error;

/// Errors from the hierarchy layer.
#[derive(Debug, Error)]
pub enum QdrError {
    /// A coefficient was requested beyond the exactness order of a
    /// truncated series.
    #[error("truncation exceeded: {0}")]
    TruncationExceeded(String),
    /// The overdetermined recursion for two-point constants produced
    /// incompatible values; this must never fire.
    #[error("two-point constant recursion inconsistent: {0}")]
    ConstantRecursionInconsistent(String),
    /// Two enabled correlator routes disagree; fatal, reports all values.
    #[error("correlator routes disagree: {0}")]
    RouteDisagreement(String),
    /// The requested correlator key is outside the stability range and not
    /// covered by the low-arity conventions.
    #[error("unstable correlator key: {0}")]
    StabilityViolation(String),
    /// An argument is outside the supported range.
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    /// A correlator came out with a nonzero imaginary part.
    #[error("correlator value is not real: {0}")]
    NotReal(String),
    /// Errors bubbling up from the DR-cycle layer.
    #[error(transparent)]
    DrCalc(#[from] DrCalcError),
    /// Errors bubbling up from the arithmetic layer.
    #[error(transparent)]
    ExactAlg(#[from] ExactAlgError),
    /// Errors bubbling up from the graph layer.
    #[error(transparent)]
    Graph(#[from] ModGraphError),
}

/// Engine-wide caps.  The intersection tables stop at genus 2, so that is
/// a hard bound; the rest are defaults that operations accept explicitly.
#[derive(Debug, Clone, Copy)]
pub struct QdrConfig {
    /// Largest genus served by the pairing engine.
    pub gmax: u32,
    /// Largest p-arity materialized in densities and commutators.
    pub arity_cap: usize,
    /// Largest total ψ-level for correlator sweeps.
    pub level_cap: i64,
}

impl Default for QdrConfig {
    fn default() -> Self {
        QdrConfig { gmax: 2, arity_cap: 6, level_cap: 6 }
    }
}

/// Hard cap of the intersection-number tables.
pub const ENGINE_GENUS_CAP: u32 = 2;
