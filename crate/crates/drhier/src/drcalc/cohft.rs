//! Interface for cohomological field theory insertions.
//!
//! The pairing engine consumes a CohFT through a narrow contract: the
//! theory is graded by a formal parameter μ, and each μ-coefficient
//! must be expressible as a rational multiple of a product of λ-classes
//! (the empty product is the fundamental class).  Both shipped
//! providers — the trivial theory and the Hodge-class family — fit this
//! shape, and it is exactly what vertexwise integration over boundary
//! strata can consume: λ-classes distribute over the vertices of a
//! stable graph, so no further structure is required.

use num::BigRational;

/// A cohomological field theory with unit, presented through its
/// μ-graded coefficients as λ-class multiples.
///
/// Only rank-one theories (a single primary field) are served by the
/// integration engine; `dimension` and `eta` exist so providers can
/// state their pairing data explicitly and callers can assert the rank.
pub trait CohFt {
    /// Dimension of the underlying field space (number of primaries).
    fn dimension(&self) -> usize;

    /// The symmetric pairing η(vᵢ, vⱼ) of basis fields, 1-indexed.
    fn eta(&self, i: usize, j: usize) -> BigRational;

    /// The μ^k coefficient of the theory on any moduli, written as
    /// `scale · ∏ⱼ λ_{parts[j]}`.  `None` means that coefficient is the
    /// zero class.
    fn mu_part(&self, k: u32) -> Option<(BigRational, Vec<u32>)>;

    /// Cohomological degree of the μ^k coefficient on the genus-`g`,
    /// `n`-pointed moduli; `None` when the coefficient vanishes there.
    fn class_degree(&self, g: u32, n: usize, k: u32) -> Option<u32>;

    /// Stable identifier used in reports.
    fn tag(&self) -> String;
}
