//! Exact computation of double ramification cycles, tautological intersection
//! numbers on moduli of stable curves, and correlators of the quantum DR
//! integrable hierarchy, at genus ≤ 2.
//!
//! All arithmetic is exact over the Gaussian rationals ℚ(𝗂); there is no
//! floating point anywhere. The crate is organized bottom-up:
//!
//! * [`exactalg`] — scalars, multivariate polynomials, Bernoulli/Faulhaber
//!   machinery, sector-wise Laurent expansions, exact interpolation;
//! * [`modgraph`] — stable graphs, automorphisms, spanning trees, and the
//!   admissible ordered-vertex graphs indexing correlator expansions;
//! * [`intnum`] — ψ/κ/λ intersection numbers and evaluation of decorated
//!   boundary-graph expressions;
//! * [`drcalc`] — DR cycles via the spanning-tree graph sum, DR–Hodge
//!   integrals, forgetful pushforwards, and the quantum A-class;
//! * [`qdr`] — Hamiltonian densities, the star product, two-point functions,
//!   correlators by three independent routes, and the verification suites;
//! * [`hurwitz`] — the independent symmetric-group counting oracle.

pub mod exactalg;
pub mod modgraph;
pub mod intnum;
pub mod drcalc;
pub mod qdr;
pub mod hurwitz;
