//! Stable graphs with labeled legs: enumeration up to isomorphism,
//! automorphism counting, spanning trees with the flow data consumed by the
//! cycle formula, and the ordered admissible graph variants with integer
//! edge decorations.

mod graph;
mod span;
mod admissible;

pub use graph::{enumerate_stable_graphs, enumerate_stable_graphs_bounded, HalfEdgePos, StableGraph};
pub use span::{kirchhoff_tree_count, spanning_trees, SpanningTree};
pub use admissible::{
    admissible_decorations, enumerate_admissible, validate_decoration, AdmissibleGraph,
    AdmissibleMode, Decoration,
};

use thiserror::Error;

/// Errors from graph enumeration.
#[derive(Debug, Error)]
pub enum ModGraphError {
    /// The pair (g, n) admits no stable curve: 2g − 2 + n ≤ 0.
    #[error("no stable curves of genus {0} with {1} marked points")]
    UnstablePair(u32, usize),
}
