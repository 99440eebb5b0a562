//! Ordered admissible stable graphs in two modes and their integer edge
//! decorations. Vertices are ordered and pinned by leaves, every non-first
//! vertex has an edge to a lower-index vertex (which forces connectivity),
//! loops are forbidden, and edges are oriented toward the higher-index
//! vertex: the tail (at the lower index) carries the positive weight.

use super::graph::{compositions, edge_multisets, leg_assignments, StableGraph};
use super::HalfEdgePos;

/// Which ordered-graph family is meant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdmissibleMode {
    /// Pinned leaf per vertex, free leaves anywhere, closing leaf on the
    /// first vertex.
    Amsg,
    /// Labeled leaves distributed with increasing minima, closing leaf on
    /// the first vertex.
    Asg,
}

/// An ordered admissible graph. The underlying graph's legs encode the full
/// leaf placement for the mode:
///
/// * `Amsg`: legs `0..nv` pinned at vertices `0..nv`, then `free` movable
///   legs, then the closing leg at vertex 0;
/// * `Asg`: legs `0..free` are the labeled leaves (each vertex holds at
///   least one, minima increasing), then the closing leg at vertex 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibleGraph {
    pub mode: AdmissibleMode,
    pub nv: usize,
    /// Number of movable leaves (`Amsg`) or labeled leaves (`Asg`).
    pub free: usize,
    pub graph: StableGraph,
}

/// An integer decoration: edge flows (the positive tail value per edge) and
/// the full per-leaf weight vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoration {
    /// `a(t(e)) > 0` for each edge; the head value is its negative.
    pub flow: Vec<i64>,
    /// Weight at each leg, in leg order.
    pub leaf: Vec<i64>,
}

impl Decoration {
    /// Weight at a half-edge position.
    pub fn weight(&self, pos: HalfEdgePos) -> i64 {
        match pos {
            HalfEdgePos::Leg(i) => self.leaf[i],
            HalfEdgePos::Tail(e) => self.flow[e],
            HalfEdgePos::Head(e) => -self.flow[e],
        }
    }
}

/// Every admissible graph of total genus `g` with `n_v` ordered vertices and
/// the given number of movable (`Amsg`) or labeled (`Asg`) leaves. Ordered
/// vertices leave nothing to quotient, so the list is duplicate-free by
/// construction.
pub fn enumerate_admissible(
    mode: AdmissibleMode,
    g: u32,
    n_v: usize,
    leaf_count: usize,
) -> Vec<AdmissibleGraph> {
    assert!(n_v >= 1);
    if mode == AdmissibleMode::Asg && (leaf_count < n_v) {
        return Vec::new(); // each vertex must hold a labeled leaf
    }
    let mut out = Vec::new();
    for b in 0..=g as usize {
        if n_v == 1 && b > 0 {
            continue; // edges need two distinct vertices
        }
        let e_total = n_v - 1 + b;
        for genera in compositions((g as usize - b) as u64, n_v) {
            for placement in leaf_placements(mode, n_v, leaf_count) {
                let legs = build_legs(mode, n_v, &placement);
                let mut min_deg = vec![0i64; n_v];
                for v in 0..n_v {
                    let legs_v = legs.iter().filter(|&&w| w == v).count() as i64;
                    let mut need = 3 - 2 * genera[v] as i64 - legs_v;
                    if v > 0 {
                        need = need.max(1); // admissibility needs an edge
                    }
                    min_deg[v] = need.max(0);
                }
                if min_deg.iter().sum::<i64>() > 2 * e_total as i64 {
                    continue;
                }
                for edges in edge_multisets(n_v, e_total, &min_deg, false) {
                    // orient low → high and check admissibility
                    let oriented: Vec<(usize, usize)> = edges
                        .iter()
                        .map(|&(a, b)| (a.min(b), a.max(b)))
                        .collect();
                    let admissible = (1..n_v)
                        .all(|v| oriented.iter().any(|&(a, b)| b == v && a < v));
                    if !admissible {
                        continue;
                    }
                    let graph = StableGraph::new(
                        genera.iter().map(|&x| x as u32).collect(),
                        legs.clone(),
                        oriented,
                    );
                    if !graph.is_stable() {
                        continue;
                    }
                    out.push(AdmissibleGraph { mode, nv: n_v, free: leaf_count, graph });
                }
            }
        }
    }
    out
}

/// Vertex choices for the movable (`Amsg`) or labeled (`Asg`) leaves.
fn leaf_placements(mode: AdmissibleMode, n_v: usize, leaf_count: usize) -> Vec<Vec<usize>> {
    match mode {
        AdmissibleMode::Amsg => leg_assignments(leaf_count, n_v),
        AdmissibleMode::Asg => leg_assignments(leaf_count, n_v)
            .into_iter()
            .filter(|assign| {
                let mut minima = vec![usize::MAX; n_v];
                for (leaf, &v) in assign.iter().enumerate() {
                    minima[v] = minima[v].min(leaf);
                }
                minima.iter().all(|&m| m != usize::MAX)
                    && minima.windows(2).all(|w| w[0] < w[1])
            })
            .collect(),
    }
}

fn build_legs(mode: AdmissibleMode, n_v: usize, placement: &[usize]) -> Vec<usize> {
    match mode {
        AdmissibleMode::Amsg => {
            let mut legs: Vec<usize> = (0..n_v).collect();
            legs.extend_from_slice(placement);
            legs.push(0);
            legs
        }
        AdmissibleMode::Asg => {
            let mut legs = placement.to_vec();
            legs.push(0);
            legs
        }
    }
}

/// The full leaf-weight vector prescribed by the mode for given inputs
/// (`a` holds the movable-leaf values for `Amsg`, the labeled-leaf values
/// for `Asg`; all must be positive).
pub fn leaf_weights_for(g: &AdmissibleGraph, a: &[i64]) -> Vec<i64> {
    assert_eq!(a.len(), g.free, "one value per movable/labeled leaf");
    assert!(a.iter().all(|&x| x > 0), "leaf values must be positive");
    let total: i64 = a.iter().sum();
    match g.mode {
        AdmissibleMode::Amsg => {
            let mut leaf = vec![0i64; g.nv];
            leaf.extend_from_slice(a);
            leaf.push(-total);
            leaf
        }
        AdmissibleMode::Asg => {
            let mut leaf = a.to_vec();
            leaf.push(-total);
            leaf
        }
    }
}

/// All admissible decorations for the given movable/labeled leaf values:
/// positive integer edge flows balancing every vertex. Finite because each
/// vertex's inflow from below is pinned by the vertices above it.
pub fn admissible_decorations(g: &AdmissibleGraph, a: &[i64]) -> Vec<Decoration> {
    let leaf = leaf_weights_for(g, a);
    let graph = &g.graph;
    let nv = g.nv;
    // leafsum per vertex
    let mut leafsum = vec![0i64; nv];
    for i in 0..graph.num_legs() {
        leafsum[graph.leg_vertex(i)] += leaf[i];
    }
    // process vertices from the highest index down: all edges into v from
    // below must absorb need_v = leafsum(v) + outflow already fixed above
    let mut flows = vec![0i64; graph.num_edges()];
    let mut out = Vec::new();
    solve_flows(graph, nv, &leafsum, nv - 1, &mut flows, &mut out, &leaf);
    out
}

fn solve_flows(
    graph: &StableGraph,
    nv: usize,
    leafsum: &[i64],
    v: usize,
    flows: &mut Vec<i64>,
    out: &mut Vec<Decoration>,
    leaf: &[i64],
) {
    if v == 0 {
        // everything fixed; verify balance at the first vertex
        let balance: i64 = leafsum[0]
            + graph
                .edges()
                .iter()
                .enumerate()
                .map(|(e, &(t, h))| {
                    (if t == 0 { flows[e] } else { 0 }) - (if h == 0 { flows[e] } else { 0 })
                })
                .sum::<i64>();
        if balance == 0 {
            out.push(Decoration { flow: flows.clone(), leaf: leaf.to_vec() });
        }
        return;
    }
    // incoming edges (tail below v, head at v) still free; outgoing edges
    // (tail at v) were fixed while processing higher vertices
    let incoming: Vec<usize> = graph
        .edges()
        .iter()
        .enumerate()
        .filter(|&(_, &(_, h))| h == v)
        .map(|(e, _)| e)
        .collect();
    let outflow: i64 = graph
        .edges()
        .iter()
        .enumerate()
        .filter(|&(_, &(t, _))| t == v)
        .map(|(e, _)| flows[e])
        .sum();
    let need = leafsum[v] + outflow;
    // Σ incoming flows = need, each ≥ 1
    let k = incoming.len() as i64;
    if need < k {
        return;
    }
    distribute(&incoming, need, 0, graph, nv, leafsum, v, flows, out, leaf);
}

#[allow(clippy::too_many_arguments)]
fn distribute(
    incoming: &[usize],
    left: i64,
    idx: usize,
    graph: &StableGraph,
    nv: usize,
    leafsum: &[i64],
    v: usize,
    flows: &mut Vec<i64>,
    out: &mut Vec<Decoration>,
    leaf: &[i64],
) {
    if idx == incoming.len() {
        if left == 0 {
            solve_flows(graph, nv, leafsum, v - 1, flows, out, leaf);
        }
        return;
    }
    let remaining = (incoming.len() - idx - 1) as i64;
    for x in 1..=(left - remaining) {
        flows[incoming[idx]] = x;
        distribute(incoming, left - x, idx + 1, graph, nv, leafsum, v, flows, out, leaf);
    }
    flows[incoming[idx]] = 0;
}

/// Check the decoration conditions verbatim: positive tail values, opposite
/// ends summing to zero (implicit in the storage), prescribed leaf values,
/// and zero balance at every vertex.
pub fn validate_decoration(g: &AdmissibleGraph, a: &[i64], d: &Decoration) -> bool {
    if d.leaf != leaf_weights_for(g, a) {
        return false;
    }
    if d.flow.len() != g.graph.num_edges() || d.flow.iter().any(|&f| f <= 0) {
        return false;
    }
    (0..g.graph.num_vertices()).all(|v| {
        g.graph
            .vertex_half_edges(v)
            .into_iter()
            .map(|h| d.weight(h))
            .sum::<i64>()
            == 0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modgraph::enumerate_stable_graphs;

    #[test]
    fn single_vertex_cases() {
        // one ASG vertex carrying all labeled leaves plus the closing leaf
        let asg = enumerate_admissible(AdmissibleMode::Asg, 0, 1, 2);
        assert_eq!(asg.len(), 1);
        assert_eq!(asg[0].graph.num_legs(), 3);
        assert_eq!(asg[0].graph.num_edges(), 0);
        // AMSG with one vertex: no edges possible, all free leaves on it
        let amsg = enumerate_admissible(AdmissibleMode::Amsg, 1, 1, 3);
        assert_eq!(amsg.len(), 1);
        assert_eq!(amsg[0].graph.num_legs(), 1 + 3 + 1);
        // the empty decoration is unique
        let decs = admissible_decorations(&amsg[0], &[1, 2, 5]);
        assert_eq!(decs.len(), 1);
        assert!(decs[0].flow.is_empty());
        assert!(validate_decoration(&amsg[0], &[1, 2, 5], &decs[0]));
    }

    #[test]
    fn asg_counts_against_filtered_enumeration() {
        // every ASG underlies a plain stable graph of the same signature;
        // conversely each stable graph of (g, n+1) with loop-free structure
        // and a valid ordered labeling appears exactly once over all n_v
        let g = 1u32;
        let n = 2usize;
        let all: usize = (1..=n)
            .map(|nv| enumerate_admissible(AdmissibleMode::Asg, g, nv, n).len())
            .sum();
        // oracle: count ordered-labelable loop-free stable graphs directly
        let mut oracle = 0usize;
        for graph in enumerate_stable_graphs(g, n + 1).unwrap().iter() {
            if graph.edges().iter().any(|&(a, b)| a == b) {
                continue;
            }
            oracle += ordered_labelings(graph, n);
        }
        assert_eq!(all, oracle);
    }

    /// Count vertex orderings of a plain stable graph that satisfy the ASG
    /// conditions (closing leaf with leaf 1 on the first vertex, increasing
    /// minima, admissibility), quotiented by graph automorphisms via
    /// direct canonical-form dedup of the induced ordered graphs.
    fn ordered_labelings(graph: &StableGraph, n: usize) -> usize {
        let nv = graph.num_vertices();
        let mut seen = std::collections::BTreeSet::new();
        let mut perm: Vec<usize> = (0..nv).collect();
        let mut count = 0usize;
        permute(&mut perm, 0, &mut |p| {
            // p maps old -> new index
            let legs: Vec<usize> = (0..=n).map(|i| p[graph.leg_vertex(i)]).collect();
            // closing leaf (index n) on new vertex 0
            if legs[n] != 0 {
                return;
            }
            // minima increasing over new indices
            let mut minima = vec![usize::MAX; nv];
            for (leaf, &v) in legs[..n].iter().enumerate() {
                minima[v] = minima[v].min(leaf);
            }
            if minima.iter().any(|&m| m == usize::MAX)
                || !minima.windows(2).all(|w| w[0] < w[1])
            {
                return;
            }
            let mut edges: Vec<(usize, usize)> = graph
                .edges()
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (p[a], p[b]);
                    (x.min(y), x.max(y))
                })
                .collect();
            if !(1..nv).all(|v| edges.iter().any(|&(a, b)| b == v && a < v)) {
                return;
            }
            edges.sort_unstable();
            let genera: Vec<u32> = (0..nv)
                .map(|v| graph.vertex_genus(p.iter().position(|&x| x == v).unwrap()))
                .collect();
            if seen.insert((genera, legs, edges)) {
                count += 1;
            }
        });
        count
    }

    fn permute<F: FnMut(&[usize])>(perm: &mut Vec<usize>, k: usize, f: &mut F) {
        if k == perm.len() {
            f(perm);
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            permute(perm, k + 1, f);
            perm.swap(k, i);
        }
    }

    #[test]
    fn banana_decorations_split_the_inflow() {
        // two vertices joined by two parallel edges, ASG with two leaves on
        // the first vertex… requires the second vertex to hold a leaf, so
        // instead build the AMSG analogue: pinned leaves only
        let graphs = enumerate_admissible(AdmissibleMode::Amsg, 1, 2, 1);
        let banana: Vec<_> = graphs
            .iter()
            .filter(|g| g.graph.num_edges() == 2 && g.graph.vertex_genus(0) == 0)
            .collect();
        assert!(!banana.is_empty());
        for g in banana {
            // free leaf value A flows from its vertex; decorations split the
            // transported amount over the two edges
            for a in 2..6i64 {
                let decs = admissible_decorations(g, &[a]);
                for d in &decs {
                    assert!(validate_decoration(g, &[a], d));
                }
                // flow runs low → high, so only a free leaf on the second
                // vertex makes the balance solvable; the A units crossing
                // the two edges split as (k, A−k), k = 1..A−1
                let free_on_second = g.graph.leg_vertex(g.nv) == 1;
                let expected = if free_on_second { (a - 1) as usize } else { 0 };
                assert_eq!(decs.len(), expected, "A = {a}, graph {:?}", g.graph);
            }
        }
    }

    #[test]
    fn tree_decorations_are_determined() {
        // AMSG path v0—v1 with the free leaf on v1: flow forced to A
        let graphs = enumerate_admissible(AdmissibleMode::Amsg, 2, 2, 1);
        for g in &graphs {
            if g.graph.num_edges() != 1 {
                continue;
            }
            let free_at = g.graph.leg_vertex(g.nv);
            for a in 1..5i64 {
                let decs = admissible_decorations(g, &[a]);
                if free_at == 1 {
                    assert_eq!(decs.len(), 1);
                    assert_eq!(decs[0].flow, vec![a]);
                    assert!(validate_decoration(g, &[a], &decs[0]));
                } else {
                    // inflow would have to run high → low: impossible
                    assert!(decs.is_empty());
                }
            }
        }
    }
}
