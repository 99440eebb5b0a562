//! The stable-graph type, enumeration up to isomorphism, and automorphism
//! counting.

use super::ModGraphError;
use once_cell::sync::Lazy;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};

/// A connected stable graph: vertices with genera, labeled legs pinned to
/// vertices, and a multiset of edges stored as ordered `(tail, head)` vertex
/// pairs (the stored order is the edge's orientation; loops are allowed).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StableGraph {
    genus: Vec<u32>,
    legs: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

/// A position in the half-edge list of one vertex: either a leg (by 0-based
/// leg index) or one end of an edge (by edge index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum HalfEdgePos {
    Leg(usize),
    Tail(usize),
    Head(usize),
}

impl StableGraph {
    /// Build a graph from raw data. Edge orientation is preserved as given.
    pub fn new(genus: Vec<u32>, legs: Vec<usize>, edges: Vec<(usize, usize)>) -> Self {
        let nv = genus.len();
        assert!(nv > 0, "graph needs at least one vertex");
        assert!(legs.iter().all(|&v| v < nv), "leg attached to missing vertex");
        assert!(
            edges.iter().all(|&(a, b)| a < nv && b < nv),
            "edge attached to missing vertex"
        );
        StableGraph { genus, legs, edges }
    }

    /// The one-vertex graph with no edges.
    pub fn smooth(g: u32, n: usize) -> Self {
        StableGraph { genus: vec![g], legs: vec![0; n], edges: Vec::new() }
    }

    pub fn num_vertices(&self) -> usize {
        self.genus.len()
    }

    pub fn num_legs(&self) -> usize {
        self.legs.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_genus(&self, v: usize) -> u32 {
        self.genus[v]
    }

    /// Vertex carrying the given 0-based leg.
    pub fn leg_vertex(&self, i: usize) -> usize {
        self.legs[i]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// First Betti number of the underlying graph.
    pub fn betti(&self) -> usize {
        self.edges.len() + 1 - self.genus.len()
    }

    /// Total genus: vertex genera plus first Betti number.
    pub fn total_genus(&self) -> u32 {
        let b = self.edges.len() as i64 - self.genus.len() as i64 + 1;
        (self.genus.iter().map(|&g| g as i64).sum::<i64>() + b) as u32
    }

    /// Number of half-edges (edge ends and legs) at a vertex.
    pub fn valence(&self, v: usize) -> usize {
        let legs = self.legs.iter().filter(|&&w| w == v).count();
        let ends = self
            .edges
            .iter()
            .map(|&(a, b)| (a == v) as usize + (b == v) as usize)
            .sum::<usize>();
        legs + ends
    }

    /// Dimension of the moduli space at a vertex.
    pub fn vertex_dim(&self, v: usize) -> i64 {
        3 * self.genus[v] as i64 - 3 + self.valence(v) as i64
    }

    /// Half-edges at a vertex in canonical order: legs (ascending by label),
    /// then edge ends (ascending by edge index, tail before head for loops).
    pub fn vertex_half_edges(&self, v: usize) -> Vec<HalfEdgePos> {
        let mut out = Vec::new();
        for (i, &w) in self.legs.iter().enumerate() {
            if w == v {
                out.push(HalfEdgePos::Leg(i));
            }
        }
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            if a == v {
                out.push(HalfEdgePos::Tail(i));
            }
            if b == v {
                out.push(HalfEdgePos::Head(i));
            }
        }
        out
    }

    /// Every vertex satisfies 2g(v) − 2 + n(v) > 0.
    pub fn is_stable(&self) -> bool {
        (0..self.num_vertices()).all(|v| 2 * self.genus[v] as i64 - 2 + self.valence(v) as i64 > 0)
    }

    pub fn is_connected(&self) -> bool {
        let nv = self.num_vertices();
        let mut uf: Vec<usize> = (0..nv).collect();
        fn find(uf: &mut Vec<usize>, x: usize) -> usize {
            if uf[x] != x {
                let r = find(uf, uf[x]);
                uf[x] = r;
            }
            uf[x]
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
            uf[ra] = rb;
        }
        let r0 = find(&mut uf, 0);
        (1..nv).all(|v| find(&mut uf, v) == r0)
    }

    /// Local isomorphism invariant of a vertex: genus, leg labels carried,
    /// total edge-end count and loop count. Any isomorphism preserves it.
    fn vertex_invariant(&self, v: usize) -> (u32, Vec<usize>, usize, usize) {
        let legs: Vec<usize> = (0..self.legs.len())
            .filter(|&i| self.legs[i] == v)
            .collect();
        let loops = self
            .edges
            .iter()
            .filter(|&&(a, b)| a == v && b == v)
            .count();
        (self.genus[v], legs, self.valence(v), loops)
    }

    /// Relabelings compatible with the vertex invariants: vertices are
    /// blocked by invariant class and only permuted within blocks. Every
    /// isomorphism respects the blocks, so minimizing over these
    /// permutations yields a sound canonical key, at a fraction of `nv!`.
    fn invariant_respecting_perms(&self) -> Vec<Vec<usize>> {
        let nv = self.num_vertices();
        let mut order: Vec<usize> = (0..nv).collect();
        let invs: Vec<_> = (0..nv).map(|v| self.vertex_invariant(v)).collect();
        order.sort_by(|&a, &b| invs[a].cmp(&invs[b]));
        // blocks of equal invariant, in invariant order
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for &v in &order {
            match blocks.last_mut() {
                Some(b) if invs[b[0]] == invs[v] => b.push(v),
                _ => blocks.push(vec![v]),
            }
        }
        // all products of within-block permutations; perm maps old -> new
        let mut out = Vec::new();
        let mut assign = vec![0usize; nv];
        fn rec(
            blocks: &[Vec<usize>],
            bi: usize,
            offset: usize,
            assign: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if bi == blocks.len() {
                out.push(assign.clone());
                return;
            }
            let block = &blocks[bi];
            let mut order: Vec<usize> = block.clone();
            permute_all(&mut order, 0, &mut |p| {
                for (slot, &v) in p.iter().enumerate() {
                    assign[v] = offset + slot;
                }
                rec(blocks, bi + 1, offset + block.len(), assign, out);
            });
        }
        rec(&blocks, 0, 0, &mut assign, &mut out);
        out
    }

    /// Self-bijections of the vertex set respecting the invariant blocks:
    /// each block is permuted onto itself (in original labels). Every
    /// automorphism is of this form.
    fn invariant_respecting_self_maps(&self) -> Vec<Vec<usize>> {
        let nv = self.num_vertices();
        let invs: Vec<_> = (0..nv).map(|v| self.vertex_invariant(v)).collect();
        let mut blocks: BTreeMap<&(u32, Vec<usize>, usize, usize), Vec<usize>> = BTreeMap::new();
        for v in 0..nv {
            blocks.entry(&invs[v]).or_default().push(v);
        }
        let blocks: Vec<Vec<usize>> = blocks.into_values().collect();
        let mut out = Vec::new();
        let mut map = vec![0usize; nv];
        fn rec(
            blocks: &[Vec<usize>],
            bi: usize,
            map: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            if bi == blocks.len() {
                out.push(map.clone());
                return;
            }
            let block = &blocks[bi];
            let mut image: Vec<usize> = block.clone();
            permute_all(&mut image, 0, &mut |p| {
                for (src, &dst) in blocks[bi].iter().zip(p.iter()) {
                    map[*src] = dst;
                }
                rec(blocks, bi + 1, map, out);
            });
        }
        rec(&blocks, 0, &mut map, &mut out);
        out
    }

    /// Isomorphism-invariant key: the minimum over invariant-respecting
    /// vertex relabelings of the (genera, legs, sorted unoriented edges)
    /// encoding. Legs keep their labels, so isomorphisms must respect them.
    pub fn canonical_key(&self) -> (Vec<u32>, Vec<usize>, Vec<(usize, usize)>) {
        let nv = self.num_vertices();
        let mut best: Option<(Vec<u32>, Vec<usize>, Vec<(usize, usize)>)> = None;
        for p in self.invariant_respecting_perms() {
            let genus: Vec<u32> = (0..nv).map(|v| self.genus[inv(&p, v)]).collect();
            let legs: Vec<usize> = self.legs.iter().map(|&v| p[v]).collect();
            let mut edges: Vec<(usize, usize)> = self
                .edges
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (p[a], p[b]);
                    (x.min(y), x.max(y))
                })
                .collect();
            edges.sort_unstable();
            let key = (genus, legs, edges);
            if best.as_ref().map_or(true, |b| key < *b) {
                best = Some(key);
            }
        }
        best.unwrap()
    }

    /// Order of the automorphism group: graph isomorphisms to itself fixing
    /// every leg, counted on half-edges (parallel edges may be permuted and
    /// loops flipped).
    pub fn automorphism_order(&self) -> u64 {
        let nv = self.num_vertices();
        // per-permutation factor: parallel-edge permutations and loop flips
        let mut mult: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for &(a, b) in &self.edges {
            *mult.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
        let base: u64 = mult
            .iter()
            .map(|(&(a, b), &m)| {
                let perms = factorial(m);
                if a == b {
                    perms * (1u64 << m)
                } else {
                    perms
                }
            })
            .product();
        let target: BTreeSet<Vec<(usize, usize)>> = {
            let mut e: Vec<(usize, usize)> = self
                .edges
                .iter()
                .map(|&(a, b)| (a.min(b), a.max(b)))
                .collect();
            e.sort_unstable();
            BTreeSet::from([e])
        };
        let mut count = 0u64;
        for p in self.invariant_respecting_self_maps() {
            // blocks pin legs and genera already; re-check for clarity
            debug_assert!(self.legs.iter().all(|&v| p[v] == v));
            debug_assert!((0..nv).all(|v| self.genus[v] == self.genus[inv(&p, v)]));
            let mut mapped: Vec<(usize, usize)> = self
                .edges
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (p[a], p[b]);
                    (x.min(y), x.max(y))
                })
                .collect();
            mapped.sort_unstable();
            if target.contains(&mapped) {
                count += 1;
            }
        }
        count * base
    }
}

fn factorial(m: u64) -> u64 {
    (1..=m).product()
}

fn inv(p: &[usize], v: usize) -> usize {
    p.iter().position(|&x| x == v).unwrap()
}

fn permute_all<F: FnMut(&[usize])>(perm: &mut Vec<usize>, k: usize, f: &mut F) {
    if k == perm.len() {
        f(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute_all(perm, k + 1, f);
        perm.swap(k, i);
    }
}

/// All connected stable graphs of genus `g` with `n` labeled legs, one
/// representative per isomorphism class, in deterministic order.
pub fn enumerate_stable_graphs(g: u32, n: usize) -> Result<Arc<Vec<StableGraph>>, ModGraphError> {
    let max_edges = 2 * g as usize + n.saturating_sub(1); // never binding
    enumerate_stable_graphs_bounded(g, n, max_edges)
}

/// Stable graphs as in [`enumerate_stable_graphs`], restricted to at
/// most `max_edges` edges.  Callers that only consume a bounded-degree
/// part of a class (such as the degree-`g` spanning-tree expansion,
/// which kills every graph with more than `g` edges) avoid paying for
/// the full stratification this way.
pub fn enumerate_stable_graphs_bounded(
    g: u32,
    n: usize,
    max_edges: usize,
) -> Result<Arc<Vec<StableGraph>>, ModGraphError> {
    if 2 * g as i64 - 2 + n as i64 <= 0 {
        return Err(ModGraphError::UnstablePair(g, n));
    }
    static CACHE: Lazy<Mutex<BTreeMap<(u32, usize, usize), Arc<Vec<StableGraph>>>>> =
        Lazy::new(|| Mutex::new(BTreeMap::new()));
    if let Some(hit) = CACHE.lock().unwrap().get(&(g, n, max_edges)) {
        return Ok(hit.clone());
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let max_v = (2 * g as usize + n).saturating_sub(2).max(1);
    for nv in 1..=max_v {
        for b in 0..=g as usize {
            let e_total = nv - 1 + b;
            if e_total > max_edges {
                continue;
            }
            for genera in compositions((g as usize - b) as u64, nv) {
                for legs in leg_assignments(n, nv) {
                    // minimum extra degree each vertex needs for stability
                    // (and ≥1 edge end for connectivity when nv > 1)
                    let mut min_deg = vec![0i64; nv];
                    let mut feasible = true;
                    for v in 0..nv {
                        let legs_v = legs.iter().filter(|&&w| w == v).count() as i64;
                        let mut need = 3 - 2 * genera[v] as i64 - legs_v;
                        if nv > 1 {
                            need = need.max(1);
                        }
                        min_deg[v] = need.max(0);
                        if min_deg[v] > 2 * e_total as i64 {
                            feasible = false;
                        }
                    }
                    if !feasible || min_deg.iter().sum::<i64>() > 2 * e_total as i64 {
                        continue;
                    }
                    for edges in edge_multisets(nv, e_total, &min_deg, true) {
                        let graph = StableGraph::new(
                            genera.iter().map(|&x| x as u32).collect(),
                            legs.clone(),
                            edges,
                        );
                        if !graph.is_stable() || !graph.is_connected() {
                            continue;
                        }
                        if seen.insert(graph.canonical_key()) {
                            out.push(graph);
                        }
                    }
                }
            }
        }
    }
    out.sort();
    let arc = Arc::new(out);
    CACHE
        .lock()
        .unwrap()
        .entry((g, n, max_edges))
        .or_insert_with(|| arc.clone());
    Ok(arc)
}

/// Ordered compositions of `total` into `parts` nonnegative summands.
pub(crate) fn compositions(total: u64, parts: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur = vec![0u64; parts];
    fn rec(out: &mut Vec<Vec<u64>>, cur: &mut Vec<u64>, idx: usize, left: u64) {
        if idx + 1 == cur.len() {
            cur[idx] = left;
            out.push(cur.clone());
            return;
        }
        for x in 0..=left {
            cur[idx] = x;
            rec(out, cur, idx + 1, left - x);
        }
    }
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(&mut out, &mut cur, 0, total);
    out
}

/// All functions from `n` legs to `nv` vertices.
pub(crate) fn leg_assignments(n: usize, nv: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    loop {
        out.push(cur.clone());
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            cur[i] += 1;
            if cur[i] < nv {
                break;
            }
            cur[i] = 0;
            i += 1;
        }
    }
}

/// Edge multisets of given size over vertex pairs, meeting per-vertex
/// minimum edge-end counts; pairs are normalized `(min, max)`.
pub(crate) fn edge_multisets(
    nv: usize,
    e_total: usize,
    min_deg: &[i64],
    allow_loops: bool,
) -> Vec<Vec<(usize, usize)>> {
    let mut pairs = Vec::new();
    for a in 0..nv {
        for b in a..nv {
            if a == b && !allow_loops {
                continue;
            }
            pairs.push((a, b));
        }
    }
    let mut out = Vec::new();
    let mut deg = vec![0i64; nv];
    let mut cur: Vec<(usize, usize)> = Vec::new();
    fn rec(
        pairs: &[(usize, usize)],
        idx: usize,
        left: usize,
        deg: &mut Vec<i64>,
        min_deg: &[i64],
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        // feasibility: remaining ends must cover remaining minimums reachable
        // through the remaining pairs
        let deficit: i64 = deg
            .iter()
            .zip(min_deg)
            .map(|(&d, &m)| (m - d).max(0))
            .sum();
        if deficit > 2 * left as i64 {
            return;
        }
        if idx == pairs.len() {
            if left == 0 && deficit == 0 {
                out.push(cur.clone());
            }
            return;
        }
        // also require vertices only touched by already-passed pairs to be done
        let (a, b) = pairs[idx];
        for v in 0..deg.len() {
            if deg[v] < min_deg[v] && !pairs[idx..].iter().any(|&(x, y)| x == v || y == v) {
                return;
            }
        }
        for m in 0..=left {
            if m > 0 {
                deg[a] += 1;
                deg[b] += 1;
                cur.push((a, b));
            }
            rec(pairs, idx + 1, left - m, deg, min_deg, cur, out);
            if m == left {
                // undo all m additions before returning
                for _ in 0..m {
                    deg[a] -= 1;
                    deg[b] -= 1;
                    cur.pop();
                }
            }
        }
    }
    rec(&pairs, 0, e_total, &mut deg, min_deg, &mut cur, &mut out);
    out
}
