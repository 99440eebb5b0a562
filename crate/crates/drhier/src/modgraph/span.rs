//! Spanning trees of stable graphs, together with the per-edge data the
//! cycle formula needs: for tree edges, the linear form (in leaf symbols)
//! summing the leaf weights ahead of the edge; for non-tree edges, the
//! signed sum of edge symbols around the cycle the edge closes.

use super::graph::StableGraph;
use num::bigint::BigInt;
use num::traits::{One, Zero};
use std::collections::BTreeMap;

/// One spanning tree of a graph, with flow data relative to the stored edge
/// orientations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    /// Sorted indices of the tree edges.
    pub tree_edges: Vec<usize>,
    /// For each tree edge `f`: coefficients over the leaf symbols of the sum
    /// of leaf weights at vertices ahead of `f` (on its head side).
    pub leaf_form: BTreeMap<usize, Vec<i64>>,
    /// For each non-tree edge `f`: signed coefficients over the edge symbols
    /// of the cycle closed by `f` (the edge itself appears with +1).
    pub cycle_form: BTreeMap<usize, Vec<i64>>,
}

/// All spanning trees, each with its flow data. Loops are never tree edges.
pub fn spanning_trees(g: &StableGraph) -> Vec<SpanningTree> {
    let nv = g.num_vertices();
    let ne = g.num_edges();
    let non_loops: Vec<usize> = (0..ne)
        .filter(|&i| {
            let (a, b) = g.edges()[i];
            a != b
        })
        .collect();
    let need = nv - 1;
    let mut out = Vec::new();
    let mut choice = Vec::new();
    subsets(&non_loops, need, 0, &mut choice, &mut |edges| {
        if !is_tree(g, edges) {
            return;
        }
        out.push(build_tree_data(g, edges));
    });
    out
}

fn subsets(
    pool: &[usize],
    k: usize,
    start: usize,
    cur: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]),
) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for i in start..pool.len() {
        cur.push(pool[i]);
        subsets(pool, k, i + 1, cur, f);
        cur.pop();
    }
}

fn is_tree(g: &StableGraph, edges: &[usize]) -> bool {
    let nv = g.num_vertices();
    let mut uf: Vec<usize> = (0..nv).collect();
    fn find(uf: &mut Vec<usize>, x: usize) -> usize {
        if uf[x] != x {
            let r = find(uf, uf[x]);
            uf[x] = r;
        }
        uf[x]
    }
    for &i in edges {
        let (a, b) = g.edges()[i];
        let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
        if ra == rb {
            return false;
        }
        uf[ra] = rb;
    }
    true
}

fn build_tree_data(g: &StableGraph, tree: &[usize]) -> SpanningTree {
    let nv = g.num_vertices();
    let ne = g.num_edges();
    let n = g.num_legs();
    let in_tree = |i: usize| tree.contains(&i);
    // adjacency over tree edges
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv]; // (neighbor, edge idx)
    for &i in tree {
        let (a, b) = g.edges()[i];
        adj[a].push((b, i));
        adj[b].push((a, i));
    }
    // leaf forms: component of head(f) in tree minus f
    let mut leaf_form = BTreeMap::new();
    for &f in tree {
        let (_, head) = g.edges()[f];
        let mut vis = vec![false; nv];
        let mut stack = vec![head];
        vis[head] = true;
        while let Some(v) = stack.pop() {
            for &(w, e) in &adj[v] {
                if e != f && !vis[w] {
                    vis[w] = true;
                    stack.push(w);
                }
            }
        }
        let mut coeffs = vec![0i64; n];
        for i in 0..n {
            if vis[g.leg_vertex(i)] {
                coeffs[i] += 1;
            }
        }
        leaf_form.insert(f, coeffs);
    }
    // cycle forms: walk from head(f) back to tail(f) through the tree
    let mut cycle_form = BTreeMap::new();
    for f in 0..ne {
        if in_tree(f) {
            continue;
        }
        let (tail, head) = g.edges()[f];
        let mut coeffs = vec![0i64; ne];
        coeffs[f] += 1;
        if tail != head {
            let path = tree_path(&adj, head, tail, nv);
            for (u, w, e) in path {
                let (et, eh) = g.edges()[e];
                // +1 when the stored orientation matches the walk direction
                coeffs[e] += if (et, eh) == (u, w) { 1 } else { -1 };
            }
        }
        cycle_form.insert(f, coeffs);
    }
    let mut tree_edges = tree.to_vec();
    tree_edges.sort_unstable();
    SpanningTree { tree_edges, leaf_form, cycle_form }
}

/// Path from `from` to `to` in the tree as (vertex, next vertex, edge) steps.
fn tree_path(
    adj: &[Vec<(usize, usize)>],
    from: usize,
    to: usize,
    nv: usize,
) -> Vec<(usize, usize, usize)> {
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; nv];
    let mut vis = vec![false; nv];
    let mut stack = vec![from];
    vis[from] = true;
    while let Some(v) = stack.pop() {
        if v == to {
            break;
        }
        for &(w, e) in &adj[v] {
            if !vis[w] {
                vis[w] = true;
                prev[w] = Some((v, e));
                stack.push(w);
            }
        }
    }
    let mut steps = Vec::new();
    let mut cur = to;
    while let Some((p, e)) = prev[cur] {
        steps.push((p, cur, e));
        cur = p;
    }
    steps.reverse();
    steps
}

/// Number of spanning trees by the matrix-tree determinant (loops ignored),
/// as an independent oracle for [`spanning_trees`].
pub fn kirchhoff_tree_count(g: &StableGraph) -> BigInt {
    let nv = g.num_vertices();
    if nv == 1 {
        return BigInt::one();
    }
    let mut lap = vec![vec![BigInt::zero(); nv]; nv];
    for &(a, b) in g.edges() {
        if a == b {
            continue;
        }
        lap[a][a] += 1;
        lap[b][b] += 1;
        lap[a][b] -= 1;
        lap[b][a] -= 1;
    }
    // determinant of the (0,0)-minor by fraction-free elimination
    let m = nv - 1;
    let mut mat: Vec<Vec<BigInt>> = (1..nv)
        .map(|i| (1..nv).map(|j| lap[i][j].clone()).collect())
        .collect();
    let mut det_denom = BigInt::one();
    let mut sign = BigInt::one();
    for col in 0..m {
        let Some(p) = (col..m).find(|&r| !mat[r][col].is_zero()) else {
            return BigInt::zero();
        };
        if p != col {
            mat.swap(p, col);
            sign = -sign;
        }
        for r in col + 1..m {
            for j in col + 1..m {
                let v = &mat[r][j] * &mat[col][col] - &mat[r][col] * &mat[col][j];
                mat[r][j] = &v / &det_denom;
            }
            mat[r][col] = BigInt::zero();
        }
        det_denom = mat[col][col].clone();
    }
    sign * mat[m - 1][m - 1].clone()
}
