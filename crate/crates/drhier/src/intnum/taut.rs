//! Class-level tautological expressions on moduli of stable curves.
//!
//! A [`TautExpr`] is a finite linear combination, with polynomial
//! coefficients, of boundary pushforwards of monomials in ψ-, κ- and
//! λ-classes attached to the vertices of stable graphs.  The module
//! provides exact products with ψ-, κ-, λ- and boundary-divisor classes,
//! elimination of λ- and κ-decorations in favour of ψ-classes (the
//! "reduction" route), forgetful pushforwards, and exact integration
//! against the fundamental class.
//!
//! No automorphism normalisations are applied to stored terms: a term's
//! coefficient is exactly the multiple of the pushforward it denotes.
//! Boundary-divisor products therefore generate *ordered* one-edge
//! degenerations weighted by 1/2, which reproduces the usual unordered
//! sum with its stack factors.

use std::collections::BTreeSet;

use num::{BigRational, One, Zero};

use crate::exactalg::{ExactScalar, MultiPoly, VarSet};
use crate::modgraph::{HalfEdgePos, StableGraph};

use super::hodge;
use super::IntNumError;

fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// A stable graph together with ψ-, κ- and λ-decorations on its vertices.
///
/// ψ-exponents live on half-edges: `psi_leg[i]` on leg `i`, and
/// `psi_tail[e]` / `psi_head[e]` on the two ends of edge `e`.  Each vertex
/// carries a multiset `kappa[v]` of κ-indices (all ≥ 1; κ₀ is a scalar
/// and is folded into coefficients) and at most one λ-index `lambda[v]`
/// (`Some(k)` with `1 ≤ k ≤ genus(v)`).
///
/// The last `phantom` legs are not marked points of the ambient moduli:
/// they record points that a κ-elimination introduced and whose
/// forgetful pushforward is implicit.  Degrees and integrals account for
/// them automatically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoratedGraph {
    pub graph: StableGraph,
    pub phantom: usize,
    pub psi_leg: Vec<u32>,
    pub psi_tail: Vec<u32>,
    pub psi_head: Vec<u32>,
    pub kappa: Vec<Vec<u32>>,
    pub lambda: Vec<Option<u32>>,
}

impl DecoratedGraph {
    /// The undecorated pushforward of the fundamental class of a graph.
    pub fn undecorated(graph: StableGraph) -> Self {
        let nv = graph.num_vertices();
        let nl = graph.num_legs();
        let ne = graph.num_edges();
        DecoratedGraph {
            graph,
            phantom: 0,
            psi_leg: vec![0; nl],
            psi_tail: vec![0; ne],
            psi_head: vec![0; ne],
            kappa: vec![Vec::new(); nv],
            lambda: vec![None; nv],
        }
    }

    /// Cohomological degree of the class this term denotes on the
    /// ambient moduli (each phantom leg lowers the degree by one).
    pub fn degree(&self) -> i64 {
        let psis: i64 = self
            .psi_leg
            .iter()
            .chain(self.psi_tail.iter())
            .chain(self.psi_head.iter())
            .map(|&x| x as i64)
            .sum();
        let kappas: i64 = self.kappa.iter().flatten().map(|&x| x as i64).sum();
        let lambdas: i64 = self.lambda.iter().flatten().map(|&x| x as i64).sum();
        self.graph.num_edges() as i64 + psis + kappas + lambdas - self.phantom as i64
    }

    fn psi_at(&self, p: HalfEdgePos) -> u32 {
        match p {
            HalfEdgePos::Leg(i) => self.psi_leg[i],
            HalfEdgePos::Tail(e) => self.psi_tail[e],
            HalfEdgePos::Head(e) => self.psi_head[e],
        }
    }

    fn bump_psi(&mut self, p: HalfEdgePos, by: i64) {
        let slot = match p {
            HalfEdgePos::Leg(i) => &mut self.psi_leg[i],
            HalfEdgePos::Tail(e) => &mut self.psi_tail[e],
            HalfEdgePos::Head(e) => &mut self.psi_head[e],
        };
        *slot = (*slot as i64 + by) as u32;
    }

    fn well_formed(&self) -> bool {
        let nv = self.graph.num_vertices();
        self.psi_leg.len() == self.graph.num_legs()
            && self.psi_tail.len() == self.graph.num_edges()
            && self.psi_head.len() == self.graph.num_edges()
            && self.kappa.len() == nv
            && self.lambda.len() == nv
            && self.phantom <= self.graph.num_legs()
            && self.kappa.iter().flatten().all(|&b| b >= 1)
            && (0..nv).all(|v| match self.lambda[v] {
                None => true,
                Some(k) => k >= 1 && k <= self.graph.vertex_genus(v),
            })
    }
}

/// A boundary divisor class of the ambient moduli, named by how a
/// one-edge degeneration along it splits the curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundarySpec {
    /// The divisor of irreducible nodal curves (the edge closes a cycle).
    Irreducible,
    /// A separating node; one side carries `genus` and the marked points
    /// in `legs` (either side may be named).
    Separating { genus: u32, legs: BTreeSet<usize> },
}

/// Classify one edge of a graph as a degeneration of the ambient moduli:
/// contract every other edge and see whether the chosen edge closes a
/// cycle or separates, and if it separates, what the tail side carries.
fn edge_ambient_type(graph: &StableGraph, edge: usize) -> BoundarySpec {
    let nv = graph.num_vertices();
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (e, &(a, b)) in graph.edges().iter().enumerate() {
        if e == edge {
            continue;
        }
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let (t, h) = graph.edges()[edge];
    if find(&mut parent, t) == find(&mut parent, h) {
        return BoundarySpec::Irreducible;
    }
    let tail_root = find(&mut parent, t);
    let tail_side: Vec<bool> = (0..nv).map(|v| find(&mut parent, v) == tail_root).collect();
    let mut genus: u32 = (0..nv).filter(|&v| tail_side[v]).map(|v| graph.vertex_genus(v)).sum();
    let mut internal_edges = 0u32;
    for (e, &(a, b)) in graph.edges().iter().enumerate() {
        if e != edge && tail_side[a] && tail_side[b] {
            internal_edges += 1;
        }
    }
    let vertices = tail_side.iter().filter(|&&s| s).count() as u32;
    genus += internal_edges + 1 - vertices;
    let legs: BTreeSet<usize> = (0..graph.num_legs())
        .filter(|&i| tail_side[graph.leg_vertex(i)])
        .collect();
    BoundarySpec::Separating { genus, legs }
}

fn spec_matches(spec: &BoundarySpec, got: &BoundarySpec, ambient_g: u32, n: usize) -> bool {
    match (spec, got) {
        (BoundarySpec::Irreducible, BoundarySpec::Irreducible) => true,
        (
            BoundarySpec::Separating { genus: sg, legs: sl },
            BoundarySpec::Separating { genus: gg, legs: gl },
        ) => {
            if sg == gg && sl == gl {
                return true;
            }
            let comp_legs: BTreeSet<usize> = (0..n).filter(|i| !sl.contains(i)).collect();
            *gg == ambient_g - sg && *gl == comp_legs
        }
        _ => false,
    }
}

/// All ordered one-edge separating degenerations at vertex `v`: a new
/// vertex is appended, a chosen genus and a chosen subset of `v`'s
/// half-edges move to it, and a new edge joins the two.  κ-decorations
/// of `v` distribute over both sides in all ways; a λ-index k splits as
/// Σ_{i+j=k} λ_i ⊗ λ_j (truncated by the genus of each side).  Both
/// sides must stay stable.
fn ordered_vertex_splits(dg: &DecoratedGraph, v: usize) -> Vec<DecoratedGraph> {
    let g = &dg.graph;
    let gv = g.vertex_genus(v);
    let pos = g.vertex_half_edges(v);
    let nv_old = g.num_vertices();
    let mut out = Vec::new();
    for gb in 0..=gv {
        let ga = gv - gb;
        for mask in 0u64..(1u64 << pos.len()) {
            let going: Vec<bool> = (0..pos.len()).map(|i| mask >> i & 1 == 1).collect();
            let count_b = going.iter().filter(|&&b| b).count() as i64;
            let count_a = pos.len() as i64 - count_b;
            if 2 * ga as i64 - 2 + count_a + 1 <= 0 || 2 * gb as i64 - 2 + count_b + 1 <= 0 {
                continue;
            }
            let vb = nv_old;
            let mut genus: Vec<u32> = (0..nv_old).map(|w| g.vertex_genus(w)).collect();
            genus[v] = ga;
            genus.push(gb);
            let mut legs: Vec<usize> = (0..g.num_legs()).map(|i| g.leg_vertex(i)).collect();
            let mut edges: Vec<(usize, usize)> = g.edges().to_vec();
            for (i, &p) in pos.iter().enumerate() {
                if !going[i] {
                    continue;
                }
                match p {
                    HalfEdgePos::Leg(l) => legs[l] = vb,
                    HalfEdgePos::Tail(e) => edges[e].0 = vb,
                    HalfEdgePos::Head(e) => edges[e].1 = vb,
                }
            }
            edges.push((v, vb));
            let mut base = dg.clone();
            base.graph = StableGraph::new(genus, legs, edges);
            base.psi_tail.push(0);
            base.psi_head.push(0);
            base.kappa.push(Vec::new());
            base.lambda.push(None);
            let kap = std::mem::take(&mut base.kappa[v]);
            for kmask in 0u64..(1u64 << kap.len()) {
                let mut t = base.clone();
                for (i, &b) in kap.iter().enumerate() {
                    if kmask >> i & 1 == 1 {
                        t.kappa[vb].push(b);
                    } else {
                        t.kappa[v].push(b);
                    }
                }
                t.kappa[v].sort_unstable();
                t.kappa[vb].sort_unstable();
                match t.lambda[v] {
                    None => out.push(t),
                    Some(k) => {
                        for i in 0..=k {
                            let j = k - i;
                            if i > ga || j > gb {
                                continue;
                            }
                            let mut s = t.clone();
                            s.lambda[v] = if i > 0 { Some(i) } else { None };
                            s.lambda[vb] = if j > 0 { Some(j) } else { None };
                            out.push(s);
                        }
                    }
                }
            }
        }
    }
    out
}

/// The one-edge non-separating degeneration at vertex `v` (genus drops
/// by one, a loop appears).  A λ-index on `v` survives only up to the
/// reduced genus; otherwise the term vanishes.
fn vertex_loops(dg: &DecoratedGraph, v: usize) -> Vec<DecoratedGraph> {
    let g = &dg.graph;
    let gv = g.vertex_genus(v);
    if gv == 0 {
        return Vec::new();
    }
    if let Some(k) = dg.lambda[v] {
        if k > gv - 1 {
            return Vec::new();
        }
    }
    let mut genus: Vec<u32> = (0..g.num_vertices()).map(|w| g.vertex_genus(w)).collect();
    genus[v] = gv - 1;
    let legs: Vec<usize> = (0..g.num_legs()).map(|i| g.leg_vertex(i)).collect();
    let mut edges: Vec<(usize, usize)> = g.edges().to_vec();
    edges.push((v, v));
    let mut t = dg.clone();
    t.graph = StableGraph::new(genus, legs, edges);
    t.psi_tail.push(0);
    t.psi_head.push(0);
    vec![t]
}

/// Expand one λ₁ factor at vertex `v` into ψ-, κ- and boundary terms:
/// λ₁ = (κ₁ − Σ ψ + (1/2) Σ nodes)/12, with the node sum running over
/// the loop at `v` and all ordered splits of `v` (each weighted 1/24).
/// `remaining` is a λ-index left in place on `v` for iterated use.
fn expand_vertex_lambda1(
    dg: &DecoratedGraph,
    v: usize,
    remaining: Option<u32>,
) -> Vec<(DecoratedGraph, BigRational)> {
    let mut base = dg.clone();
    base.lambda[v] = remaining;
    let mut out = Vec::new();
    let mut with_kappa = base.clone();
    with_kappa.kappa[v].push(1);
    with_kappa.kappa[v].sort_unstable();
    out.push((with_kappa, q(1, 12)));
    for p in base.graph.vertex_half_edges(v) {
        let mut t = base.clone();
        t.bump_psi(p, 1);
        out.push((t, q(-1, 12)));
    }
    for t in vertex_loops(&base, v) {
        out.push((t, q(1, 24)));
    }
    for t in ordered_vertex_splits(&base, v) {
        out.push((t, q(1, 24)));
    }
    out
}

/// A linear combination of decorated-graph terms on a fixed ambient
/// moduli of stable curves, with coefficients in a polynomial ring.
#[derive(Debug, Clone)]
pub struct TautExpr {
    ambient: (u32, usize),
    vars: VarSet,
    terms: Vec<(DecoratedGraph, MultiPoly)>,
}

impl TautExpr {
    /// The fundamental class of the moduli of genus-`g` curves with `n`
    /// marked points, with coefficients in the scalar ring.
    pub fn fundamental(g: u32, n: usize) -> Self {
        Self::fundamental_with_vars(g, n, &VarSet::new(Vec::<String>::new()))
    }

    /// The fundamental class with coefficients in the given ring.
    pub fn fundamental_with_vars(g: u32, n: usize, vars: &VarSet) -> Self {
        let graph = StableGraph::smooth(g, n);
        TautExpr {
            ambient: (g, n),
            vars: vars.clone(),
            terms: vec![(DecoratedGraph::undecorated(graph), MultiPoly::one(vars))],
        }
    }

    /// The empty (zero) expression.
    pub fn zero(g: u32, n: usize, vars: &VarSet) -> Self {
        TautExpr { ambient: (g, n), vars: vars.clone(), terms: Vec::new() }
    }

    /// Ambient (genus, number of marked points).
    pub fn ambient(&self) -> (u32, usize) {
        self.ambient
    }

    /// The coefficient ring's variables.
    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    /// The stored terms.
    pub fn terms(&self) -> &[(DecoratedGraph, MultiPoly)] {
        &self.terms
    }

    /// Append a term.  The graph's total genus and ambient legs must
    /// match the expression's ambient moduli.
    pub fn push(&mut self, dg: DecoratedGraph, coeff: MultiPoly) {
        debug_assert!(dg.well_formed(), "malformed decorated graph");
        debug_assert_eq!(dg.graph.total_genus(), self.ambient.0);
        debug_assert_eq!(dg.graph.num_legs() - dg.phantom, self.ambient.1);
        if !coeff.is_zero() {
            self.terms.push((dg, coeff));
        }
    }

    /// Sum of two expressions over the same ambient moduli.
    pub fn add(&self, other: &TautExpr) -> TautExpr {
        assert_eq!(self.ambient, other.ambient);
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    /// Multiply every coefficient by a polynomial.
    pub fn scale(&self, factor: &MultiPoly) -> TautExpr {
        let terms = self
            .terms
            .iter()
            .map(|(dg, c)| (dg.clone(), c * factor))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        TautExpr { ambient: self.ambient, vars: self.vars.clone(), terms }
    }

    /// Multiply by ψ_leg^pow.  Restriction to a stratum turns the
    /// ambient ψ-class into the vertex ψ-class at the same leg, so this
    /// is a per-term exponent bump.
    pub fn mul_psi(&self, leg: usize, pow: u32) -> TautExpr {
        assert!(leg < self.ambient.1, "ψ-class at an unknown marked point");
        let mut out = self.clone();
        for (dg, _) in &mut out.terms {
            dg.psi_leg[leg] += pow;
        }
        out
    }

    /// Multiply by the ambient κ_a (a ≥ 1), which restricts to a stratum
    /// as the sum of the vertex κ_a classes.
    pub fn mul_kappa(&self, a: u32) -> TautExpr {
        assert!(a >= 1, "κ₀ is the scalar 2g−2+n, not a class");
        let mut terms = Vec::new();
        for (dg, coeff) in &self.terms {
            for v in 0..dg.graph.num_vertices() {
                let mut t = dg.clone();
                t.kappa[v].push(a);
                t.kappa[v].sort_unstable();
                terms.push((t, coeff.clone()));
            }
        }
        TautExpr { ambient: self.ambient, vars: self.vars.clone(), terms }
    }

    /// Multiply by the ambient λ_k.  The Hodge bundle restricts to a
    /// stratum as the sum of the vertex Hodge bundles, so λ_k distributes
    /// as Σ λ_{k_v} over the vertices with Σ k_v = k, each part capped by
    /// the vertex genus.  Terms already carrying λ-decorations are not
    /// supported (reduce them first).
    pub fn mul_lambda(&self, k: u32) -> TautExpr {
        if k == 0 {
            return self.clone();
        }
        let mut terms = Vec::new();
        for (dg, coeff) in &self.terms {
            assert!(
                dg.lambda.iter().all(|l| l.is_none()),
                "λ-product on a term that already carries λ-decorations"
            );
            let nv = dg.graph.num_vertices();
            let mut parts = vec![0u32; nv];
            distribute_lambda(dg, coeff, k, 0, &mut parts, &mut terms);
        }
        TautExpr { ambient: self.ambient, vars: self.vars.clone(), terms }
    }

    /// Multiply by a boundary divisor class.  Terms already lying in the
    /// divisor pick up an excess factor −ψ′−ψ″ at each matching node;
    /// the transverse part degenerates one vertex at a time, with every
    /// ordered one-edge degeneration of the right type weighted by 1/2.
    pub fn mul_boundary(&self, spec: &BoundarySpec) -> TautExpr {
        let (g, n) = self.ambient;
        if let BoundarySpec::Separating { genus, legs } = spec {
            assert!(*genus <= g && legs.iter().all(|&l| l < n));
        }
        let half = MultiPoly::scalar(&self.vars, ExactScalar::from_ratio(1, 2));
        let mut terms: Vec<(DecoratedGraph, MultiPoly)> = Vec::new();
        for (dg, coeff) in &self.terms {
            assert_eq!(dg.phantom, 0, "boundary products require κ-free phantom-0 terms");
            for e in 0..dg.graph.num_edges() {
                if spec_matches(spec, &edge_ambient_type(&dg.graph, e), g, n) {
                    let mut a = dg.clone();
                    a.psi_tail[e] += 1;
                    terms.push((a, -coeff));
                    let mut b = dg.clone();
                    b.psi_head[e] += 1;
                    terms.push((b, -coeff));
                }
            }
            let halved = coeff * &half;
            for v in 0..dg.graph.num_vertices() {
                if matches!(spec, BoundarySpec::Irreducible) {
                    for t in vertex_loops(dg, v) {
                        terms.push((t, halved.clone()));
                    }
                }
                for t in ordered_vertex_splits(dg, v) {
                    let e_new = t.graph.num_edges() - 1;
                    if spec_matches(spec, &edge_ambient_type(&t.graph, e_new), g, n) {
                        terms.push((t, halved.clone()));
                    }
                }
            }
        }
        TautExpr { ambient: self.ambient, vars: self.vars.clone(), terms }
    }

    /// Rewrite every term without λ- or κ-decorations: λ-indices are
    /// expanded into ψ-, κ- and boundary classes, and κ-indices are
    /// traded for ψ-powers at phantom legs via the forgetful-pullback
    /// inclusion–exclusion.  The class is unchanged.
    pub fn taut_reduce(&self) -> Result<TautExpr, IntNumError> {
        let mut work: Vec<(DecoratedGraph, MultiPoly)> = self.terms.clone();
        let mut lambda_free: Vec<(DecoratedGraph, MultiPoly)> = Vec::new();
        while let Some((dg, coeff)) = work.pop() {
            let target = (0..dg.graph.num_vertices()).find(|&v| dg.lambda[v].is_some());
            let Some(v) = target else {
                lambda_free.push((dg, coeff));
                continue;
            };
            let k = dg.lambda[v].unwrap();
            let gv = dg.graph.vertex_genus(v);
            debug_assert!(k >= 1 && k <= gv);
            if gv > 2 {
                return Err(IntNumError::GenusOutOfRange(gv));
            }
            let pieces: Vec<(DecoratedGraph, BigRational)> = match k {
                1 => expand_vertex_lambda1(&dg, v, None),
                2 => expand_vertex_lambda1(&dg, v, Some(1))
                    .into_iter()
                    .map(|(t, c)| (t, c * q(1, 2)))
                    .collect(),
                _ => unreachable!("λ-index exceeds the genus-2 vertex cap"),
            };
            for (t, c) in pieces {
                work.push((t, coeff.scale(&ExactScalar::from_rational(c))));
            }
        }
        let mut work = lambda_free;
        let mut done: Vec<(DecoratedGraph, MultiPoly)> = Vec::new();
        while let Some((dg, coeff)) = work.pop() {
            let target = (0..dg.graph.num_vertices()).find(|&v| !dg.kappa[v].is_empty());
            let Some(v) = target else {
                done.push((dg, coeff));
                continue;
            };
            let mut kap = dg.kappa[v].clone();
            kap.sort_unstable();
            let top = kap.pop().unwrap();
            for smask in 0u64..(1u64 << kap.len()) {
                let mut merged = top;
                let mut rest = Vec::new();
                let mut size = 0u32;
                for (i, &b) in kap.iter().enumerate() {
                    if smask >> i & 1 == 1 {
                        merged += b;
                        size += 1;
                    } else {
                        rest.push(b);
                    }
                }
                let g = &dg.graph;
                let mut genus: Vec<u32> = (0..g.num_vertices()).map(|w| g.vertex_genus(w)).collect();
                let mut legs: Vec<usize> = (0..g.num_legs()).map(|i| g.leg_vertex(i)).collect();
                legs.push(v);
                let mut t = dg.clone();
                t.graph = StableGraph::new(std::mem::take(&mut genus), legs, g.edges().to_vec());
                t.kappa[v] = rest;
                t.psi_leg.push(merged + 1);
                t.phantom += 1;
                let sign = if size % 2 == 0 { 1 } else { -1 };
                work.push((t, coeff.scale(&ExactScalar::from_int(sign))));
            }
        }
        Ok(TautExpr { ambient: self.ambient, vars: self.vars.clone(), terms: done })
    }

    /// Pushforward along the map forgetting marked point `leg`.
    /// ψ-powers at the forgotten point become κ-classes at its vertex;
    /// a bare point is removed by the string relation or, on a
    /// three-pointed rational vertex, by contracting the vertex away.
    pub fn pushforward_forget(&self, leg: usize) -> Result<TautExpr, IntNumError> {
        let (g, n) = self.ambient;
        assert!(leg < n, "forgetting an unknown marked point");
        if 2 * g as i64 - 2 + (n as i64 - 1) <= 0 {
            return Err(IntNumError::DimensionMismatch(format!(
                "no moduli of genus-{g} curves with {} points to push onto",
                n - 1
            )));
        }
        let mut terms: Vec<(DecoratedGraph, MultiPoly)> = Vec::new();
        for (dg, coeff) in &self.terms {
            let v = dg.graph.leg_vertex(leg);
            let gv = dg.graph.vertex_genus(v);
            let val = dg.graph.valence(v);
            let b = dg.psi_leg[leg];
            if 2 * gv as i64 - 2 + (val as i64 - 1) > 0 {
                // The vertex stays stable: ψ^b at the forgotten point and
                // the vertex κ-classes trade through κ^{new} = κ^{old} + ψ^. .
                let kap = dg.kappa[v].clone();
                for tmask in 0u64..(1u64 << kap.len()) {
                    let mut e: u32 = b;
                    let mut rest = Vec::new();
                    for (i, &c) in kap.iter().enumerate() {
                        if tmask >> i & 1 == 1 {
                            e += c;
                        } else {
                            rest.push(c);
                        }
                    }
                    if e == 0 {
                        continue;
                    }
                    let mut t = delete_leg(dg, leg);
                    t.kappa[v] = rest;
                    let mut c = coeff.clone();
                    if e >= 2 {
                        t.kappa[v].push(e - 1);
                        t.kappa[v].sort_unstable();
                    } else {
                        let kappa0 = 2 * gv as i64 - 2 + (val as i64 - 1);
                        c = c.scale(&ExactScalar::from_int(kappa0));
                    }
                    terms.push((t, c));
                }
                if b == 0 {
                    // Bare point: the string relation spreads it over the
                    // other points of the same vertex.
                    for p in dg.graph.vertex_half_edges(v) {
                        if p == HalfEdgePos::Leg(leg) || dg.psi_at(p) == 0 {
                            continue;
                        }
                        let mut t = dg.clone();
                        t.bump_psi(p, -1);
                        terms.push((delete_leg(&t, leg), coeff.clone()));
                    }
                }
            } else {
                // A three-pointed rational vertex gets contracted away.
                debug_assert!(gv == 0 && val == 3 && dg.lambda[v].is_none());
                if dg.kappa[v].iter().any(|&c| c >= 1) || b >= 1 {
                    continue; // positive-degree classes on a point vanish
                }
                let others: Vec<HalfEdgePos> = dg
                    .graph
                    .vertex_half_edges(v)
                    .into_iter()
                    .filter(|&p| p != HalfEdgePos::Leg(leg))
                    .collect();
                if others.iter().any(|&p| dg.psi_at(p) >= 1) {
                    continue;
                }
                terms.push((contract_vertex(dg, v, leg, &others), coeff.clone()));
            }
        }
        Ok(TautExpr { ambient: (g, n - 1), vars: self.vars.clone(), terms })
    }

    /// Integrate against the fundamental class of the ambient moduli:
    /// each term factors into per-vertex Hodge integrals (phantom legs
    /// are integrated out implicitly).  Terms of wrong degree are an
    /// error; vertex integrals of wrong degree vanish only when the term
    /// as a whole has ambient top degree.
    pub fn integrate(&self) -> Result<MultiPoly, IntNumError> {
        self.integrate_with_lambdas(&[])
    }

    /// Integrate the product of this expression with a product of
    /// ambient λ-classes `∏ᵢ λ_{extra[i]}`.  The Hodge bundle restricts
    /// to a boundary stratum as the direct sum of the vertex Hodge
    /// bundles (the remaining cycle part is trivial), so each ambient
    /// λ_k distributes over the vertices as Σ ∏ᵥ λ_{kᵥ} with Σkᵥ = k.
    pub fn integrate_with_lambdas(&self, extra: &[u32]) -> Result<MultiPoly, IntNumError> {
        let (g, n) = self.ambient;
        let dim = 3 * g as i64 - 3 + n as i64;
        let extra: Vec<u32> = extra.iter().copied().filter(|&k| k > 0).collect();
        let extra_deg: i64 = extra.iter().map(|&k| k as i64).sum();
        let mut acc = MultiPoly::zero(&self.vars);
        for (dg, coeff) in &self.terms {
            if coeff.is_zero() {
                continue;
            }
            if dg.degree() + extra_deg != dim {
                return Err(IntNumError::DimensionMismatch(format!(
                    "integrating a degree-{} class over a dimension-{dim} moduli",
                    dg.degree() + extra_deg
                )));
            }
            let nv = dg.graph.num_vertices();
            let genera: Vec<u32> = (0..nv).map(|v| dg.graph.vertex_genus(v)).collect();
            // λ_k vanishes on a vertex of genus < k, so cap each share.
            let mut splits: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
            splits = extra
                .iter()
                .map(|&k| compositions_bounded(k, &genera))
                .collect::<Vec<_>>()
                .into_iter()
                .fold(splits, |acc, options| {
                    let mut next = Vec::new();
                    for prefix in &acc {
                        for opt in &options {
                            let mut row = prefix.clone();
                            row.push(opt.clone());
                            next.push(row);
                        }
                    }
                    next
                });
            let mut total = BigRational::zero();
            for assignment in &splits {
                let mut prod = BigRational::one();
                for v in 0..nv {
                    let psis: Vec<u32> =
                        dg.graph.vertex_half_edges(v).iter().map(|&p| dg.psi_at(p)).collect();
                    let mut lams: Vec<u32> = dg.lambda[v].into_iter().collect();
                    for row in assignment {
                        if row[v] > 0 {
                            lams.push(row[v]);
                        }
                    }
                    let val = hodge::vertex_integral(genera[v], &psis, &dg.kappa[v], &lams)?;
                    if val.is_zero() {
                        prod = BigRational::zero();
                        break;
                    }
                    prod *= val;
                }
                total += prod;
            }
            if !total.is_zero() {
                acc += &coeff.scale(&ExactScalar::from_rational(total));
            }
        }
        Ok(acc)
    }
}

/// All ways to write `total` as an ordered sum of nonnegative parts
/// with `parts[i] ≤ bounds[i]`.
fn compositions_bounded(total: u32, bounds: &[u32]) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; bounds.len()];
    fn rec(total: u32, bounds: &[u32], idx: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if idx == bounds.len() {
            if total == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let rest: u32 = bounds[idx + 1..].iter().sum();
        let lo = total.saturating_sub(rest);
        for share in lo..=total.min(bounds[idx]) {
            cur[idx] = share;
            rec(total - share, bounds, idx + 1, cur, out);
        }
        cur[idx] = 0;
    }
    rec(total, bounds, 0, &mut cur, &mut out);
    out
}

/// Remove one leg label (the graph keeps its vertices and edges).
fn delete_leg(dg: &DecoratedGraph, leg: usize) -> DecoratedGraph {
    let g = &dg.graph;
    let genus: Vec<u32> = (0..g.num_vertices()).map(|w| g.vertex_genus(w)).collect();
    let mut legs: Vec<usize> = (0..g.num_legs()).map(|i| g.leg_vertex(i)).collect();
    legs.remove(leg);
    let mut t = dg.clone();
    t.graph = StableGraph::new(genus, legs, g.edges().to_vec());
    t.psi_leg.remove(leg);
    t
}

/// Contract away an undecorated three-pointed rational vertex `v` once
/// its leg `leg` is forgotten.  `others` are its two remaining
/// half-edge positions: a leg migrates across an edge (inheriting the
/// ψ-exponent of the far half), and two edge-ends splice into one edge.
fn contract_vertex(
    dg: &DecoratedGraph,
    v: usize,
    leg: usize,
    others: &[HalfEdgePos],
) -> DecoratedGraph {
    let g = &dg.graph;
    let far = |p: HalfEdgePos| -> (usize, u32) {
        match p {
            HalfEdgePos::Tail(e) => (g.edges()[e].1, dg.psi_head[e]),
            HalfEdgePos::Head(e) => (g.edges()[e].0, dg.psi_tail[e]),
            HalfEdgePos::Leg(_) => unreachable!("far end of a leg"),
        }
    };
    let edge_index = |p: HalfEdgePos| -> Option<usize> {
        match p {
            HalfEdgePos::Tail(e) | HalfEdgePos::Head(e) => Some(e),
            HalfEdgePos::Leg(_) => None,
        }
    };
    let genus: Vec<u32> =
        (0..g.num_vertices()).filter(|&w| w != v).map(|w| g.vertex_genus(w)).collect();
    let mut legs: Vec<usize> = (0..g.num_legs()).map(|i| g.leg_vertex(i)).collect();
    let mut psi_leg = dg.psi_leg.clone();
    let mut edges: Vec<(usize, usize)> = g.edges().to_vec();
    let mut psi_tail = dg.psi_tail.clone();
    let mut psi_head = dg.psi_head.clone();
    match (others[0], others[1]) {
        (HalfEdgePos::Leg(x), p) | (p, HalfEdgePos::Leg(x)) if edge_index(p).is_some() => {
            let (f, exp) = far(p);
            assert_ne!(f, v, "contraction of a vertex carrying a loop");
            legs[x] = f;
            psi_leg[x] = exp;
            let e = edge_index(p).unwrap();
            edges.remove(e);
            psi_tail.remove(e);
            psi_head.remove(e);
        }
        (p1, p2) => {
            let e1 = edge_index(p1).expect("contracting vertex with two marked points");
            let e2 = edge_index(p2).expect("contracting vertex with two marked points");
            assert_ne!(e1, e2, "contraction of a vertex carrying a loop");
            let (f1, exp1) = far(p1);
            let (f2, exp2) = far(p2);
            assert!(f1 != v && f2 != v, "contraction of a vertex carrying a loop");
            let (hi, lo) = if e1 > e2 { (e1, e2) } else { (e2, e1) };
            for e in [hi, lo] {
                edges.remove(e);
                psi_tail.remove(e);
                psi_head.remove(e);
            }
            edges.push((f1, f2));
            psi_tail.push(exp1);
            psi_head.push(exp2);
        }
    }
    legs.remove(leg);
    psi_leg.remove(leg);
    let re = |w: usize| if w > v { w - 1 } else { w };
    for w in legs.iter_mut() {
        *w = re(*w);
    }
    for (a, b) in edges.iter_mut() {
        *a = re(*a);
        *b = re(*b);
    }
    let mut kappa = dg.kappa.clone();
    kappa.remove(v);
    let mut lambda = dg.lambda.clone();
    lambda.remove(v);
    DecoratedGraph {
        graph: StableGraph::new(genus, legs, edges),
        phantom: dg.phantom,
        psi_leg,
        psi_tail,
        psi_head,
        kappa,
        lambda,
    }
}

fn distribute_lambda(
    dg: &DecoratedGraph,
    coeff: &MultiPoly,
    remaining: u32,
    v: usize,
    parts: &mut Vec<u32>,
    out: &mut Vec<(DecoratedGraph, MultiPoly)>,
) {
    let nv = dg.graph.num_vertices();
    if v == nv {
        if remaining != 0 {
            return;
        }
        let mut t = dg.clone();
        for (w, &k) in parts.iter().enumerate() {
            t.lambda[w] = if k > 0 { Some(k) } else { None };
        }
        out.push((t, coeff.clone()));
        return;
    }
    let cap = dg.graph.vertex_genus(v).min(remaining);
    for k in 0..=cap {
        parts[v] = k;
        distribute_lambda(dg, coeff, remaining - k, v + 1, parts, out);
    }
    parts[v] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(e: &TautExpr) -> BigRational {
        let p = e.integrate().expect("integrable expression");
        if p.is_zero() {
            return BigRational::zero();
        }
        let s = p.as_scalar().expect("scalar-valued integral");
        assert!(s.im().is_zero(), "rational-valued integral");
        s.re().clone()
    }

    fn sep(genus: u32, legs: &[usize]) -> BoundarySpec {
        BoundarySpec::Separating { genus, legs: legs.iter().copied().collect() }
    }

    #[test]
    fn fundamental_and_psi_products() {
        assert_eq!(ev(&TautExpr::fundamental(0, 3)), q(1, 1));
        assert_eq!(ev(&TautExpr::fundamental(1, 1).mul_psi(0, 1)), q(1, 24));
        assert_eq!(ev(&TautExpr::fundamental(0, 5).mul_psi(0, 1).mul_psi(1, 1)), q(2, 1));
        // Off-dimension integrands are caller bugs, not zeros.
        assert!(matches!(
            TautExpr::fundamental(1, 1).integrate(),
            Err(IntNumError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn boundary_divisor_products() {
        // Genus-degenerating divisor on the one-pointed elliptic moduli.
        let irr = TautExpr::fundamental(1, 1).mul_boundary(&BoundarySpec::Irreducible);
        assert_eq!(ev(&irr), q(1, 2));

        // The divisor splitting off both points on a rational component.
        let d0 = TautExpr::fundamental(1, 2).mul_boundary(&sep(0, &[0, 1]));
        assert_eq!(ev(&d0.mul_psi(0, 1)), q(0, 1));
        assert_eq!(ev(&d0.mul_lambda(1)), q(1, 24));

        // Restricting the genus-degenerating divisor to that stratum
        // leaves the loop degeneration of the genus-one component.
        let irr2 = d0.mul_boundary(&BoundarySpec::Irreducible);
        assert_eq!(ev(&irr2), q(1, 2));

        // The Hodge class vanishes on genus-degenerate strata.
        let irr_l = TautExpr::fundamental(1, 2)
            .mul_boundary(&BoundarySpec::Irreducible)
            .mul_lambda(1);
        assert_eq!(ev(&irr_l), q(0, 1));
    }

    #[test]
    fn divisor_self_intersections() {
        // Only the excess term −ψ′−ψ″ survives squaring the separating
        // divisor on the two-pointed elliptic moduli.
        let d0 = TautExpr::fundamental(1, 2).mul_boundary(&sep(0, &[0, 1]));
        assert_eq!(ev(&d0.mul_boundary(&sep(0, &[0, 1]))), q(-1, 24));

        // Squaring the non-separating divisor balances excess against
        // genuine codimension-two degenerations exactly.
        let irr = TautExpr::fundamental(1, 2).mul_boundary(&BoundarySpec::Irreducible);
        assert_eq!(ev(&irr.mul_boundary(&BoundarySpec::Irreducible)), q(0, 1));
    }

    #[test]
    fn lambda_reduction_routes_agree() {
        // Direct per-vertex Hodge integration vs. full reduction to
        // ψ-decorated graphs with phantom legs.
        let e = TautExpr::fundamental(1, 1).mul_lambda(1);
        assert_eq!(ev(&e), q(1, 24));
        let r = e.taut_reduce().unwrap();
        for (dg, _) in r.terms() {
            assert!(dg.lambda.iter().all(|l| l.is_none()));
            assert!(dg.kappa.iter().all(|k| k.is_empty()));
        }
        assert_eq!(ev(&r), q(1, 24));

        let e = TautExpr::fundamental(2, 1).mul_psi(0, 2).mul_lambda(2);
        assert_eq!(ev(&e), q(7, 5760));
        assert_eq!(ev(&e.taut_reduce().unwrap()), q(7, 5760));
    }

    #[test]
    fn iterated_lambda_cube_on_genus_two() {
        // λ·λ·λ with a full reduction between the products agrees with
        // the one-shot Hodge integral on the unpointed genus-2 moduli.
        let mut e = TautExpr::fundamental(2, 0);
        for _ in 0..3 {
            e = e.mul_lambda(1).taut_reduce().unwrap();
        }
        assert_eq!(ev(&e), q(1, 2880));
    }

    #[test]
    fn kappa_products_reduce_through_phantom_legs() {
        let e = TautExpr::fundamental(0, 5).mul_kappa(1).mul_kappa(1);
        assert_eq!(ev(&e), q(5, 1));
        let r = e.taut_reduce().unwrap();
        assert!(r.terms().iter().all(|(dg, _)| dg.kappa.iter().all(|k| k.is_empty())));
        assert!(r.terms().iter().any(|(dg, _)| dg.phantom > 0));
        assert_eq!(ev(&r), q(5, 1));

        let e = TautExpr::fundamental(1, 1).mul_kappa(1);
        assert_eq!(ev(&e), q(1, 24));
        assert_eq!(ev(&e.taut_reduce().unwrap()), q(1, 24));
    }

    #[test]
    fn lambda_top_kills_nonseparating_strata() {
        // Pushforwards from strata whose graph has a cycle die under
        // multiplication by the top Hodge class.
        let banana = StableGraph::new(vec![0, 0], vec![0, 1], vec![(0, 1), (0, 1)]);
        let mut e = TautExpr::zero(1, 2, &VarSet::new(Vec::<String>::new()));
        let one = MultiPoly::one(e.vars());
        e.push(DecoratedGraph::undecorated(banana), one.clone());
        assert!(e.mul_lambda(1).terms().is_empty());

        let loop_graph = StableGraph::new(vec![1], vec![], vec![(0, 0)]);
        let mut e = TautExpr::zero(2, 0, &VarSet::new(Vec::<String>::new()));
        e.push(DecoratedGraph::undecorated(loop_graph), one.clone());
        assert!(e.mul_lambda(2).terms().is_empty());
        assert!(!e.mul_lambda(1).terms().is_empty());
    }

    #[test]
    fn forgetful_pushforward_preserves_integrals() {
        // ψ-power at the forgotten point becomes a κ-class.
        let e = TautExpr::fundamental(1, 2).mul_psi(1, 2);
        let total = ev(&e);
        assert_eq!(total, q(1, 24));
        let pushed = e.pushforward_forget(1).unwrap();
        assert_eq!(pushed.ambient(), (1, 1));
        assert_eq!(ev(&pushed), total);
        assert!(pushed.terms().iter().any(|(dg, _)| dg.kappa[0] == vec![1]));

        // A linear ψ-power becomes the scalar 2g−2+n of the target.
        let e = TautExpr::fundamental(1, 2).mul_psi(1, 1).pushforward_forget(1).unwrap();
        assert_eq!(ev(&e.mul_psi(0, 1)), q(1, 24));

        // A bare point spreads over the remaining points.
        let e = TautExpr::fundamental(1, 2).mul_psi(0, 2);
        assert_eq!(ev(&e.pushforward_forget(1).unwrap()), ev(&e));

        // Forgetting below stability is an error.
        assert!(matches!(
            TautExpr::fundamental(1, 1).pushforward_forget(0),
            Err(IntNumError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn forgetful_pushforward_contracts_rational_vertices() {
        let vars = VarSet::new(Vec::<String>::new());
        let one = MultiPoly::one(&vars);

        // A leg migrates across the disappearing vertex and inherits the
        // ψ-exponent of the receiving half-edge.
        let graph = StableGraph::new(vec![0, 1], vec![0, 0, 1], vec![(0, 1)]);
        let mut dg = DecoratedGraph::undecorated(graph);
        dg.psi_head[0] = 2;
        let mut e = TautExpr::zero(1, 3, &vars);
        e.push(dg, one.clone());
        let direct = ev(&e);
        assert_eq!(direct, q(1, 24));
        let pushed = e.pushforward_forget(0).unwrap();
        assert_eq!(ev(&pushed), direct);
        let (t, _) = &pushed.terms()[0];
        assert_eq!(t.graph.num_vertices(), 1);
        assert_eq!(t.psi_leg, vec![2, 0]);

        // Two edge-ends splice into a single edge keeping the outer
        // ψ-exponents.
        let chain =
            StableGraph::new(vec![1, 0, 1], vec![0, 1], vec![(0, 1), (1, 2)]);
        let mut dg = DecoratedGraph::undecorated(chain);
        dg.psi_leg[0] = 1;
        dg.psi_tail[0] = 1;
        dg.psi_head[1] = 1;
        let mut e = TautExpr::zero(2, 2, &vars);
        e.push(dg, one.clone());
        let direct = ev(&e);
        assert_eq!(direct, q(1, 576));
        let pushed = e.pushforward_forget(1).unwrap();
        assert_eq!(ev(&pushed), direct);
        let (t, _) = &pushed.terms()[0];
        assert_eq!(t.graph.num_vertices(), 2);
        assert_eq!(t.graph.num_edges(), 1);
        assert_eq!((t.psi_tail[0], t.psi_head[0]), (1, 1));

        // Any positive-degree decoration on the contracted vertex kills
        // the term.
        let graph = StableGraph::new(vec![0, 1], vec![0, 0, 1], vec![(0, 1)]);
        let mut dg = DecoratedGraph::undecorated(graph);
        dg.psi_leg[1] = 1;
        dg.psi_head[0] = 1;
        let mut e = TautExpr::zero(1, 3, &vars);
        e.push(dg, one.clone());
        assert!(e.pushforward_forget(0).unwrap().terms().is_empty());
    }

    #[test]
    fn pushforward_on_boundary_classes() {
        // Forgetting a point on a separating divisor contracts the
        // rational component onto the smooth moduli.
        let e = TautExpr::fundamental(1, 3).mul_boundary(&sep(0, &[0, 1])).mul_psi(2, 2);
        let direct = ev(&e);
        assert_eq!(direct, q(1, 24));
        let pushed = e.pushforward_forget(0).unwrap();
        assert_eq!(ev(&pushed), direct);
    }
}
