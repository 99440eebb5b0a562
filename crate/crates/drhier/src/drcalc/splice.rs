//! Composition of tautological expressions along a fixed stable graph.
//!
//! Given an ambient stable graph and one expression per vertex — each
//! living on that vertex's own moduli, with its legs ordered like the
//! vertex's half-edge list — the boundary pushforward of the product
//! class is an expression on the ambient moduli.  Pushforwards compose,
//! so the result is assembled term by term: every combination of
//! per-vertex decorated graphs glues into a single decorated graph, the
//! vertex legs matched to ambient legs or edge ends, and the
//! coefficients multiply.  No automorphism factors appear here; they
//! belong to whoever sums over ambient graphs.

use crate::exactalg::{MultiPoly, VarSet};
use crate::intnum::{DecoratedGraph, TautExpr};
use crate::modgraph::{HalfEdgePos, StableGraph};

/// Glue per-vertex expressions into the ambient graph.  `parts[v]` must
/// match vertex `v` in genus and valence, with legs ordered like
/// `ambient.vertex_half_edges(v)`; phantom legs cannot be spliced.
pub(crate) fn splice(ambient: &StableGraph, parts: &[TautExpr]) -> TautExpr {
    let nv = ambient.num_vertices();
    assert_eq!(parts.len(), nv, "one expression per ambient vertex");
    let vars: VarSet =
        parts.first().map(|p| p.vars().clone()).unwrap_or_else(|| VarSet::new(Vec::<String>::new()));
    let half_edges: Vec<Vec<HalfEdgePos>> =
        (0..nv).map(|v| ambient.vertex_half_edges(v)).collect();
    for (v, part) in parts.iter().enumerate() {
        let (g, n) = part.ambient();
        assert_eq!(g, ambient.vertex_genus(v), "vertex genus mismatch");
        assert_eq!(n, half_edges[v].len(), "vertex valence mismatch");
    }

    let mut out = TautExpr::zero(ambient.total_genus(), ambient.num_legs(), &vars);
    if parts.iter().any(|p| p.terms().is_empty()) {
        return out;
    }

    let mut choice = vec![0usize; nv];
    loop {
        let terms: Vec<&(DecoratedGraph, MultiPoly)> =
            (0..nv).map(|v| &parts[v].terms()[choice[v]]).collect();

        let mut genera = Vec::new();
        let mut offsets = Vec::with_capacity(nv);
        for t in &terms {
            assert_eq!(t.0.phantom, 0, "cannot splice phantom legs");
            offsets.push(genera.len());
            let ig = &t.0.graph;
            genera.extend((0..ig.num_vertices()).map(|w| ig.vertex_genus(w)));
        }

        let mut edges = Vec::new();
        let mut psi_tail = Vec::new();
        let mut psi_head = Vec::new();
        let mut kappa = Vec::new();
        let mut lambda = Vec::new();
        for (v, t) in terms.iter().enumerate() {
            let ig = &t.0.graph;
            for (ei, &(a, b)) in ig.edges().iter().enumerate() {
                edges.push((a + offsets[v], b + offsets[v]));
                psi_tail.push(t.0.psi_tail[ei]);
                psi_head.push(t.0.psi_head[ei]);
            }
            kappa.extend(t.0.kappa.iter().cloned());
            lambda.extend(t.0.lambda.iter().cloned());
        }

        // An ambient half-edge at (vertex v, local slot j) lands on the
        // vertex of part v that carries local leg j, with that leg's
        // ψ-exponent.
        let slot = |v: usize, pos: HalfEdgePos| -> (usize, u32) {
            let j = half_edges[v].iter().position(|&p| p == pos).expect("half-edge of vertex");
            let t = &terms[v].0;
            (offsets[v] + t.graph.leg_vertex(j), t.psi_leg[j])
        };

        let mut legs = vec![0usize; ambient.num_legs()];
        let mut psi_leg = vec![0u32; ambient.num_legs()];
        for (i, slot_of_leg) in legs.iter_mut().enumerate() {
            let v = ambient.leg_vertex(i);
            let (ov, e) = slot(v, HalfEdgePos::Leg(i));
            *slot_of_leg = ov;
            psi_leg[i] = e;
        }
        for (ei, &(va, vb)) in ambient.edges().iter().enumerate() {
            let (ova, ea) = slot(va, HalfEdgePos::Tail(ei));
            let (ovb, eb) = slot(vb, HalfEdgePos::Head(ei));
            edges.push((ova, ovb));
            psi_tail.push(ea);
            psi_head.push(eb);
        }

        let graph = StableGraph::new(genera, legs, edges);
        let dg = DecoratedGraph { graph, phantom: 0, psi_leg, psi_tail, psi_head, kappa, lambda };
        let mut coeff = terms[0].1.clone();
        for t in &terms[1..] {
            coeff = &coeff * &t.1;
        }
        out.push(dg, coeff);

        // odometer over term choices
        let mut v = 0;
        loop {
            if v == nv {
                return out;
            }
            choice[v] += 1;
            if choice[v] < parts[v].terms().len() {
                break;
            }
            choice[v] = 0;
            v += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intnum::BoundarySpec;
    use num::{BigRational, Zero};

    fn ev(p: &MultiPoly) -> BigRational {
        if p.is_zero() {
            return BigRational::zero();
        }
        let s = p.as_scalar().unwrap();
        assert!(s.im().is_zero());
        s.re().clone()
    }

    #[test]
    fn splicing_fundamentals_reproduces_boundary_classes() {
        // Ambient: the separating divisor on the two-pointed genus-1
        // moduli (rational side carries both legs).  Splicing plain
        // fundamentals must reproduce the pushforward of 1, i.e. the
        // divisor without its 1/|Aut| weight.
        let ambient = StableGraph::new(vec![0, 1], vec![0, 0], vec![(0, 1)]);
        let parts = vec![TautExpr::fundamental(0, 3), TautExpr::fundamental(1, 1)];
        let spliced = splice(&ambient, &parts);
        assert_eq!(spliced.terms().len(), 1);

        let sep = BoundarySpec::Separating { genus: 0, legs: [0, 1].into() };
        let divisor = TautExpr::fundamental(1, 2).mul_boundary(&sep);
        for probe in [
            |e: &TautExpr| e.mul_psi(0, 1),
            |e: &TautExpr| e.mul_lambda(1),
        ] {
            let via_divisor = ev(&probe(&divisor).integrate().unwrap());
            let via_splice = ev(&probe(&spliced).integrate().unwrap());
            assert_eq!(via_splice, via_divisor);
        }
        assert_eq!(
            ev(&spliced.mul_lambda(1).integrate().unwrap()),
            BigRational::new(1.into(), 24.into())
        );
    }

    #[test]
    fn spliced_decorations_land_on_edge_ends() {
        // Put ψ on the rational vertex's edge slot; the spliced graph
        // must carry it as a tail exponent on the connecting edge.
        let ambient = StableGraph::new(vec![0, 1], vec![0, 0], vec![(0, 1)]);
        let parts = vec![TautExpr::fundamental(0, 3).mul_psi(2, 1), TautExpr::fundamental(1, 1)];
        let spliced = splice(&ambient, &parts);
        assert_eq!(spliced.terms().len(), 1);
        let dg = &spliced.terms()[0].0;
        assert_eq!(dg.psi_tail, vec![1]);
        assert_eq!(dg.psi_head, vec![0]);
        assert_eq!(dg.psi_leg, vec![0, 0]);

        // ∫ δ-pushforward with ψ at the node (rational side): the
        // vertex integral is ∫ψ over the 3-pointed rational moduli = 0,
        // so this pairing vanishes; with the ψ on the elliptic side it
        // is ∫1 over (0,3) times ∫ψ over (1,1) = 1/24.
        assert!(ev(&spliced.integrate().unwrap()).is_zero());
        let parts2 = vec![TautExpr::fundamental(0, 3), TautExpr::fundamental(1, 1).mul_psi(0, 1)];
        let spliced2 = splice(&ambient, &parts2);
        assert_eq!(
            ev(&spliced2.integrate().unwrap()),
            BigRational::new(1.into(), 24.into())
        );
    }
}
