//! The double ramification cycle through its spanning-tree expansion.
//!
//! `DR_g(a₁,…,aₙ)` is assembled as a sum over stable graphs with at
//! most `g` edges.  Each graph contributes ψ-decorated boundary
//! pushforwards whose coefficients combine
//! * a global `2^{−g}` with `(−2)^{|E|}/|Aut Γ|`,
//! * one factor `aᵢ^{2d(ℓᵢ)}/d(ℓᵢ)!` per leg,
//! * one factor `(2d(h)+2d(t)+1)!/(d(h)!·d(t)!)` per edge,
//! * and a coefficient of `∏ₑ xₑ^{2d(h)+2d(t)+2}` extracted from a sum
//!   over spanning trees of exponential factors (tree edges) and
//!   Bernoulli-type factors (complementary edges), expanded in one
//!   fixed Laurent sector.
//!
//! The degree-`g` part of the pushforward forces `|E| + Σd = g`, so the
//! assignment sum is finite.  Weights enter only through the leg
//! factors and the exponential coefficients, and may be arbitrary
//! polynomials; the class is then a polynomial family, which is what
//! the divisibility and polynomiality checks consume.

use num::{BigInt, BigRational, One, Zero};

use super::cohft::CohFt;
use super::DrCalcError;
use crate::exactalg::{sector_coeff, ExactScalar, MultiPoly, SectorFactor, VarSet};
use crate::intnum::{dr_insert, dr_lookup, DecoratedGraph, TautExpr};
use crate::modgraph::{enumerate_stable_graphs_bounded, spanning_trees, StableGraph};

/// Largest genus served by the cycle expansion (bounded by the λ-class
/// integral tables downstream).
pub const MAX_GENUS: u32 = 2;

/// A double ramification cycle as a decorated-graph expression whose
/// coefficients are polynomials in the weight symbols.
#[derive(Debug, Clone)]
pub struct DRPolyClass {
    genus: u32,
    leaves: usize,
    class: TautExpr,
}

impl DRPolyClass {
    pub(crate) fn from_parts(genus: u32, leaves: usize, class: TautExpr) -> Self {
        DRPolyClass { genus, leaves, class }
    }

    /// Genus of the underlying moduli.
    pub fn genus(&self) -> u32 {
        self.genus
    }

    /// Number of ramification points (legs of the ambient moduli).
    pub fn leaves(&self) -> usize {
        self.leaves
    }

    /// The cycle as a tautological expression.
    pub fn class(&self) -> &TautExpr {
        &self.class
    }

    /// Consume the wrapper and keep the expression.
    pub fn into_class(self) -> TautExpr {
        self.class
    }

    /// Largest total degree among the coefficient polynomials.
    pub fn coefficient_degree(&self) -> u32 {
        self.class.terms().iter().map(|(_, c)| c.total_degree()).max().unwrap_or(0)
    }

    /// True iff every coefficient is invariant under negating all
    /// weight symbols at once.
    pub fn coefficients_even(&self) -> bool {
        let all: Vec<usize> = (0..self.class.vars().len()).collect();
        self.class.terms().iter().all(|(_, c)| c.is_even_in(&all))
    }
}

/// Expansion choices that must not affect the resulting class; the
/// defaults are used everywhere, the variants exist so tests can verify
/// the independence.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ExpansionOptions {
    /// Expand Laurent factors with the edge-variable precedence reversed.
    pub reverse_sector: bool,
    /// Reverse the orientation of every edge before expanding.
    pub flip_orientations: bool,
}

/// `n!` as an exact rational.
fn factorial(n: u32) -> BigRational {
    let mut acc = BigInt::one();
    for k in 2..=n as u64 {
        acc *= k;
    }
    BigRational::from_integer(acc)
}

/// Rebuild a graph with every edge reversed.
fn reverse_edges(g: &StableGraph) -> StableGraph {
    let genera: Vec<u32> = (0..g.num_vertices()).map(|v| g.vertex_genus(v)).collect();
    let legs: Vec<usize> = (0..g.num_legs()).map(|i| g.leg_vertex(i)).collect();
    let edges: Vec<(usize, usize)> = g.edges().iter().map(|&(a, b)| (b, a)).collect();
    StableGraph::new(genera, legs, edges)
}

/// All ways to write `total` as an ordered sum of `slots` nonnegative parts.
pub(crate) fn weak_compositions(total: u32, slots: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; slots];
    fn rec(total: u32, slots: usize, idx: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if idx + 1 == slots {
            cur[idx] = total;
            out.push(cur.clone());
            return;
        }
        for part in 0..=total {
            cur[idx] = part;
            rec(total - part, slots, idx + 1, cur, out);
        }
    }
    if slots == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, slots, 0, &mut cur, &mut out);
    out
}

/// The double ramification cycle `DR_g(w₁,…,wₙ)` for polynomial
/// weights that sum to zero identically.
pub fn dr_cycle(
    g: u32,
    vars: &VarSet,
    weights: &[MultiPoly],
) -> Result<DRPolyClass, DrCalcError> {
    dr_cycle_with(g, vars, weights, ExpansionOptions::default())
}

/// The cycle for integer weights (empty symbol set).
pub fn dr_cycle_numeric(g: u32, a: &[i64]) -> Result<DRPolyClass, DrCalcError> {
    let vars = VarSet::new(Vec::<String>::new());
    let weights: Vec<MultiPoly> =
        a.iter().map(|&w| MultiPoly::scalar(&vars, ExactScalar::from_int(w))).collect();
    dr_cycle(g, &vars, &weights)
}

pub(crate) fn dr_cycle_with(
    g: u32,
    vars: &VarSet,
    weights: &[MultiPoly],
    opts: ExpansionOptions,
) -> Result<DRPolyClass, DrCalcError> {
    if g > MAX_GENUS {
        return Err(DrCalcError::GenusOutOfRange(g, MAX_GENUS));
    }
    let n = weights.len();
    let mut balance = MultiPoly::zero(vars);
    for w in weights {
        balance += w;
    }
    if !balance.is_zero() {
        return Err(DrCalcError::ProfileUnbalanced(format!(
            "weights sum to {balance} instead of 0"
        )));
    }

    // The degree-g part needs |E| + Σd = g, so graphs with more than
    // g edges never contribute.
    let graphs = enumerate_stable_graphs_bounded(g, n, g as usize)?;
    let mut expr = TautExpr::zero(g, n, vars);
    let global = BigRational::new(BigInt::one(), BigInt::from(2).pow(g));
    for base in graphs.iter() {
        let ne = base.num_edges();
        let aut = base.automorphism_order();
        let graph = if opts.flip_orientations { reverse_edges(base) } else { base.clone() };
        let trees = spanning_trees(&graph);
        let precedence: Vec<usize> = if opts.reverse_sector {
            (0..ne).rev().collect()
        } else {
            (0..ne).collect()
        };
        let mut graph_factor = &global * BigRational::from_integer(BigInt::from(-2).pow(ne as u32));
        graph_factor /= BigRational::from_integer(BigInt::from(aut));

        for assignment in weak_compositions(g - ne as u32, n + 2 * ne) {
            let d_leg = &assignment[..n];
            let d_tail: Vec<u32> = (0..ne).map(|e| assignment[n + 2 * e]).collect();
            let d_head: Vec<u32> = (0..ne).map(|e| assignment[n + 2 * e + 1]).collect();

            let mut leaf = MultiPoly::one(vars);
            for (i, &dl) in d_leg.iter().enumerate() {
                if dl > 0 {
                    leaf = &leaf * &weights[i].pow(2 * dl);
                }
            }
            if leaf.is_zero() {
                continue;
            }

            let mut pref = graph_factor.clone();
            for &dl in d_leg {
                pref /= factorial(dl);
            }
            for e in 0..ne {
                pref *= factorial(2 * (d_tail[e] + d_head[e]) + 1)
                    / (factorial(d_tail[e]) * factorial(d_head[e]));
            }

            let target: Vec<u32> = (0..ne).map(|e| 2 * (d_tail[e] + d_head[e]) + 2).collect();
            let mut sector_sum = MultiPoly::zero(vars);
            for tree in &trees {
                let mut factors = Vec::with_capacity(ne);
                for f in 0..ne {
                    if let Some(leaf_coeffs) = tree.leaf_form.get(&f) {
                        let mut coeff = MultiPoly::zero(vars);
                        for (i, &c) in leaf_coeffs.iter().enumerate() {
                            if c != 0 {
                                coeff += &weights[i].scale(&ExactScalar::from_int(c));
                            }
                        }
                        factors.push(SectorFactor::Exp { var: f, coeff });
                    } else {
                        factors.push(SectorFactor::BernoulliFrac {
                            var: f,
                            form: tree.cycle_form[&f].clone(),
                        });
                    }
                }
                sector_sum += &sector_coeff(ne, vars, &factors, &target, &precedence)?;
            }
            if sector_sum.is_zero() {
                continue;
            }

            let coeff = (&leaf * &sector_sum).scale(&ExactScalar::from_rational(pref.clone()));
            if coeff.is_zero() {
                continue;
            }
            let mut dg = DecoratedGraph::undecorated(graph.clone());
            dg.psi_leg = d_leg.to_vec();
            dg.psi_tail = d_tail;
            dg.psi_head = d_head;
            expr.push(dg, coeff);
        }
    }
    Ok(DRPolyClass { genus: g, leaves: n, class: expr })
}

/// Pair the numeric cycle `DR_g(0, a₁,…,aₙ, −Σa)` against
/// `ψ₁^d · λ_l · (μ^k part of the theory)`, where ψ₁ sits at the
/// leading zero-weight point.
///
/// The power `d` is the literal ψ-exponent.  The integrand degree must
/// equal `2g − 1 + n` minus the cycle degree, i.e.
/// `d + l + deg(μ^k) = 2g − 1 + n`; anything else is reported as a
/// dimension mismatch.  Pairings are memoized (per profile and
/// insertion, independent of the theory's scalar normalization).
pub fn dr_hodge_integral(
    g: u32,
    a: &[i64],
    d: u32,
    l: u32,
    cohft: &dyn CohFt,
    k: u32,
) -> Result<BigRational, DrCalcError> {
    assert_eq!(cohft.dimension(), 1, "pairing engine supports rank-one theories only");
    let Some((scale, mu_lams)) = cohft.mu_part(k) else {
        return Ok(BigRational::zero());
    };
    if scale.is_zero() {
        return Ok(BigRational::zero());
    }
    let n = a.len();
    let total: i64 = a.iter().sum();
    let mut weights = Vec::with_capacity(n + 2);
    weights.push(0);
    weights.extend_from_slice(a);
    weights.push(-total);

    let deg_mu: u32 = mu_lams.iter().sum();
    let dim = 3 * g as i64 - 3 + (n as i64 + 2);
    if g as i64 + d as i64 + l as i64 + deg_mu as i64 != dim {
        return Err(DrCalcError::IntNum(crate::intnum::IntNumError::DimensionMismatch(format!(
            "ψ^{d}·λ_{l}·(μ^{k} part) against a genus-{g} cycle with {} points",
            n + 2
        ))));
    }

    let mut lams = mu_lams;
    if l > 0 {
        lams.push(l);
    }
    lams.sort_unstable();
    let lam_tag: Vec<String> = lams.iter().map(|x| x.to_string()).collect();
    let key = (g, weights.clone(), format!("psi1^{d}*lam[{}]", lam_tag.join(",")));
    if let Some(v) = dr_lookup(&key) {
        return Ok(scale * v);
    }

    let cycle = dr_cycle_numeric(g, &weights)?;
    let paired = cycle.class().mul_psi(0, d);
    let value = paired.integrate_with_lambdas(&lams)?;
    let sc = value.as_scalar().expect("numeric pairing must be constant");
    assert!(sc.im().is_zero(), "DR pairings are real");
    let out = sc.re().clone();
    dr_insert(key, out.clone());
    Ok(scale * out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intnum::BoundarySpec;
    use std::collections::BTreeSet;

    /// A constant pairing value out of an empty-variable polynomial.
    fn ev(p: &MultiPoly) -> BigRational {
        let s = p.as_scalar().expect("constant polynomial");
        assert!(s.im().is_zero(), "pairing should be real");
        s.re().clone()
    }

    fn rational(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    /// Degree-one test classes on the (genus, n)-moduli: every leg ψ,
    /// every stable two-sided separation, and the nonseparating divisor.
    fn degree_one_probes(dr: &TautExpr, extra_psi: u32) -> Vec<(String, BigRational)> {
        let (_, n) = dr.ambient();
        let mut out = Vec::new();
        for leg in 0..n {
            let probe = dr.mul_psi(leg, 1 + extra_psi);
            out.push((format!("psi{leg}"), ev(&probe.integrate().unwrap())));
        }
        for mask in 1u32..(1 << n) - 1 {
            let legs: BTreeSet<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if legs.len() < 2 {
                continue;
            }
            let spec = BoundarySpec::Separating { genus: 0, legs: legs.clone() };
            let probe = dr.mul_boundary(&spec).mul_psi(0, extra_psi);
            out.push((format!("delta0{legs:?}"), ev(&probe.integrate().unwrap())));
        }
        let probe = dr.mul_boundary(&BoundarySpec::Irreducible).mul_psi(0, extra_psi);
        out.push(("delta_irr".into(), ev(&probe.integrate().unwrap())));
        out
    }

    #[test]
    fn genus_zero_profiles_give_the_fundamental_class() {
        let dr = dr_cycle_numeric(0, &[3, -1, -2]).unwrap();
        assert_eq!(dr.class().terms().len(), 1);
        let (dg, coeff) = &dr.class().terms()[0];
        assert_eq!(dg.graph.num_edges(), 0);
        assert_eq!(dg.psi_leg, vec![0, 0, 0]);
        assert_eq!(ev(coeff), BigRational::one());
        assert_eq!(ev(&dr.class().integrate().unwrap()), BigRational::one());
    }

    #[test]
    fn unbalanced_or_deep_profiles_are_rejected() {
        assert!(matches!(
            dr_cycle_numeric(1, &[1, 2]),
            Err(DrCalcError::ProfileUnbalanced(_))
        ));
        assert!(matches!(
            dr_cycle_numeric(3, &[0, 0]),
            Err(DrCalcError::GenusOutOfRange(3, MAX_GENUS))
        ));
    }

    #[test]
    fn zero_weight_cycles_match_hodge_classes() {
        // Genus 1 with zero weights: the cycle is −λ₁.
        let dr = dr_cycle_numeric(1, &[0, 0]).unwrap();
        assert_eq!(ev(&dr.class().mul_psi(0, 1).integrate().unwrap()), rational(-1, 24));
        assert_eq!(ev(&dr.class().mul_psi(1, 1).integrate().unwrap()), rational(-1, 24));
        let sep = BoundarySpec::Separating { genus: 0, legs: [0, 1].into() };
        assert_eq!(ev(&dr.class().mul_boundary(&sep).integrate().unwrap()), rational(-1, 24));
        assert_eq!(
            ev(&dr.class().mul_boundary(&BoundarySpec::Irreducible).integrate().unwrap()),
            BigRational::zero()
        );

        // Genus 2 with zero weights: the cycle is +λ₂.  Compare a basket
        // of degree-3 pairings against direct λ₂-integrals.
        let dr2 = dr_cycle_numeric(2, &[0, 0]).unwrap();
        let fundamental = TautExpr::fundamental(2, 2);
        let probes: Vec<Box<dyn Fn(&TautExpr) -> TautExpr>> = vec![
            Box::new(|x: &TautExpr| x.mul_psi(0, 3)),
            Box::new(|x: &TautExpr| x.mul_psi(0, 2).mul_psi(1, 1)),
            Box::new(|x: &TautExpr| {
                x.mul_boundary(&BoundarySpec::Separating { genus: 0, legs: [0, 1].into() })
                    .mul_psi(0, 2)
            }),
            Box::new(|x: &TautExpr| x.mul_boundary(&BoundarySpec::Irreducible).mul_psi(0, 2)),
            Box::new(|x: &TautExpr| {
                x.mul_boundary(&BoundarySpec::Separating { genus: 1, legs: [0, 1].into() })
                    .mul_psi(1, 2)
            }),
        ];
        for probe in &probes {
            let lhs = ev(&probe(dr2.class()).integrate().unwrap());
            let rhs = ev(&probe(&fundamental).integrate_with_lambdas(&[2]).unwrap());
            assert_eq!(lhs, rhs);
        }
        // One of those numbers pinned explicitly: ∫ λ₂ ψ₁³ over the
        // two-pointed genus-2 moduli.
        let pinned = ev(&dr2.class().mul_psi(0, 3).integrate().unwrap());
        assert_eq!(pinned, ev(&fundamental.mul_psi(0, 3).integrate_with_lambdas(&[2]).unwrap()));
    }

    /// Independent oracle for the genus-one cycle: the mod-r weighting
    /// expansion.  In degree one it reads, for residues w = a mod r in
    /// [0, r): ψ-terms with coefficient w², the nonseparating divisor
    /// with coefficient (r²−1)/12 (from r⁻¹·½·Σ_w w(r−w)), and each
    /// separating divisor with coefficient w_S(r−w_S).  The pairing
    /// values are polynomials in r for large r; the cycle pairing is
    /// half the value of that polynomial at r = 0.
    fn mod_r_degree_one(a: &[i64], r: i64) -> TautExpr {
        let n = a.len();
        let vars = VarSet::new(Vec::<String>::new());
        let constant = |q: BigRational| MultiPoly::scalar(&vars, ExactScalar::from_rational(q));
        let rep = |x: i64| ((x % r) + r) % r;
        let mut expr = TautExpr::zero(1, n, &vars);
        for i in 0..n {
            let w = rep(a[i]);
            if w == 0 {
                continue;
            }
            let mut dg = DecoratedGraph::undecorated(StableGraph::smooth(1, n));
            dg.psi_leg[i] = 1;
            expr.push(dg, constant(BigRational::from_integer(BigInt::from(w * w))));
        }
        let loop_graph = StableGraph::new(vec![0], vec![0; n], vec![(0, 0)]);
        expr.push(
            DecoratedGraph::undecorated(loop_graph),
            constant(rational(r * r - 1, 12)),
        );
        for mask in 1u32..(1 << n) - 1 {
            let legs: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if legs.len() < 2 {
                continue; // a two-pointed rational side is unstable
            }
            let w = rep(legs.iter().map(|&i| a[i]).sum());
            if w == 0 {
                continue;
            }
            let vertex_of: Vec<usize> = (0..n).map(|i| usize::from(!legs.contains(&i))).collect();
            let graph = StableGraph::new(vec![0, 1], vertex_of, vec![(0, 1)]);
            expr.push(
                DecoratedGraph::undecorated(graph),
                constant(BigRational::from_integer(BigInt::from(w * (r - w)))),
            );
        }
        expr
    }

    #[test]
    fn genus_one_matches_mod_r_interpolation() {
        for profile in [vec![1, -1], vec![2, -2], vec![1, 2, -3]] {
            let extra = profile.len() as u32 - 2;
            let dr = dr_cycle_numeric(1, &profile).unwrap();
            let direct = degree_one_probes(dr.class(), extra);
            let radius: i64 = 2 * profile.iter().map(|w| w.abs()).sum::<i64>() + 5;
            let rs: Vec<i64> = (radius..radius + 4).collect();
            let rvar = VarSet::new(vec!["r".to_string()]);
            for (which, want) in direct.iter().enumerate() {
                let samples: Vec<(i64, MultiPoly)> = rs
                    .iter()
                    .map(|&r| {
                        let oracle = mod_r_degree_one(&profile, r);
                        let value = degree_one_probes(&oracle, extra)[which].1.clone();
                        (r, MultiPoly::scalar(&rvar, ExactScalar::from_rational(value)))
                    })
                    .collect();
                let fitted = crate::exactalg::lagrange_interpolate(&samples, 0, &rvar);
                let at_zero = fitted.eval_ints(&[0]);
                assert!(at_zero.im().is_zero());
                let oracle_value = at_zero.re() / BigRational::from_integer(BigInt::from(2));
                assert_eq!(
                    oracle_value, want.1,
                    "pairing {} disagrees on profile {profile:?}",
                    want.0
                );
            }
        }
    }

    #[test]
    fn sector_and_orientation_choices_cancel() {
        let vars = VarSet::new(Vec::<String>::new());
        let weights = |a: &[i64]| -> Vec<MultiPoly> {
            a.iter().map(|&w| MultiPoly::scalar(&vars, ExactScalar::from_int(w))).collect()
        };
        let variants = [
            ExpansionOptions { reverse_sector: false, flip_orientations: false },
            ExpansionOptions { reverse_sector: true, flip_orientations: false },
            ExpansionOptions { reverse_sector: false, flip_orientations: true },
            ExpansionOptions { reverse_sector: true, flip_orientations: true },
        ];
        for (g, profile, extra) in [(1u32, vec![3i64, -3], 0u32), (2, vec![1, -1], 2)] {
            let reference = dr_cycle_with(g, &vars, &weights(&profile), variants[0]).unwrap();
            let base = degree_one_probes(reference.class(), extra);
            for opt in &variants[1..] {
                let other = dr_cycle_with(g, &vars, &weights(&profile), *opt).unwrap();
                let probes = degree_one_probes(other.class(), extra);
                assert_eq!(base, probes, "expansion options leaked into genus {g}");
            }
        }
    }

    #[test]
    fn coefficients_are_even_of_bounded_degree() {
        let vars = VarSet::new(vec!["a1".to_string(), "a2".to_string()]);
        let a1 = MultiPoly::var(&vars, 0);
        let a2 = MultiPoly::var(&vars, 1);
        let last = MultiPoly::linear_form(&vars, &[(0, -1), (1, -1)]);
        for g in [1u32, 2] {
            let dr = dr_cycle(g, &vars, &[a1.clone(), a2.clone(), last.clone()]).unwrap();
            assert!(dr.coefficients_even(), "genus {g} coefficients must be even");
            assert!(dr.coefficient_degree() <= 2 * g, "degree bound 2g in the weights");
            assert_eq!(dr.coefficient_degree(), 2 * g, "top weight degree is attained");
        }
    }

    struct TrivialTheory;

    impl CohFt for TrivialTheory {
        fn dimension(&self) -> usize {
            1
        }
        fn eta(&self, i: usize, j: usize) -> BigRational {
            assert!(i == 1 && j == 1);
            BigRational::one()
        }
        fn mu_part(&self, k: u32) -> Option<(BigRational, Vec<u32>)> {
            (k == 0).then(|| (BigRational::one(), Vec::new()))
        }
        fn class_degree(&self, _g: u32, _n: usize, k: u32) -> Option<u32> {
            (k == 0).then_some(0)
        }
        fn tag(&self) -> String {
            "trivial-test".into()
        }
    }

    #[test]
    fn hodge_integral_base_cases() {
        // ∫ over DR₁(0,0) of ψ₁ is −1/24 (the cycle is −λ₁).
        let v = dr_hodge_integral(1, &[], 1, 0, &TrivialTheory, 0).unwrap();
        assert_eq!(v, rational(-1, 24));
        // μ-degrees beyond the theory's support vanish.
        let z = dr_hodge_integral(1, &[], 1, 0, &TrivialTheory, 2).unwrap();
        assert!(z.is_zero());
        // Wrong exponent bookkeeping is an error, not a zero.
        assert!(matches!(
            dr_hodge_integral(1, &[], 2, 0, &TrivialTheory, 0),
            Err(DrCalcError::IntNum(_))
        ));
    }

    #[test]
    fn trailing_zero_weights_integrate_like_forgotten_points() {
        // Appending the zero-weight closing point and raising the ψ-power
        // by one reproduces the shorter integral: pairing against
        // ψ₁²·λ₁ with weights (0,2,−2,0) equals pairing ψ₁·λ₁ with
        // (0,2,−2).
        let long = dr_hodge_integral(1, &[2, -2], 2, 1, &TrivialTheory, 0).unwrap();
        let short = dr_cycle_numeric(1, &[0, 2, -2]).unwrap();
        let short_val = short.class().mul_psi(0, 1).integrate_with_lambdas(&[1]).unwrap();
        assert_eq!(long, ev(&short_val));
    }

    #[test]
    fn zero_weight_point_pushes_forward_to_nothing() {
        // A cycle with a trailing zero weight is pulled back from the
        // moduli without that point, so forgetting the point kills it.
        let dr = dr_cycle_numeric(1, &[1, -1, 0]).unwrap();
        let pushed = dr.class().pushforward_forget(2).unwrap();
        for leg in 0..2 {
            assert!(ev(&pushed.mul_psi(leg, 2).integrate().unwrap()).is_zero());
        }
        assert!(ev(&pushed.mul_psi(0, 1).mul_psi(1, 1).integrate().unwrap()).is_zero());
        let sep = BoundarySpec::Separating { genus: 0, legs: [0, 1].into() };
        assert!(ev(&pushed.mul_boundary(&sep).mul_psi(0, 1).integrate().unwrap()).is_zero());
        assert!(ev(
            &pushed.mul_boundary(&BoundarySpec::Irreducible).mul_psi(0, 1).integrate().unwrap()
        )
        .is_zero());
    }
}
