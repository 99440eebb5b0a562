//! The rubber-space class expansion and the quantum A-class.
//!
//! Over positive weights a₁,…,aₙ the pushforward of the d̃-th power of
//! the cotangent line at the extra point of the rubber space is a
//! finite sum over ordered admissible stable graphs: each vertex
//! carries the ramification cycle of its half-edge weights twisted by
//! `(a_min ψ_min)^{c_v}`, the powers `c_v` distribute `d̃ − (n_v − 1)`,
//! and each term is weighted by `∏ₑ flow(e) / |Aut Γ|`.  The A-class
//! slices divide these integrals by `𝐚 = Σaᵢ` — exactly, which is
//! itself a theorem the code insists on.

use std::cell::RefCell;
use std::collections::BTreeMap;

use num::{BigInt, BigRational, One, Zero};

use super::cohft::CohFt;
use super::cycle::{dr_cycle_numeric, weak_compositions, MAX_GENUS};
use super::splice::splice;
use super::DrCalcError;
use crate::exactalg::{
    interpolate_multivariate, ExactAlgError, ExactScalar, MultiPoly, VarSet,
};
use crate::intnum::TautExpr;
use crate::modgraph::{
    admissible_decorations, enumerate_admissible, AdmissibleMode, HalfEdgePos,
};

/// The degree-(g+d̃) class on the (n+1)-pointed genus-g moduli obtained
/// by pushing the d̃-th cotangent power at the extra rubber point down
/// to the moduli of stable curves, for positive integer weights `a`
/// (the closing point carries −Σa).
pub(crate) fn rubber_class(
    g: u32,
    n: usize,
    a: &[i64],
    d_tilde: u32,
) -> Result<TautExpr, DrCalcError> {
    if g > MAX_GENUS {
        return Err(DrCalcError::GenusOutOfRange(g, MAX_GENUS));
    }
    assert_eq!(a.len(), n, "one weight per marked point");
    assert!(a.iter().all(|&x| x > 0), "rubber weights must be positive");

    let vars = VarSet::new(Vec::<String>::new());
    let mut total = TautExpr::zero(g, n + 1, &vars);
    let mut memo: BTreeMap<(u32, Vec<i64>), TautExpr> = BTreeMap::new();

    for nv in 1..=n.min(d_tilde as usize + 1) {
        let c_total = d_tilde - (nv as u32 - 1);
        let compositions = weak_compositions(c_total, nv);
        for ambient in enumerate_admissible(AdmissibleMode::Asg, g, nv, n) {
            let graph = &ambient.graph;
            let aut = BigRational::from_integer(BigInt::from(graph.automorphism_order()));
            let half_edges: Vec<Vec<HalfEdgePos>> =
                (0..nv).map(|v| graph.vertex_half_edges(v)).collect();
            // ψ-slot and external weight of each vertex's smallest leaf
            let anchors: Vec<(usize, i64)> = (0..nv)
                .map(|v| {
                    let leaf = half_edges[v]
                        .iter()
                        .filter_map(|&p| match p {
                            HalfEdgePos::Leg(i) if i < n => Some(i),
                            _ => None,
                        })
                        .min()
                        .expect("every vertex holds a labeled leaf");
                    let slot = half_edges[v]
                        .iter()
                        .position(|&p| p == HalfEdgePos::Leg(leaf))
                        .unwrap();
                    (slot, a[leaf])
                })
                .collect();

            for dec in admissible_decorations(&ambient, a) {
                let mut flow_factor = BigRational::one();
                for &f in &dec.flow {
                    flow_factor *= BigRational::from_integer(BigInt::from(f));
                }
                flow_factor /= &aut;

                let mut bases: Vec<TautExpr> = Vec::with_capacity(nv);
                for v in 0..nv {
                    let weights: Vec<i64> =
                        half_edges[v].iter().map(|&p| dec.weight(p)).collect();
                    let key = (graph.vertex_genus(v), weights);
                    if !memo.contains_key(&key) {
                        let class = dr_cycle_numeric(key.0, &key.1)?.into_class();
                        memo.insert(key.clone(), class);
                    }
                    bases.push(memo[&key].clone());
                }

                for composition in &compositions {
                    let mut scale = flow_factor.clone();
                    let parts: Vec<TautExpr> = (0..nv)
                        .map(|v| {
                            let c = composition[v];
                            if c == 0 {
                                return bases[v].clone();
                            }
                            let (slot, weight) = anchors[v];
                            scale *= BigRational::from_integer(BigInt::from(weight).pow(c));
                            bases[v].mul_psi(slot, c)
                        })
                        .collect();
                    let factor = MultiPoly::scalar(&vars, ExactScalar::from_rational(scale));
                    total = total.add(&splice(graph, &parts).scale(&factor));
                }
            }
        }
    }
    Ok(total)
}

/// `∫ A_{g,n}(a) · (μ^k part of the theory)` for the slice carrying λ_l:
/// the rubber expansion at `d̃ = 2g−2+n−l−deg(μ^k)` (negative means the
/// slice is empty), integrated against the distributed λ-classes and
/// divided by `𝐚`.  The override pins d̃ directly instead.
pub fn a_class_integral(
    g: u32,
    n: usize,
    a: &[i64],
    l: u32,
    k: u32,
    cohft: &dyn CohFt,
    d_tilde_override: Option<u32>,
) -> Result<BigRational, DrCalcError> {
    assert_eq!(cohft.dimension(), 1, "pairing engine supports rank-one theories only");
    assert_eq!(a.len(), n, "one weight per marked point");
    let Some((scale, mu_lams)) = cohft.mu_part(k) else {
        return Ok(BigRational::zero());
    };
    if scale.is_zero() {
        return Ok(BigRational::zero());
    }
    let deg_mu: i64 = mu_lams.iter().map(|&x| x as i64).sum();
    let d_tilde = match d_tilde_override {
        Some(d) => d as i64,
        None => 2 * g as i64 - 2 + n as i64 - l as i64 - deg_mu,
    };
    if d_tilde < 0 {
        return Ok(BigRational::zero());
    }
    let rubber = rubber_class(g, n, a, d_tilde as u32)?;
    let mut lams = mu_lams;
    if l > 0 {
        lams.push(l);
    }
    let value = rubber.integrate_with_lambdas(&lams)?;
    let value = value.as_scalar().expect("numeric integral is a constant");
    assert!(value.im().is_zero(), "A-class integrals are rational");
    let total: i64 = a.iter().sum();
    Ok(scale * value.re() / BigRational::from_integer(BigInt::from(total)))
}

/// All ℏ-slices of `∫ A_{g,n}(a)·c^{[k]}` as fitted polynomial families:
/// `slices[h]` is the coefficient of ℏ^h (the slice carrying λ_{g−h}),
/// a polynomial in a₁,…,aₙ with the 𝐚-division already performed.
#[derive(Debug, Clone)]
pub struct AClassSlice {
    pub genus: u32,
    pub leaves: usize,
    /// μ-exponent of the insertion.
    pub mu: u32,
    /// Cohomological degree of the μ-part (what d̃ was reduced by).
    pub mu_degree: u32,
    /// Which theory supplied the insertion.
    pub theory: String,
    pub vars: VarSet,
    pub slices: Vec<MultiPoly>,
}

impl AClassSlice {
    /// The exact coefficient of `a₁^{d₁}⋯aₙ^{dₙ} ℏ^{h}`.
    pub fn coefficient(&self, d: &[u32], h: u32) -> BigRational {
        assert_eq!(d.len(), self.leaves);
        let Some(poly) = self.slices.get(h as usize) else {
            return BigRational::zero();
        };
        let c = poly.coeff_of(d);
        assert!(c.im().is_zero(), "A-class coefficients are rational");
        c.re().clone()
    }

    /// Degree cap `4g−3+n−l−deg μ` for the ℏ^h slice (l = g−h); the
    /// slice must vanish above it.
    pub fn level_bound(&self, h: u32) -> i64 {
        let l = self.genus as i64 - h as i64;
        4 * self.genus as i64 - 3 + self.leaves as i64 - l - self.mu_degree as i64
    }
}

/// Fit every ℏ-slice of the A-class integral against the `μ^k` part of
/// the theory.  The raw families have degree ≤ 2g+d̃ and are divisible
/// by `𝐚`; a failed division falsifies the polynomial structure and is
/// reported as `DivisionNotExact`.
pub fn a_class_slice(
    g: u32,
    n: usize,
    k: u32,
    cohft: &dyn CohFt,
) -> Result<AClassSlice, DrCalcError> {
    assert_eq!(cohft.dimension(), 1, "pairing engine supports rank-one theories only");
    let names: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let vars = VarSet::new(names);
    let mu = cohft.mu_part(k);
    let (scale, mu_lams) = mu.unwrap_or((BigRational::zero(), Vec::new()));
    let deg_mu: u32 = mu_lams.iter().sum();

    let divisor_parts: Vec<(usize, i64)> = (0..n).map(|i| (i, 1)).collect();
    let divisor = MultiPoly::linear_form(&vars, &divisor_parts);

    let mut slices = Vec::with_capacity(g as usize + 1);
    for h in 0..=g {
        let l = g - h;
        let d_tilde = 2 * g as i64 - 2 + n as i64 - l as i64 - deg_mu as i64;
        if d_tilde < 0 || scale.is_zero() {
            slices.push(MultiPoly::zero(&vars));
            continue;
        }
        let d_tilde = d_tilde as u32;
        let mut lams = mu_lams.clone();
        if l > 0 {
            lams.push(l);
        }
        let mut eval = |pt: &[i64]| -> ExactScalar {
            let rubber = rubber_class(g, n, pt, d_tilde).expect("rubber class on the grid");
            let value = rubber.integrate_with_lambdas(&lams).expect("slice integral");
            value.as_scalar().expect("numeric integral is a constant")
        };
        let bound = (2 * g + d_tilde) as usize;
        let raw = interpolate_multivariate(&mut eval, &vec![bound; n], &vars);
        let fresh: Vec<i64> = (0..n).map(|i| (bound + 2 + i) as i64).collect();
        if raw.eval_ints(&fresh) != eval(&fresh) {
            return Err(DrCalcError::PropertyViolation(format!(
                "ℏ^{h} slice of the ({g},{n}) A-class family exceeds weight degree {bound}"
            )));
        }
        let divided = match raw.exact_div_linear(&divisor) {
            Ok(q) => q,
            Err(ExactAlgError::DivisionNotExact(msg)) => {
                return Err(DrCalcError::DivisionNotExact(format!(
                    "ℏ^{h} slice of the ({g},{n}) A-class family is not divisible \
                     by the weight sum: {msg}"
                )))
            }
            Err(e) => return Err(e.into()),
        };
        slices.push(divided.scale(&ExactScalar::from_rational(scale.clone())));
    }
    Ok(AClassSlice {
        genus: g,
        leaves: n,
        mu: k,
        mu_degree: deg_mu,
        theory: cohft.tag(),
        vars,
        slices,
    })
}

/// What `a_class_polynomiality_report` verified.
#[derive(Debug, Clone)]
pub struct PolynomialityReport {
    pub genus: u32,
    pub leaves: usize,
    /// The cotangent power d̃ of the fitted family.
    pub psi_power: u32,
    /// 2g + d̃, the proven cap on the weight degree.
    pub degree_bound: u32,
    /// Largest fitted weight degree actually observed.
    pub fitted_degree: u32,
    /// Complementary pairings fitted on the (n+1)-pointed source.
    pub pairings: usize,
    /// Pairings of the forgetful pushforward checked for 𝐚-divisibility.
    pub pushforward_pairings: usize,
}

/// Fit the family `a ↦ (rubber-class pairings)` and certify the three
/// polynomial claims: weight degree ≤ 2g+d̃, parity matching 2g+d̃, and
/// exact 𝐚-divisibility of the forgetful pushforward.  Each failure
/// names its claim in a `PropertyViolation`.
pub fn a_class_polynomiality_report(
    g: u32,
    n: usize,
    d_tilde: u32,
) -> Result<PolynomialityReport, DrCalcError> {
    if g > MAX_GENUS {
        return Err(DrCalcError::GenusOutOfRange(g, MAX_GENUS));
    }
    assert!(n >= 1, "the rubber space needs a marked point");
    assert!(2 * g as i64 - 2 + n as i64 > 0, "the forgetful target must exist");
    let comp = 2 * g as i64 + n as i64 - 2 - d_tilde as i64;
    let comp = u32::try_from(comp).expect("complementary pairing degree is nonnegative");
    let bound = (2 * g + d_tilde) as usize;

    let names: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let vars = VarSet::new(names);
    let divisor_parts: Vec<(usize, i64)> = (0..n).map(|i| (i, 1)).collect();
    let divisor = MultiPoly::linear_form(&vars, &divisor_parts);
    let fresh: Vec<i64> = (0..n).map(|i| (bound + 2 + i) as i64).collect();

    let rubber_cache: RefCell<BTreeMap<Vec<i64>, TautExpr>> = RefCell::new(BTreeMap::new());
    let rubber_at = |pt: &[i64]| -> TautExpr {
        rubber_cache
            .borrow_mut()
            .entry(pt.to_vec())
            .or_insert_with(|| {
                rubber_class(g, n, pt, d_tilde).expect("rubber class on the grid")
            })
            .clone()
    };
    let pushed_cache: RefCell<BTreeMap<Vec<i64>, TautExpr>> = RefCell::new(BTreeMap::new());
    let pushed_at = |pt: &[i64]| -> TautExpr {
        pushed_cache
            .borrow_mut()
            .entry(pt.to_vec())
            .or_insert_with(|| {
                rubber_at(pt).pushforward_forget(n).expect("closing-point pushforward")
            })
            .clone()
    };

    let mut fitted_degree = 0u32;
    let mut pairings = 0usize;
    for composition in weak_compositions(comp, n + 1) {
        let mut eval = |pt: &[i64]| -> ExactScalar {
            let mut probe = rubber_at(pt);
            for (leg, &p) in composition.iter().enumerate() {
                if p > 0 {
                    probe = probe.mul_psi(leg, p);
                }
            }
            let value = probe.integrate().expect("complementary pairing");
            value.as_scalar().expect("numeric pairing is a constant")
        };
        let fit = interpolate_multivariate(&mut eval, &vec![bound; n], &vars);
        if fit.eval_ints(&fresh) != eval(&fresh) {
            return Err(DrCalcError::PropertyViolation(format!(
                "degree: pairing ψ^{composition:?} of the ({g},{n},{d_tilde}) family \
                 exceeds weight degree {bound}"
            )));
        }
        if !fit.terms().all(|(e, _)| e.iter().sum::<u32>() % 2 == (bound as u32) % 2) {
            return Err(DrCalcError::PropertyViolation(format!(
                "parity: pairing ψ^{composition:?} of the ({g},{n},{d_tilde}) family \
                 mixes parities against degree {bound}"
            )));
        }
        fitted_degree = fitted_degree.max(fit.total_degree());
        pairings += 1;
    }

    let mut pushforward_pairings = 0usize;
    for composition in weak_compositions(comp, n) {
        let mut eval = |pt: &[i64]| -> ExactScalar {
            let mut probe = pushed_at(pt);
            for (leg, &p) in composition.iter().enumerate() {
                if p > 0 {
                    probe = probe.mul_psi(leg, p);
                }
            }
            let value = probe.integrate().expect("pushforward pairing");
            value.as_scalar().expect("numeric pairing is a constant")
        };
        let fit = interpolate_multivariate(&mut eval, &vec![bound; n], &vars);
        if fit.eval_ints(&fresh) != eval(&fresh) {
            return Err(DrCalcError::PropertyViolation(format!(
                "degree: pushforward pairing ψ^{composition:?} of the \
                 ({g},{n},{d_tilde}) family exceeds weight degree {bound}"
            )));
        }
        if let Err(err) = fit.exact_div_linear(&divisor) {
            return Err(DrCalcError::PropertyViolation(format!(
                "𝐚-divisibility: pushforward pairing ψ^{composition:?} of the \
                 ({g},{n},{d_tilde}) family leaves a remainder: {err}"
            )));
        }
        pushforward_pairings += 1;
    }

    Ok(PolynomialityReport {
        genus: g,
        leaves: n,
        psi_power: d_tilde,
        degree_bound: bound as u32,
        fitted_degree,
        pairings,
        pushforward_pairings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

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

    fn rational(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn rational_three_point_class_is_the_unit() {
        // The raw rubber family for (g,n,d̃) = (0,3,1) integrates to
        // exactly 𝐚 = a₁+a₂+a₃, so the A-class slice is the constant 1.
        let slice = a_class_slice(0, 3, 0, &TrivialTheory).unwrap();
        assert_eq!(slice.slices.len(), 1);
        assert_eq!(slice.slices[0], MultiPoly::one(&slice.vars));
        assert_eq!(slice.coefficient(&[0, 0, 0], 0), BigRational::one());

        // Same through the pointwise integral.
        let v = a_class_integral(0, 3, &[2, 3, 4], 0, 0, &TrivialTheory, None).unwrap();
        assert_eq!(v, BigRational::one());
    }

    #[test]
    fn one_point_elliptic_slices_match_known_values() {
        let slice = a_class_slice(1, 1, 0, &TrivialTheory).unwrap();
        assert_eq!(slice.slices.len(), 2);

        // ℏ⁰ carries λ₁: the family is a/24, so the linear coefficient
        // is 1/24.
        assert_eq!(slice.coefficient(&[1], 0), rational(1, 24));
        assert!(slice.slices[0].total_degree() <= 1);

        // ℏ¹ carries λ₀ = 1 at d̃ = 1; its linear coefficient vanishes.
        assert_eq!(slice.coefficient(&[1], 1), BigRational::zero());

        // Pointwise integral agreement for the λ₁ slice.
        let v = a_class_integral(1, 1, &[5], 1, 0, &TrivialTheory, None).unwrap();
        assert_eq!(v, rational(5, 24));
    }

    #[test]
    fn slice_degrees_respect_the_level_bounds() {
        for (g, n) in [(0u32, 3usize), (1, 1), (1, 2)] {
            let slice = a_class_slice(g, n, 0, &TrivialTheory).unwrap();
            for h in 0..=g {
                let bound = slice.level_bound(h);
                let poly = &slice.slices[h as usize];
                if poly.is_zero() {
                    continue;
                }
                assert!(
                    (poly.total_degree() as i64) <= bound,
                    "({g},{n}) ℏ^{h} slice degree {} above level bound {bound}",
                    poly.total_degree()
                );
                let parity = (bound % 2 + 2) % 2;
                assert!(
                    poly.terms().all(|(e, _)| e.iter().sum::<u32>() % 2 == parity as u32),
                    "({g},{n}) ℏ^{h} slice breaks the level parity"
                );
            }
        }
    }

    #[test]
    fn polynomiality_reports_pass() {
        let r = a_class_polynomiality_report(0, 3, 0).unwrap();
        assert_eq!(r.fitted_degree, 0);
        assert_eq!(r.degree_bound, 0);
        assert!(r.pairings >= 4);

        let r = a_class_polynomiality_report(1, 2, 1).unwrap();
        assert_eq!(r.degree_bound, 3);
        assert!(r.fitted_degree <= 3);
        assert!(r.pushforward_pairings >= 1);

        let r = a_class_polynomiality_report(2, 1, 0).unwrap();
        assert_eq!(r.degree_bound, 4);
        assert!(r.fitted_degree <= 4);
    }
}
