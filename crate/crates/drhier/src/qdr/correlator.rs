//! Correlators of the quantum hierarchy, by three independent evaluations.
//!
//! Every route computes the distinguished-insertion correlator
//! `⟨τ_{0,1} τ_{e₁,1} ⋯ τ_{eₙ,1}⟩_{l, g−l; k}`:
//!
//! * **Route A** sums moduli integrals over ordered-vertex stable graphs
//!   carrying one ψ-leg per insertion, `m` labeled free leaves, and a
//!   closing leaf that balances the weights, then reads off the
//!   multilinear coefficient in the free-leaf weights.
//! * **Route B** resums the free leaves into a ψ-power at the minimal
//!   leaf of each vertex and extracts the coefficient of `∏ aᵢ^{eᵢ}` by
//!   exact grid interpolation.
//! * **Route C** never touches graphs: it nests the one-sided star
//!   product through the Hamiltonian densities and reads the correlator
//!   off a truncated-series slice.
//!
//! Plain correlators (no distinguished insertion) are recovered from
//! inserted ones by inverting the string equation: the generating
//! polynomial of inserted values at level `D+1` is exactly divisible by
//! `a₁+⋯+aₙ` and the quotient's coefficients are the plain values at
//! level `D`.  Low-point conventions: `⟨τ_{d,1}⟩ = ⟨τ_{0,1}τ_{d+1,1}⟩`
//! and `⟨⟩ = ⟨τ_{1,1}⟩/(2g−2)`.

use super::density::{compositions, hamiltonian_density, tilde_star, Density};
use super::pairing::dr_pairing;
use super::{QdrConfig, QdrError, ENGINE_GENUS_CAP};
use crate::drcalc::CohFt;
use crate::exactalg::{
    interpolate_multivariate, symmetric_multilinear_coeff, ExactScalar, MultiPoly, Rational,
    VarSet,
};
use num::{BigInt, One, Zero};
use once_cell::sync::Lazy;
use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex};

/// The three independent evaluation strategies.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Route {
    /// Ordered-vertex graph sum with labeled free leaves.
    A,
    /// Leaf-resummed graph sum with ψ-powers at minimal leaves.
    B,
    /// Nested one-sided star products of Hamiltonian densities.
    C,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Route::A => write!(f, "A"),
            Route::B => write!(f, "B"),
            Route::C => write!(f, "C"),
        }
    }
}

/// A plain correlator key `⟨τ_{d₁,α₁}⋯τ_{dₙ,αₙ}⟩_{l, g−l; k}`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CorrelatorKey {
    pub g: u32,
    pub l: u32,
    pub k: u32,
    /// Insertions `(d, α)`; the rank-one engine accepts `α = 1` only.
    pub insertions: Vec<(i64, usize)>,
}

impl CorrelatorKey {
    /// Key with all insertions on the unit primary.
    pub fn unit(g: u32, l: u32, k: u32, ds: &[i64]) -> Self {
        CorrelatorKey { g, l, k, insertions: ds.iter().map(|&d| (d, 1)).collect() }
    }
}

impl fmt::Display for CorrelatorKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨")?;
        for (d, alpha) in &self.insertions {
            write!(f, "τ_{{{d},{alpha}}}")?;
        }
        write!(f, "⟩_{{{},{};{}}}", self.l, self.g - self.l.min(self.g), self.k)
    }
}

/// A correlator value together with every route that produced it.
#[derive(Clone, Debug)]
pub struct CorrelatorValue {
    pub key: CorrelatorKey,
    pub value: Rational,
    pub routes: Vec<(Route, Rational)>,
}

/// Evaluate a plain correlator on the requested routes (default: route C)
/// and insist that they agree.
pub fn correlator(
    key: &CorrelatorKey,
    routes: &[Route],
    cohft: &Arc<dyn CohFt + Send + Sync>,
    cfg: &QdrConfig,
) -> Result<CorrelatorValue, QdrError> {
    let g = key.g;
    let n = key.insertions.len();
    for &(d, alpha) in &key.insertions {
        if alpha != 1 {
            return Err(QdrError::OutOfRange(format!(
                "rank-one engine: primary index {alpha} unavailable in {key}"
            )));
        }
        if d < 0 {
            return Err(QdrError::OutOfRange(format!("negative ψ-power in {key}")));
        }
    }
    let gcap = cfg.gmax.min(ENGINE_GENUS_CAP);
    if g > gcap {
        return Err(QdrError::OutOfRange(format!("genus {g} beyond engine cap {gcap}")));
    }
    if n > cfg.arity_cap {
        return Err(QdrError::OutOfRange(format!(
            "{n} insertions exceed the configured cap {}",
            cfg.arity_cap
        )));
    }
    if 2 * g as i64 - 2 + n as i64 <= 0 {
        return Err(QdrError::StabilityViolation(format!(
            "{key} lives on an empty moduli space (genus {g}, {n} points)"
        )));
    }
    let ds: Vec<i64> = key.insertions.iter().map(|&(d, _)| d).collect();
    if ds.iter().sum::<i64>() > cfg.level_cap {
        return Err(QdrError::OutOfRange(format!(
            "{key} exceeds the configured level cap {}",
            cfg.level_cap
        )));
    }
    let picked: Vec<Route> = if routes.is_empty() { vec![Route::C] } else { routes.to_vec() };
    let mut evals: Vec<(Route, Rational)> = Vec::new();
    for &r in &picked {
        let v = plain_value(g, key.l, key.k, &ds, r, cohft, cfg)?;
        evals.push((r, v));
    }
    if evals.windows(2).any(|w| w[0].1 != w[1].1) {
        let listing = evals
            .iter()
            .map(|(r, v)| format!("route {r} → {v}"))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(QdrError::RouteDisagreement(format!("{key}: {listing}")));
    }
    Ok(CorrelatorValue { key: key.clone(), value: evals[0].1.clone(), routes: evals })
}

/// Plain correlator on one route, after key validation.
fn plain_value(
    g: u32,
    l: u32,
    k: u32,
    ds: &[i64],
    route: Route,
    cohft: &Arc<dyn CohFt + Send + Sync>,
    cfg: &QdrConfig,
) -> Result<Rational, QdrError> {
    if l > g {
        return Ok(Rational::zero());
    }
    match ds.len() {
        0 => {
            let one_point = plain_value(g, l, k, &[1], route, cohft, cfg)?;
            Ok(one_point / Rational::from_integer(BigInt::from(2 * g as i64 - 2)))
        }
        1 => inserted_correlator(g, l, k, &[ds[0] + 1], route, cohft, cfg),
        n => {
            let level: i64 = ds.iter().sum();
            let quotient = string_quotient(g, l, k, n, level, route, cohft, cfg)?;
            let exps: Vec<u32> = ds.iter().map(|&d| d as u32).collect();
            let c = quotient.coeff_of(&exps);
            c.as_rational().cloned().ok_or_else(|| {
                QdrError::NotReal(format!("string-inverted correlator at {ds:?} = {c}"))
            })
        }
    }
}

/// The level-`D` plain generating polynomial, obtained by dividing the
/// level-`D+1` inserted generating polynomial by `a₁+⋯+aₙ`.  A nonzero
/// remainder would mean the computed inserted values violate the string
/// equation, and surfaces as an exact-division error.
fn string_quotient(
    g: u32,
    l: u32,
    k: u32,
    n: usize,
    level: i64,
    route: Route,
    cohft: &Arc<dyn CohFt + Send + Sync>,
    cfg: &QdrConfig,
) -> Result<Arc<MultiPoly>, QdrError> {
    static CACHE: Lazy<
        Mutex<HashMap<(u32, u32, u32, usize, i64, Route, String, u32), Arc<MultiPoly>>>,
    > = Lazy::new(|| Mutex::new(HashMap::new()));
    let ckey = (g, l, k, n, level, route, cohft.tag(), cfg.gmax);
    if let Some(hit) = CACHE.lock().unwrap().get(&ckey) {
        return Ok(hit.clone());
    }
    let vars = VarSet::new((1..=n).map(|i| format!("a{i}")).collect::<Vec<_>>());
    let mut gen_poly = MultiPoly::zero(&vars);
    for e in nonneg_compositions(level + 1, n) {
        let v = inserted_correlator(g, l, k, &e, route, cohft, cfg)?;
        if v.is_zero() {
            continue;
        }
        let mut mono = MultiPoly::scalar(&vars, ExactScalar::from_rational(v));
        for (i, &ei) in e.iter().enumerate() {
            for _ in 0..ei {
                mono = &mono * &MultiPoly::var(&vars, i);
            }
        }
        gen_poly = &gen_poly + &mono;
    }
    let quotient = if gen_poly.is_zero() {
        MultiPoly::zero(&vars)
    } else {
        let total =
            MultiPoly::linear_form(&vars, &(0..n).map(|i| (i, 1i64)).collect::<Vec<_>>());
        gen_poly.exact_div_linear(&total)?
    };
    let quotient = Arc::new(quotient);
    CACHE.lock().unwrap().insert(ckey, quotient.clone());
    Ok(quotient)
}

/// `⟨τ_{0,1} τ_{e₁,1} ⋯ τ_{eₙ,1}⟩_{l, g−l; k}` on the chosen route.
pub fn inserted_correlator(
    g: u32,
    l: u32,
    k: u32,
    e: &[i64],
    route: Route,
    cohft: &Arc<dyn CohFt + Send + Sync>,
    cfg: &QdrConfig,
) -> Result<Rational, QdrError> {
    let n = e.len();
    if n == 0 {
        return Err(QdrError::OutOfRange(
            "inserted correlator needs at least one ψ-insertion".into(),
        ));
    }
    if e.iter().any(|&x| x < 0) {
        return Err(QdrError::OutOfRange(format!("negative ψ-power in insertions {e:?}")));
    }
    if g == 0 && n == 1 {
        return Err(QdrError::StabilityViolation(
            "⟨τ_{0,1}τ_{e,1}⟩ in genus 0 lives on an empty moduli space".into(),
        ));
    }
    let gcap = cfg.gmax.min(ENGINE_GENUS_CAP);
    if g > gcap {
        return Err(QdrError::OutOfRange(format!("genus {g} beyond engine cap {gcap}")));
    }
    if l > g {
        return Ok(Rational::zero());
    }
    let mut canon = e.to_vec();
    canon.sort_unstable_by(|x, y| y.cmp(x));
    static CACHE: Lazy<
        Mutex<HashMap<(u32, u32, u32, Vec<i64>, Route, String, u32), Rational>>,
    > = Lazy::new(|| Mutex::new(HashMap::new()));
    let ckey = (g, l, k, canon.clone(), route, cohft.tag(), cfg.gmax);
    if let Some(hit) = CACHE.lock().unwrap().get(&ckey) {
        return Ok(hit.clone());
    }
    let Some(deg_k) = cohft.class_degree(g, n + 1, k) else {
        CACHE.lock().unwrap().insert(ckey, Rational::zero());
        return Ok(Rational::zero());
    };
    let m64 = canon.iter().sum::<i64>() + l as i64 + deg_k as i64 - 2 * g as i64 + 1;
    let value = if m64 < 0 {
        Rational::zero()
    } else {
        let m = m64 as usize;
        match route {
            Route::A => route_a(g, l, k, &canon, m, cohft)?,
            Route::B => route_b(g, l, k, &canon, m, cohft, cfg)?,
            Route::C => route_c(g, l, k, &canon, m, cohft, cfg)?,
        }
    };
    CACHE.lock().unwrap().insert(ckey, value.clone());
    Ok(value)
}

// ---------------------------------------------------------------------------
// Route C: nested one-sided star products.
// ---------------------------------------------------------------------------

fn route_c(
    g: u32,
    l: u32,
    k: u32,
    e: &[i64],
    m: usize,
    cohft: &Arc<dyn CohFt + Send + Sync>,
    cfg: &QdrConfig,
) -> Result<Rational, QdrError> {
    let n = e.len();
    let budget = cfg.gmax + n as u32 - 1;
    let mut obj = hamiltonian_density(e[0] - 1, 1, cohft.clone(), cfg.gmax);
    for &ej in &e[1..] {
        let hbar = hamiltonian_density(ej, 1, cohft.clone(), cfg.gmax);
        let left = obj.clone();
        let label = format!("({} ⋆̃ {})", left.label(), hbar.label());
        obj = Density::new(label, move |b| tilde_star(&left, &hbar, b, budget));
    }
    let h_key = g - l + n as u32 - 1;
    let err: RefCell<Option<QdrError>> = RefCell::new(None);
    let mut f = |a: &[i64]| -> ExactScalar {
        match obj.coeff(a).and_then(|t| t.coefficient(h_key, l, k)) {
            Ok(v) => v,
            Err(eo) => {
                err.borrow_mut().get_or_insert(eo);
                ExactScalar::zero()
            }
        }
    };
    let bound = 2 * g as usize + n + 1;
    let c = symmetric_multilinear_coeff(&mut f, m, bound)?;
    if let Some(eo) = err.into_inner() {
        return Err(eo);
    }
    let phase_exp =
        e.iter().sum::<i64>() - 3 * g as i64 + 2 - n as i64 + k as i64 - m as i64;
    let val = &(&ExactScalar::i_pow(phase_exp) * &c)
        * &ExactScalar::from_rational(factorial_recip(m));
    val.as_rational().cloned().ok_or_else(|| {
        QdrError::NotReal(format!(
            "star-product correlator (g={g}, l={l}, k={k}, ψ-powers {e:?}) = {val}"
        ))
    })
}

// ---------------------------------------------------------------------------
// Shared graph machinery for routes A and B.
// ---------------------------------------------------------------------------

/// One admissible graph shape: ordered vertices, genus assignment, and
/// downhill edge slots (every parallel copy is its own slot).
struct GraphFamily {
    genera: Vec<u32>,
    slots: Vec<(usize, usize)>,
    aut: i64,
}

/// All edge-multiset/genus families on `nv` ordered vertices with total
/// genus `g`: first Betti number `h¹` edges beyond a spanning structure,
/// every vertex above the first connected to a lower-indexed one, no
/// self-loops.
fn graph_families(nv: usize, g: u32) -> Vec<GraphFamily> {
    let pairs: Vec<(usize, usize)> =
        (1..nv).flat_map(|hi| (0..hi).map(move |lo| (hi, lo))).collect();
    let mut out = Vec::new();
    for h1 in 0..=g {
        let ne = nv - 1 + h1 as usize;
        for counts in nonneg_compositions(ne as i64, pairs.len()) {
            let covered = (1..nv).all(|hi| {
                pairs.iter().zip(&counts).any(|(&(h, _), &c)| h == hi && c > 0)
            });
            if !covered {
                continue;
            }
            let mut slots = Vec::with_capacity(ne);
            let mut aut = 1i64;
            for (&pair, &c) in pairs.iter().zip(&counts) {
                for _ in 0..c {
                    slots.push(pair);
                }
                for j in 2..=c {
                    aut *= j;
                }
            }
            for genera in nonneg_compositions((g - h1) as i64, nv) {
                out.push(GraphFamily {
                    genera: genera.iter().map(|&x| x as u32).collect(),
                    slots: slots.clone(),
                    aut,
                });
            }
        }
    }
    out
}

/// All positive integer flow assignments on the slots, directed from the
/// higher-indexed vertex to the lower, balancing the fixed weights at
/// every vertex above the first.  Returns `(∏ flows, per-slot flow)`.
fn enumerate_flows(nv: usize, slots: &[(usize, usize)], fixed: &[i64]) -> Vec<(i64, Vec<i64>)> {
    let mut out = Vec::new();
    let mut flows = vec![0i64; slots.len()];
    let mut inflow = vec![0i64; nv];
    fn rec(
        v: usize,
        slots: &[(usize, usize)],
        fixed: &[i64],
        flows: &mut Vec<i64>,
        inflow: &mut Vec<i64>,
        out: &mut Vec<(i64, Vec<i64>)>,
    ) {
        if v == 0 {
            assert_eq!(fixed[0] + inflow[0], 0, "global weight balance");
            let prod: i64 = flows.iter().product();
            out.push((prod, flows.clone()));
            return;
        }
        let mine: Vec<usize> =
            slots.iter().enumerate().filter(|&(_, s)| s.0 == v).map(|(i, _)| i).collect();
        assert!(!mine.is_empty(), "vertex {v} has no downhill edge");
        let surplus = fixed[v] + inflow[v];
        if surplus < mine.len() as i64 {
            return;
        }
        let mut comps = Vec::new();
        compositions(surplus, mine.len(), &mut comps);
        for comp in comps {
            for (&slot, &f) in mine.iter().zip(&comp) {
                flows[slot] = f;
                inflow[slots[slot].1] += f;
            }
            rec(v - 1, slots, fixed, flows, inflow, out);
            for (&slot, &f) in mine.iter().zip(&comp) {
                inflow[slots[slot].1] -= f;
                flows[slot] = 0;
            }
        }
    }
    rec(nv - 1, slots, fixed, &mut flows, &mut inflow, &mut out);
    out
}

/// One vertex of a decorated graph: its genus, full weight profile with
/// the ψ-point first, the ψ-exponent, and a scalar prefactor.
struct VertexSpec {
    g: u32,
    weights: Vec<i64>,
    psi_exp: u32,
    scale: Rational,
}

/// `(l_v, k_v)` pairs admissible at a vertex on dimension grounds alone.
fn admissible_pairs(g: u32, npoints: usize, psi_exp: u32, cohft: &dyn CohFt) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    if 2 * g as i64 - 2 + npoints as i64 <= 0 {
        return out;
    }
    let rem = 3 * g as i64 - 3 + npoints as i64 - g as i64 - psi_exp as i64;
    if rem < 0 {
        return out;
    }
    for lv in 0..=g.min(rem as u32) {
        let need = rem as u32 - lv;
        for kv in 0..=(2 * g + 2) {
            if cohft.class_degree(g, npoints, kv) == Some(need) {
                out.push((lv, kv));
            }
        }
    }
    out
}

/// Whether some distribution of `(l, k)` over the vertex shapes is
/// dimension-admissible; used to skip flow enumeration early.
fn lk_feasible(shapes: &[(u32, usize, u32)], l: u32, k: u32, cohft: &dyn CohFt) -> bool {
    let mut reach: HashSet<(u32, u32)> = HashSet::from([(0, 0)]);
    for &(gv, np, pe) in shapes {
        let pairs = admissible_pairs(gv, np, pe, cohft);
        if pairs.is_empty() {
            return false;
        }
        let mut next = HashSet::new();
        for &(cl, ck) in &reach {
            for &(lv, kv) in &pairs {
                if cl + lv <= l && ck + kv <= k {
                    next.insert((cl + lv, ck + kv));
                }
            }
        }
        if next.is_empty() {
            return false;
        }
        reach = next;
    }
    reach.contains(&(l, k))
}

/// Σ over distributions of `λ_l` and the μ-grading `k` across the
/// vertices of `∏_v (μ-scale)·∫_{DR_{g_v}} ψ^{…} λ_{l_v} λ_{tags(k_v)}`,
/// times the vertex prefactors.
fn graph_term(
    specs: &[VertexSpec],
    l: u32,
    k: u32,
    cohft: &dyn CohFt,
) -> Result<Rational, QdrError> {
    let mut conv: HashMap<(u32, u32), Rational> =
        HashMap::from([((0, 0), Rational::one())]);
    let mut prefactor = Rational::one();
    for spec in specs {
        prefactor = &prefactor * &spec.scale;
        if prefactor.is_zero() {
            return Ok(Rational::zero());
        }
        let pairs = admissible_pairs(spec.g, spec.weights.len(), spec.psi_exp, cohft);
        let mut opts: Vec<(u32, u32, Rational)> = Vec::new();
        for (lv, kv) in pairs {
            let (scale, mut lams) = cohft.mu_part(kv).expect("admissible μ-part exists");
            if lv > 0 {
                lams.push(lv);
            }
            let bare = dr_pairing(spec.g, &spec.weights, 0, spec.psi_exp, &lams)?;
            if bare.is_zero() {
                continue;
            }
            opts.push((lv, kv, scale * bare));
        }
        if opts.is_empty() {
            return Ok(Rational::zero());
        }
        let mut next: HashMap<(u32, u32), Rational> = HashMap::new();
        for ((cl, ck), acc) in conv {
            for (lv, kv, val) in &opts {
                let (nl, nk) = (cl + lv, ck + kv);
                if nl > l || nk > k {
                    continue;
                }
                let add = &acc * val;
                let cur = next.entry((nl, nk)).or_insert_with(Rational::zero);
                *cur = &*cur + &add;
            }
        }
        if next.is_empty() {
            return Ok(Rational::zero());
        }
        conv = next;
    }
    Ok(conv.remove(&(l, k)).unwrap_or_else(Rational::zero) * prefactor)
}

// ---------------------------------------------------------------------------
// Route A: labeled free leaves on ordered-vertex graphs.
// ---------------------------------------------------------------------------

fn route_a(
    g: u32,
    l: u32,
    k: u32,
    e: &[i64],
    m: usize,
    cohft: &Arc<dyn CohFt + Send + Sync>,
) -> Result<Rational, QdrError> {
    let n = e.len();
    let families = graph_families(n, g);
    let err: RefCell<Option<QdrError>> = RefCell::new(None);
    let cohft_ref: &dyn CohFt = cohft.as_ref();
    let mut f = |a: &[i64]| -> ExactScalar {
        let suma: i64 = a.iter().sum();
        let mut acc = Rational::zero();
        for fam in &families {
            let mut place = vec![0usize; m];
            loop {
                let mut leaves: Vec<Vec<i64>> = vec![Vec::new(); n];
                for (j, &v) in place.iter().enumerate() {
                    leaves[v].push(a[j]);
                }
                // Vertex point counts are flow-independent: leg + leaves
                // (+ closing leaf at v₁) + edge endpoints.
                let mut npoints: Vec<usize> =
                    (0..n).map(|v| 1 + leaves[v].len() + usize::from(v == 0)).collect();
                for &(hi, lo) in &fam.slots {
                    npoints[hi] += 1;
                    npoints[lo] += 1;
                }
                let shapes: Vec<(u32, usize, u32)> = (0..n)
                    .map(|v| (fam.genera[v], npoints[v], e[v] as u32))
                    .collect();
                if lk_feasible(&shapes, l, k, cohft_ref) {
                    let mut fixed: Vec<i64> =
                        (0..n).map(|v| leaves[v].iter().sum::<i64>()).collect();
                    fixed[0] -= suma;
                    for (prod, flows) in enumerate_flows(n, &fam.slots, &fixed) {
                        let specs: Vec<VertexSpec> = (0..n)
                            .map(|v| {
                                let mut w = vec![0i64];
                                w.extend_from_slice(&leaves[v]);
                                if v == 0 {
                                    w.push(-suma);
                                }
                                for (&(hi, lo), &fl) in fam.slots.iter().zip(&flows) {
                                    if hi == v {
                                        w.push(-fl);
                                    }
                                    if lo == v {
                                        w.push(fl);
                                    }
                                }
                                VertexSpec {
                                    g: fam.genera[v],
                                    weights: w,
                                    psi_exp: e[v] as u32,
                                    scale: Rational::one(),
                                }
                            })
                            .collect();
                        match graph_term(&specs, l, k, cohft_ref) {
                            Ok(t) => {
                                if !t.is_zero() {
                                    acc += t * Rational::new(
                                        BigInt::from(prod),
                                        BigInt::from(fam.aut),
                                    );
                                }
                            }
                            Err(eo) => {
                                err.borrow_mut().get_or_insert(eo);
                                return ExactScalar::zero();
                            }
                        }
                    }
                }
                if !increment_placement(&mut place, n) {
                    break;
                }
            }
        }
        ExactScalar::from_rational(acc)
    };
    let bound = 2 * g as usize + n + 1;
    let c = symmetric_multilinear_coeff(&mut f, m, bound)?;
    if let Some(eo) = err.into_inner() {
        return Err(eo);
    }
    let val = &c * &ExactScalar::from_rational(factorial_recip(m));
    val.as_rational().cloned().ok_or_else(|| {
        QdrError::NotReal(format!(
            "leaf-graph correlator (g={g}, l={l}, k={k}, ψ-powers {e:?}) = {val}"
        ))
    })
}

// ---------------------------------------------------------------------------
// Route B: resummed leaves, coefficient extraction by interpolation.
// ---------------------------------------------------------------------------

fn route_b(
    g: u32,
    l: u32,
    k: u32,
    e: &[i64],
    m: usize,
    cohft: &Arc<dyn CohFt + Send + Sync>,
    cfg: &QdrConfig,
) -> Result<Rational, QdrError> {
    let n = e.len();
    let level: i64 = e.iter().sum();
    static CACHE: Lazy<
        Mutex<HashMap<(u32, u32, u32, usize, i64, String, u32), Arc<MultiPoly>>>,
    > = Lazy::new(|| Mutex::new(HashMap::new()));
    let ckey = (g, l, k, n, level, cohft.tag(), cfg.gmax);
    let poly = {
        let hit = CACHE.lock().unwrap().get(&ckey).cloned();
        match hit {
            Some(p) => p,
            None => {
                let built = Arc::new(route_b_poly(g, l, k, n, level, m, cohft)?);
                CACHE.lock().unwrap().insert(ckey, built.clone());
                built
            }
        }
    };
    let exps: Vec<u32> = e.iter().map(|&x| x as u32).collect();
    let c = poly.coeff_of(&exps);
    c.as_rational().cloned().ok_or_else(|| {
        QdrError::NotReal(format!(
            "leaf-resummed correlator (g={g}, l={l}, k={k}, ψ-powers {e:?}) = {c}"
        ))
    })
}

/// The full leaf-resummed generating polynomial at one `(g, l, k, n,
/// level)` slice, fitted on an exact integer grid and validated at a
/// held-out point.
fn route_b_poly(
    g: u32,
    l: u32,
    k: u32,
    n: usize,
    level: i64,
    m: usize,
    cohft: &Arc<dyn CohFt + Send + Sync>,
) -> Result<MultiPoly, QdrError> {
    struct BTerm {
        blocks: Vec<Vec<usize>>,
        genera: Vec<u32>,
        slots: Vec<(usize, usize)>,
        aut: i64,
        cvec: Vec<i64>,
    }
    let mut terms: Vec<BTerm> = Vec::new();
    for blocks in set_partitions(n) {
        let nv = blocks.len();
        let ctot = level - m as i64 + (n as i64 - nv as i64);
        if ctot < 0 {
            continue;
        }
        for fam in graph_families(nv, g) {
            for cvec in nonneg_compositions(ctot, nv) {
                terms.push(BTerm {
                    blocks: blocks.clone(),
                    genera: fam.genera.clone(),
                    slots: fam.slots.clone(),
                    aut: fam.aut,
                    cvec,
                });
            }
        }
    }
    let err: RefCell<Option<QdrError>> = RefCell::new(None);
    let cohft_ref: &dyn CohFt = cohft.as_ref();
    let mut f = |a: &[i64]| -> ExactScalar {
        let suma: i64 = a.iter().sum();
        let mut acc = Rational::zero();
        for t in &terms {
            let nv = t.blocks.len();
            let mut npoints: Vec<usize> =
                (0..nv).map(|v| t.blocks[v].len() + usize::from(v == 0)).collect();
            for &(hi, lo) in &t.slots {
                npoints[hi] += 1;
                npoints[lo] += 1;
            }
            let shapes: Vec<(u32, usize, u32)> =
                (0..nv).map(|v| (t.genera[v], npoints[v], t.cvec[v] as u32)).collect();
            if !lk_feasible(&shapes, l, k, cohft_ref) {
                continue;
            }
            let mut fixed: Vec<i64> =
                (0..nv).map(|v| t.blocks[v].iter().map(|&j| a[j]).sum()).collect();
            fixed[0] -= suma;
            for (prod, flows) in enumerate_flows(nv, &t.slots, &fixed) {
                let specs: Vec<VertexSpec> = (0..nv)
                    .map(|v| {
                        let amin = a[t.blocks[v][0]];
                        let mut w: Vec<i64> = t.blocks[v].iter().map(|&j| a[j]).collect();
                        if v == 0 {
                            w.push(-suma);
                        }
                        for (&(hi, lo), &fl) in t.slots.iter().zip(&flows) {
                            if hi == v {
                                w.push(-fl);
                            }
                            if lo == v {
                                w.push(fl);
                            }
                        }
                        VertexSpec {
                            g: t.genera[v],
                            weights: w,
                            psi_exp: t.cvec[v] as u32,
                            scale: int_pow(amin, t.cvec[v] as u32),
                        }
                    })
                    .collect();
                match graph_term(&specs, l, k, cohft_ref) {
                    Ok(v) => {
                        if !v.is_zero() {
                            acc += v * Rational::new(BigInt::from(prod), BigInt::from(t.aut));
                        }
                    }
                    Err(eo) => {
                        err.borrow_mut().get_or_insert(eo);
                        return ExactScalar::zero();
                    }
                }
            }
        }
        ExactScalar::from_rational(acc)
    };
    let bound = 4 * g as usize + n + 1;
    let bounds = vec![bound; n];
    let vars = VarSet::new((1..=n).map(|i| format!("a{i}")).collect::<Vec<_>>());
    let fitted = interpolate_multivariate(&mut f, &bounds, &vars);
    if let Some(eo) = err.borrow_mut().take() {
        return Err(eo);
    }
    // Degree-bound guard: the fit must reproduce a held-out point.
    let probe: Vec<i64> = (0..n).map(|i| bound as i64 + 2 + i as i64).collect();
    let direct = f(&probe);
    if let Some(eo) = err.borrow_mut().take() {
        return Err(eo);
    }
    if fitted.eval_ints(&probe) != direct {
        return Err(QdrError::ExactAlg(
            crate::exactalg::ExactAlgError::InterpolationInconsistent(format!(
                "leaf-resummed polynomial degree bound too small at (g={g}, l={l}, k={k}, n={n}, level={level})"
            )),
        ));
    }
    Ok(fitted)
}

// ---------------------------------------------------------------------------
// Small combinatorial helpers.
// ---------------------------------------------------------------------------

/// Ordered decompositions of `total ≥ 0` into `parts` nonnegative parts.
fn nonneg_compositions(total: i64, parts: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    fn rec(remaining: i64, parts: usize, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if parts == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for x in 0..=remaining {
            prefix.push(x);
            rec(remaining - x, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    if total >= 0 {
        rec(total, parts, &mut Vec::new(), &mut out);
    }
    out
}

/// Set partitions of `{0, …, n−1}` with blocks ordered by their minima
/// (restricted-growth enumeration) and elements ascending inside blocks.
fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    fn rec(j: usize, n: usize, maxb: usize, rgs: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
        if j == n {
            let nb = maxb + 1;
            let mut blocks = vec![Vec::new(); nb];
            for (i, &b) in rgs.iter().enumerate() {
                blocks[b].push(i);
            }
            out.push(blocks);
            return;
        }
        for b in 0..=maxb + 1 {
            rgs[j] = b;
            rec(j + 1, n, maxb.max(b), rgs, out);
        }
    }
    if n == 0 {
        return vec![Vec::new()];
    }
    rgs[0] = 0;
    rec(1, n, 0, &mut rgs, &mut out);
    out
}

/// Odometer step over placements `[m] → [n]`; false after the last one.
fn increment_placement(place: &mut [usize], n: usize) -> bool {
    for slot in place.iter_mut() {
        *slot += 1;
        if *slot < n {
            return true;
        }
        *slot = 0;
    }
    false
}

fn factorial_recip(m: usize) -> Rational {
    let mut fact = BigInt::one();
    for j in 2..=m {
        fact *= BigInt::from(j as i64);
    }
    Rational::new(BigInt::one(), fact)
}

fn int_pow(base: i64, exp: u32) -> Rational {
    let mut acc = BigInt::one();
    for _ in 0..exp {
        acc *= BigInt::from(base);
    }
    Rational::from_integer(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdr::theory::TrivialCohFt;

    fn trivial() -> Arc<dyn CohFt + Send + Sync> {
        Arc::new(TrivialCohFt)
    }

    fn q(num: i64, den: i64) -> Rational {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn genus_zero_three_point_correlator_is_one_on_every_route() {
        let cfg = QdrConfig::default();
        let key = CorrelatorKey::unit(0, 0, 0, &[0, 0, 0]);
        let v = correlator(&key, &[Route::A, Route::B, Route::C], &trivial(), &cfg).unwrap();
        assert_eq!(v.value, q(1, 1));
        assert_eq!(v.routes.len(), 3);
    }

    #[test]
    fn genus_one_one_point_correlator_matches_its_classical_value() {
        // ⟨τ_{0,1}⟩ at the ℏ¹ slice is −1/24.
        let cfg = QdrConfig::default();
        let key = CorrelatorKey::unit(1, 0, 0, &[0]);
        let v = correlator(&key, &[Route::A, Route::C], &trivial(), &cfg).unwrap();
        assert_eq!(v.value, q(-1, 24));
    }

    #[test]
    fn two_point_correlators_with_zero_psi_powers_vanish() {
        let cfg = QdrConfig::default();
        for (l, k) in [(0u32, 0u32), (1, 0)] {
            let key = CorrelatorKey::unit(1, l, k, &[0, 0]);
            let v = correlator(&key, &[Route::C], &trivial(), &cfg).unwrap();
            assert!(v.value.is_zero(), "⟨τ₀τ₀⟩ at (l={l}, k={k}) = {}", v.value);
        }
    }

    #[test]
    fn inserted_normalization_pins_the_divided_power_convention() {
        // ⟨τ_{0,1}τ_{2,1}⟩ at the ε² slice of genus one equals 1/24: the
        // first key whose extraction arity exceeds one on both graph and
        // star-product routes.
        let cfg = QdrConfig::default();
        for route in [Route::A, Route::C] {
            let v = inserted_correlator(1, 1, 0, &[2], route, &trivial(), &cfg).unwrap();
            assert_eq!(v, q(1, 24), "route {route}");
        }
    }

    #[test]
    fn epsilon_slice_of_genus_one_one_point_function_vanishes() {
        let cfg = QdrConfig::default();
        let key = CorrelatorKey::unit(1, 1, 0, &[2]);
        let v = correlator(&key, &[Route::C], &trivial(), &cfg).unwrap();
        assert!(v.value.is_zero(), "⟨τ₂⟩ at the ε² slice = {}", v.value);
    }

    #[test]
    fn classical_slice_of_genus_two_matches_the_psi_volume() {
        // ⟨τ₄⟩ at the ε⁴ slice of genus two is ∫ ψ⁴ over the genus-two
        // one-pointed moduli space, 1/1152.
        let cfg = QdrConfig::default();
        let key = CorrelatorKey::unit(2, 2, 0, &[4]);
        let v = correlator(&key, &[Route::C], &trivial(), &cfg).unwrap();
        assert_eq!(v.value, q(1, 1152));
    }

    #[test]
    fn unstable_keys_are_rejected() {
        let cfg = QdrConfig::default();
        for (g, ds) in [(0u32, vec![0i64]), (0, vec![0, 0]), (1, vec![]), (0, vec![])] {
            let key = CorrelatorKey::unit(g, 0, 0, &ds);
            let r = correlator(&key, &[Route::C], &trivial(), &cfg);
            assert!(matches!(r, Err(QdrError::StabilityViolation(_))), "({g}, {ds:?})");
        }
    }

    #[test]
    fn routes_agree_on_a_genus_one_two_point_sweep() {
        let cfg = QdrConfig::default();
        for ds in [[1i64, 0], [1, 1], [2, 0]] {
            let key = CorrelatorKey::unit(1, 0, 0, &ds);
            let v = correlator(&key, &[Route::A, Route::B, Route::C], &trivial(), &cfg)
                .unwrap();
            assert_eq!(v.routes[0].1, v.routes[2].1, "{key}");
        }
    }
}
