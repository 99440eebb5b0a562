//! Densities in the divided power-sum representation, Hamiltonian
//! densities of the hierarchy, and the star-product operations.
//!
//! A density `f` is stored through its symmetric coefficient functions:
//! `f = Σ_m (1/m!) Σ_{a⃗∈ℤ^m} C_m(a⃗) p_{a₁}⋯p_{a_m} e^{𝗂x·Σa}` with `C`
//! symmetric in its arguments.  In this representation
//!
//! * `∂f/∂p_b` appends an index: `C'_m(a⃗) = C_{m+1}(a⃗, b)`;
//! * a product shuffles: `C^{fg}_m(a⃗) = Σ_{S⊔T=[m]} C^f(a_S)·C^g(a_T)`;
//! * the coefficient of a square-free monomial `p_{a₁}⋯p_{a_m}` at
//!   pairwise-distinct indices is exactly `C_m(a⃗)`.
//!
//! The star product contracts positive modes against negative ones with a
//! weight `𝗂ℏ·k` per contraction.  Writing the second factor as a local
//! functional (supported on index sums zero) makes every contraction sum
//! finite: the `j` contracted modes are an ordered composition of the
//! complementary external sum.

use super::pairing::vertex_factor;
use super::series::Trunc;
use super::{QdrError, ENGINE_GENUS_CAP};
use crate::drcalc::{dr_hodge_integral, CohFt};
use crate::exactalg::ExactScalar;
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

type EvalFn = dyn Fn(&[i64]) -> Result<Trunc, QdrError> + Send + Sync;

/// A density presented through its symmetric coefficient functions, with
/// a shared memo table keyed by the sorted index tuple.
#[derive(Clone)]
#[derive(Clone)]
pub struct Density {
    label: String,
    eval: Arc<EvalFn>,
    cache: Arc<Mutex<HashMap<Vec<i64>, Trunc>>>,
}

impl Density {
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn(&[i64]) -> Result<Trunc, QdrError> + Send + Sync + 'static,
    ) -> Self {
        Density {
            label: label.into(),
            eval: Arc::new(eval),
            cache: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The coefficient function `C_m(a⃗)` at `m = a.len()`.
    pub fn coeff(&self, a: &[i64]) -> Result<Trunc, QdrError> {
        let mut key = a.to_vec();
        key.sort_unstable();
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let v = (self.eval)(&key)?;
        self.cache.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }
}

/// Shared instances: Hamiltonian densities are reused across two-point
/// functions, correlators, and verification sweeps.
static DENSITY_REGISTRY: Lazy<Mutex<HashMap<(i64, String, u32), Density>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// The Hamiltonian density `H_{d,α}`: its arity-`m` coefficient is the
/// graded sum over genera of `ψ^{d+1}`-DR integrals with profile
/// `(0, a₁, …, a_m, −Σa)`, carrying `(𝗂ℏ)^g(−ε²/𝗂ℏ)^l μ^k` bookkeeping.
/// Constant (`m = 0`) terms are kept: they matter when the density enters
/// an evaluation, though never inside a commutator.
pub fn hamiltonian_density(
    d: i64,
    alpha: usize,
    cohft: Arc<dyn CohFt + Send + Sync>,
    gmax: u32,
) -> Density {
    assert!(d >= -1, "Hamiltonian index starts at d = −1");
    assert_eq!(alpha, 1, "rank-one engine serves the unit primary only");
    assert!(gmax <= ENGINE_GENUS_CAP);
    let key = (d, cohft.tag(), gmax);
    if let Some(existing) = DENSITY_REGISTRY.lock().unwrap().get(&key) {
        return existing.clone();
    }
    let label = format!("H[{d}]");
    let theory = cohft.clone();
    let density = Density::new(label, move |a: &[i64]| {
        let m = a.len();
        let total: i64 = a.iter().sum();
        let mut weights = Vec::with_capacity(m + 2);
        weights.push(0);
        weights.extend_from_slice(a);
        weights.push(-total);
        let mut out = Trunc::zero().cap_order(gmax);
        for g in 0..=gmax {
            if 2 * g as usize + m == 0 {
                continue;
            }
            out = out.add(&vertex_factor(
                g,
                &weights,
                0,
                (d + 1) as u32,
                theory.as_ref(),
                gmax,
            )?);
        }
        Ok(out)
    });
    DENSITY_REGISTRY.lock().unwrap().insert(key, density.clone());
    density
}

/// The coefficient of `p_{a₁}¹⋯p_{a_m}¹ e^{𝗂xΣa} (𝗂ℏ)^g (−ε²/𝗂ℏ)^l μ^k`
/// in the local functional `H̄_{d,α}` — the bare DR–Hodge integral, with
/// the genus fixed by degree bookkeeping.  Constants (`m = 0`) are dropped,
/// matching the convention that local functionals are defined modulo
/// constants.
pub fn hamiltonian_coefficient(
    d: i64,
    alpha: usize,
    a: &[i64],
    l: u32,
    k: u32,
    cohft: &dyn CohFt,
) -> Result<ExactScalar, QdrError> {
    if d < -1 {
        return Err(QdrError::OutOfRange(format!("Hamiltonian index {d} below −1")));
    }
    if alpha != 1 {
        return Err(QdrError::OutOfRange(format!(
            "primary index {alpha} outside the rank-one theory"
        )));
    }
    let m = a.len();
    let Some((_, parts)) = cohft.mu_part(k) else {
        return Ok(ExactScalar::zero());
    };
    let deg_k: u32 = parts.iter().sum();
    // (d+1) + l + deg = 2g + m − 1 fixes the genus.
    let two_g = d + 2 + l as i64 + deg_k as i64 - m as i64;
    if two_g < 0 || two_g % 2 != 0 {
        return Ok(ExactScalar::zero());
    }
    let g = (two_g / 2) as u32;
    if g > ENGINE_GENUS_CAP {
        return Err(QdrError::OutOfRange(format!(
            "degree bookkeeping lands at genus {g}, beyond the engine cap"
        )));
    }
    if l > g || m == 0 {
        return Ok(ExactScalar::zero());
    }
    let bare = dr_hodge_integral(g, a, (d + 1) as u32, l, cohft, k)?;
    Ok(ExactScalar::from_rational(bare))
}

/// Ordered compositions of `total` into `parts` strictly positive parts.
pub(super) fn compositions(total: i64, parts: usize, out: &mut Vec<Vec<i64>>) {
    fn rec(remaining: i64, parts: usize, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if parts == 1 {
            if remaining >= 1 {
                prefix.push(remaining);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        for first in 1..=(remaining - (parts as i64 - 1)) {
            prefix.push(first);
            rec(remaining - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    if parts >= 1 && total >= parts as i64 {
        rec(total, parts, &mut Vec::new(), out);
    }
}

fn factorial_inv(j: usize) -> ExactScalar {
    let mut fact: i64 = 1;
    for i in 2..=j as i64 {
        fact *= i;
    }
    ExactScalar::from_ratio(1, fact)
}

/// Core of both star operations: the arity-`m` coefficient of the
/// contraction sum `Σ_{j≥1} ((𝗂ℏ)^j/j!) Σ_{k⃗>0} ∏kᵢ · C^f(b_S,k⃗)·C^{ḡ}(b_T,−k⃗)`
/// over splittings `S⊔T` of the external indices, where the second factor
/// is a local functional (so `Σk⃗` is pinned to `Σb_T`).  With
/// `antisymmetrize` the mirrored contraction is subtracted, giving the
/// commutator `[f, ḡ]`; without it this is the one-sided product `f ⋆̃ ḡ`.
fn contraction_sum(
    f: &Density,
    gbar: &Density,
    b: &[i64],
    budget: u32,
    antisymmetrize: bool,
) -> Result<Trunc, QdrError> {
    let m = b.len();
    assert!(m < 20, "external arity out of expected range");
    let mut acc = Trunc::zero().cap_order(budget);
    for j in 1..=budget as usize {
        let mut jsum = Trunc::zero();
        for mask in 0u32..(1u32 << m) {
            let mut bs = Vec::new();
            let mut bt = Vec::new();
            for (i, &bi) in b.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    bs.push(bi);
                } else {
                    bt.push(bi);
                }
            }
            let sum_t: i64 = bt.iter().sum();
            if sum_t >= j as i64 {
                let mut kvecs = Vec::new();
                compositions(sum_t, j, &mut kvecs);
                for kvec in kvecs {
                    let prodk: i64 = kvec.iter().product();
                    let mut left = bs.clone();
                    left.extend_from_slice(&kvec);
                    let cf = f.coeff(&left)?;
                    if cf.is_zero() {
                        continue;
                    }
                    let mut right = bt.clone();
                    right.extend(kvec.iter().map(|&k| -k));
                    let cg = gbar.coeff(&right)?;
                    jsum = jsum.add(&cf.mul(&cg).scale(&ExactScalar::from_int(prodk)));
                }
            }
            if antisymmetrize {
                let sum_s: i64 = bs.iter().sum();
                if -sum_s >= j as i64 {
                    let mut kvecs = Vec::new();
                    compositions(-sum_s, j, &mut kvecs);
                    for kvec in kvecs {
                        let prodk: i64 = kvec.iter().product();
                        let mut left = bs.clone();
                        left.extend_from_slice(&kvec);
                        let cg = gbar.coeff(&left)?;
                        if cg.is_zero() {
                            continue;
                        }
                        let mut right = bt.clone();
                        right.extend(kvec.iter().map(|&k| -k));
                        let cf = f.coeff(&right)?;
                        jsum =
                            jsum.add(&cg.mul(&cf).scale(&ExactScalar::from_int(-prodk)));
                    }
                }
            }
        }
        acc = acc.add(&jsum.scale(&factorial_inv(j)).mul_i_hbar_pow(j as u32));
    }
    Ok(acc.cap_order(budget))
}

/// The arity-`b.len()` coefficient of the commutator `[f, ḡ]`, with `ḡ`
/// read as a local functional.  Exact through combined order `budget`.
pub fn commutator(
    f: &Density,
    gbar: &Density,
    b: &[i64],
    budget: u32,
) -> Result<Trunc, QdrError> {
    contraction_sum(f, gbar, b, budget, true)
}

/// The arity-`b.len()` coefficient of the one-sided product `f ⋆̃ ḡ`
/// (the star product minus the pointwise product).
pub fn tilde_star(
    f: &Density,
    gbar: &Density,
    b: &[i64],
    budget: u32,
) -> Result<Trunc, QdrError> {
    contraction_sum(f, gbar, b, budget, false)
}

/// Requested coefficient of `[f, ḡ]` or `f ⋆̃ ḡ` at an external index
/// configuration — the named operation form of the two functions above.
pub fn star_commutator(
    f: &Density,
    gbar: &Density,
    external: &[i64],
    budget: u32,
    one_sided: bool,
) -> Result<Trunc, QdrError> {
    if one_sided {
        assert!(
            external.iter().all(|&b| b > 0),
            "one-sided products are used at positive external modes only"
        );
        tilde_star(f, gbar, external, budget)
    } else {
        commutator(f, gbar, external, budget)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::Rational;
    use crate::qdr::theory::TrivialCohFt;
    use num::BigInt;

    fn q(num: i64, den: i64) -> ExactScalar {
        ExactScalar::from_ratio(num, den)
    }

    fn trivial() -> Arc<dyn CohFt + Send + Sync> {
        Arc::new(TrivialCohFt)
    }

    #[test]
    fn h_zero_functional_is_the_divided_square() {
        // H̄_{0,1} = ∫ (u₀¹)²/2 dx: the only functional coefficients are
        // quadratic, C₂(a, −a) = 1.
        let c = hamiltonian_coefficient(0, 1, &[5, -5], 0, 0, &TrivialCohFt).unwrap();
        assert_eq!(c, ExactScalar::one());
        // Beyond the quadratic term everything vanishes.
        assert!(hamiltonian_coefficient(0, 1, &[], 0, 0, &TrivialCohFt).unwrap().is_zero());
        for (a, l, k) in [(vec![2, -2, 0, 0], 0u32, 0u32), (vec![3, -3], 1, 0)] {
            let v = hamiltonian_coefficient(0, 1, &a, l, k, &TrivialCohFt).unwrap();
            assert!(v.is_zero(), "unexpected coefficient at {a:?}, l={l}, k={k}");
        }
    }

    #[test]
    fn density_keeps_the_genus_one_constant() {
        // The density H₀ has constant term −1/24 at ℏ¹ (dropped in H̄).
        let h0 = hamiltonian_density(0, 1, trivial(), 2);
        let c0 = h0.coeff(&[]).unwrap();
        assert_eq!(c0.coefficient(1, 0, 0).unwrap(), &ExactScalar::i() * &q(-1, 24));
        assert!(hamiltonian_coefficient(0, 1, &[], 0, 0, &TrivialCohFt).unwrap().is_zero());
    }

    #[test]
    fn derivative_in_p_zero_lowers_the_hamiltonian_index() {
        // C^{H_d}_{m+1}(a⃗, 0) = C^{H_{d−1}}_m(a⃗) as truncated series.
        let theory = trivial();
        for d in 0..=3i64 {
            let hd = hamiltonian_density(d, 1, theory.clone(), 2);
            let hprev = hamiltonian_density(d - 1, 1, theory.clone(), 2);
            for sample in [vec![4i64], vec![2, 3], vec![1, -4, 5]] {
                let mut appended = sample.clone();
                appended.push(0);
                assert_eq!(
                    hd.coeff(&appended).unwrap(),
                    hprev.coeff(&sample).unwrap(),
                    "∂/∂p₀ mismatch at d={d}, a={sample:?}"
                );
            }
        }
    }

    #[test]
    fn commuting_with_h_zero_bar_is_the_x_derivative() {
        // (1/ℏ)[f, H̄_{0,1}] = ∂ₓ f: the commutator coefficient equals
        // 𝗂·(Σb)·ℏ·C^f(b⃗).
        let theory = trivial();
        let f = hamiltonian_density(2, 1, theory.clone(), 2);
        let hbar0 = hamiltonian_density(0, 1, theory, 2);
        for b in [vec![3i64], vec![1, 2], vec![2, -5]] {
            let total: i64 = b.iter().sum();
            let comm = commutator(&f, &hbar0, &b, 3).unwrap();
            let expect = f
                .coeff(&b)
                .unwrap()
                .mul_i_hbar_pow(1)
                .scale(&ExactScalar::from_int(total))
                .cap_order(comm.order());
            assert_eq!(comm, expect, "∂ₓ action failed at {b:?}");
        }
    }

    #[test]
    fn hamiltonian_functionals_commute_at_sampled_modes() {
        // The functional commutator [H̄_{d₁}, H̄_{d₂}] is the zero-sum
        // sector of the density commutator; it must vanish identically.
        let theory = trivial();
        for (d1, d2) in [(1i64, 2i64), (2, 3)] {
            let h1 = hamiltonian_density(d1, 1, theory.clone(), 2);
            let h2 = hamiltonian_density(d2, 1, theory.clone(), 2);
            for b in [vec![0i64], vec![1, -1], vec![4, -4], vec![2, 3, -5]] {
                let c = commutator(&h1, &h2, &b, 3).unwrap();
                assert!(c.is_zero(), "[H̄_{d1}, H̄_{d2}] ≠ 0 at {b:?}: {c}");
            }
        }
    }

    #[test]
    fn tau_symmetry_at_sampled_modes() {
        // [H_{d₁−1}, H̄_{d₂}] = [H_{d₂−1}, H̄_{d₁}] as densities, at
        // arbitrary external modes (zero-sum or not).
        let theory = trivial();
        for (d1, d2) in [(1i64, 2i64), (0, 3), (2, 3)] {
            let f1 = hamiltonian_density(d1 - 1, 1, theory.clone(), 2);
            let g1 = hamiltonian_density(d2, 1, theory.clone(), 2);
            let f2 = hamiltonian_density(d2 - 1, 1, theory.clone(), 2);
            let g2 = hamiltonian_density(d1, 1, theory.clone(), 2);
            for b in [vec![2i64], vec![1, 3], vec![2, -2], vec![1, 1, -5]] {
                let lhs = commutator(&f1, &g1, &b, 3).unwrap();
                let rhs = commutator(&f2, &g2, &b, 3).unwrap();
                assert_eq!(lhs, rhs, "tau symmetry failed at ({d1},{d2}), {b:?}");
            }
        }
    }

    #[test]
    fn genus_bookkeeping_errors_beyond_the_engine_cap() {
        let r = hamiltonian_coefficient(9, 1, &[1], 0, 0, &TrivialCohFt);
        assert!(matches!(r, Err(QdrError::OutOfRange(_))));
        let kdv_cubic =
            hamiltonian_coefficient(1, 1, &[2, 3, -5], 0, 0, &TrivialCohFt).unwrap();
        // Genus-0 cubic data: ∫_{DR₀(0,2,3,−5,0)} ψ₁² = 1.
        assert_eq!(kdv_cubic, ExactScalar::one());
        assert_eq!(
            kdv_cubic.as_rational().cloned(),
            Some(Rational::from(BigInt::from(1)))
        );
    }
}
