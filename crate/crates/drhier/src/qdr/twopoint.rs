//! Two-point functions of the hierarchy: the nonconstant coefficients come
//! from inverting `∂ₓ` on the commutator `(1/ℏ)[H_{d₁−1}, H̄_{d₂}]`, the
//! constant terms from an overdetermined recursion seeded by a direct
//! double-DR formula for `∂Ω/∂p₀¹` at the origin.
//!
//! Inverting `∂ₓ` divides the arity-`m` coefficient by `𝗂·Σb`.  On the
//! zero-sum sector the division is performed by exact polynomial
//! continuation: the coefficient along the line `b(t) = (b₁+t, b₂, …)` is
//! a polynomial in `t`, divisible by `𝗂t` with zero remainder — a nonzero
//! remainder would expose a bug, so it is checked, not assumed.

use super::density::{commutator, hamiltonian_density, Density};
use super::pairing::vertex_factor;
use super::series::Trunc;
use super::QdrError;
use crate::drcalc::CohFt;
use crate::exactalg::{lagrange_interpolate, ExactScalar, MultiPoly, VarSet};
use once_cell::sync::Lazy;
use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

/// A two-point function `Ω_{d₁,1;d₂,1}` with its constant term fixed.
pub struct TwoPoint {
    d1: i64,
    d2: i64,
    f: Density,
    gbar: Density,
    gmax: u32,
    constant: Trunc,
    cache: Mutex<HashMap<Vec<i64>, Trunc>>,
}

/// Build `Ω_{d₁,1;d₂,1}`, including its constant term.  Construction
/// runs the overdetermination checks of the constant recursion; an
/// inconsistency is fatal and must never fire.
pub fn two_point(
    d1: i64,
    d2: i64,
    cohft: Arc<dyn CohFt + Send + Sync>,
    gmax: u32,
) -> Result<TwoPoint, QdrError> {
    if d1 < 0 || d2 < 0 {
        return Err(QdrError::OutOfRange(format!(
            "two-point indices must be nonnegative, got ({d1}, {d2})"
        )));
    }
    let constant = two_point_constant(d1, d2, cohft.clone(), gmax)?;
    let f = hamiltonian_density(d1 - 1, 1, cohft.clone(), gmax);
    let gbar = hamiltonian_density(d2, 1, cohft, gmax);
    Ok(TwoPoint { d1, d2, f, gbar, gmax, constant, cache: Mutex::new(HashMap::new()) })
}

impl TwoPoint {
    pub fn indices(&self) -> (i64, i64) {
        (self.d1, self.d2)
    }

    /// The constant term `Ω|_{p=0}`.
    pub fn constant(&self) -> &Trunc {
        &self.constant
    }

    /// The arity-`m` coefficient function `C^Ω_m(b⃗)`.
    pub fn coeff(&self, b: &[i64]) -> Result<Trunc, QdrError> {
        if b.is_empty() {
            return Ok(self.constant.clone());
        }
        let mut key = b.to_vec();
        key.sort_unstable();
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let v = self.nonconstant(&key)?;
        self.cache.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }

    fn dx_omega(&self, b: &[i64]) -> Result<Trunc, QdrError> {
        Ok(commutator(&self.f, &self.gbar, b, self.gmax + 1)?.div_hbar_pow(1))
    }

    fn nonconstant(&self, b: &[i64]) -> Result<Trunc, QdrError> {
        let total: i64 = b.iter().sum();
        if total != 0 {
            let inv = (&ExactScalar::i() * &ExactScalar::from_int(total)).recip();
            return Ok(self.dx_omega(b)?.scale(&inv));
        }
        // Zero-sum sector: continue along b(t) = (b₁+t, b₂, …) and divide
        // the per-key polynomial exactly by 𝗂t.
        let degree_bound = 2 * self.gmax as usize + 6;
        let vars = VarSet::new(vec!["t"]);
        let mut samples: Vec<(i64, Trunc)> = Vec::new();
        for t in 1..=(degree_bound as i64 + 2) {
            let mut shifted = b.to_vec();
            shifted[0] += t;
            samples.push((t, self.dx_omega(&shifted)?));
        }
        let order = samples.iter().map(|(_, v)| v.order()).min().expect("samples");
        let keys: BTreeSet<_> = samples
            .iter()
            .flat_map(|(_, v)| v.terms().map(|(k, _)| *k))
            .collect();
        let lin = MultiPoly::var(&vars, 0).scale(&ExactScalar::i());
        let mut out = Trunc::zero().cap_order(order);
        for key in keys {
            let pts: Vec<(i64, MultiPoly)> = samples
                .iter()
                .map(|&(t, ref v)| {
                    (t, MultiPoly::scalar(&vars, v.coefficient(key.0, key.1, key.2).unwrap_or_else(|_| ExactScalar::zero())))
                })
                .collect();
            let fitted = lagrange_interpolate(&pts[..=degree_bound], 0, &vars);
            // Degree-bound guard: the fit must reproduce the held-out point.
            let check = fitted.eval_ints(&[pts[degree_bound + 1].0]);
            let held = pts[degree_bound + 1].1.as_scalar().expect("constant sample");
            if check != held {
                return Err(QdrError::ExactAlg(
                    crate::exactalg::ExactAlgError::InterpolationInconsistent(format!(
                        "zero-sum continuation degree bound too small at {b:?}"
                    )),
                ));
            }
            let quotient = fitted.exact_div_linear(&lin)?;
            out.insert(key.0, key.1, key.2, quotient.eval_ints(&[0]));
        }
        Ok(out)
    }
}

/// `∂Ω_{p,1;q,1}/∂p₀¹` at the origin, evaluated by the direct double-DR
/// formula: a sum over splittings of the x-derivative into two vertex
/// integrals joined by `n ≥ 1` contracted modes, with the coefficient of
/// `a¹` extracted by exact interpolation.
pub fn derivative_two_point(
    p: i64,
    q: i64,
    cohft: Arc<dyn CohFt + Send + Sync>,
    gmax: u32,
) -> Result<Trunc, QdrError> {
    if p < 0 || q < 0 {
        return Err(QdrError::OutOfRange(format!(
            "ψ-exponents must be nonnegative, got ({p}, {q})"
        )));
    }
    static MEMO: Lazy<Mutex<HashMap<(i64, i64, String, u32), Trunc>>> =
        Lazy::new(|| Mutex::new(HashMap::new()));
    let memo_key = (p, q, cohft.tag(), gmax);
    if let Some(v) = MEMO.lock().unwrap().get(&memo_key) {
        return Ok(v.clone());
    }

    let degree_bound = 2 * gmax as usize + 4;
    let vars = VarSet::new(vec!["a"]);
    let mut samples: Vec<(i64, Trunc)> = Vec::new();
    for a in 1..=(degree_bound as i64 + 2) {
        samples.push((a, derivative_two_point_at(p, q, a, cohft.as_ref(), gmax)?));
    }
    let order = samples.iter().map(|(_, v)| v.order()).min().expect("samples");
    let keys: BTreeSet<_> =
        samples.iter().flat_map(|(_, v)| v.terms().map(|(k, _)| *k)).collect();
    let mut out = Trunc::zero().cap_order(order);
    for key in keys {
        let pts: Vec<(i64, MultiPoly)> = samples
            .iter()
            .map(|&(a, ref v)| {
                (a, MultiPoly::scalar(&vars, v.coefficient(key.0, key.1, key.2).unwrap_or_else(|_| ExactScalar::zero())))
            })
            .collect();
        let fitted = lagrange_interpolate(&pts[..=degree_bound], 0, &vars);
        let check = fitted.eval_ints(&[pts[degree_bound + 1].0]);
        if check != pts[degree_bound + 1].1.as_scalar().expect("constant sample") {
            return Err(QdrError::ExactAlg(
                crate::exactalg::ExactAlgError::InterpolationInconsistent(format!(
                    "derivative-two-point degree bound too small at ({p},{q})"
                )),
            ));
        }
        out.insert(key.0, key.1, key.2, fitted.coeff_of(&[1]));
    }
    MEMO.lock().unwrap().insert(memo_key, out.clone());
    Ok(out)
}

/// The double-DR sum at a fixed positive total mode `a`.
fn derivative_two_point_at(
    p: i64,
    q: i64,
    a: i64,
    cohft: &dyn CohFt,
    gmax: u32,
) -> Result<Trunc, QdrError> {
    let mut acc = Trunc::zero().cap_order(gmax);
    for n in 1..=(gmax as usize + 1).min(a as usize) {
        let mut nfact: i64 = 1;
        for i in 2..=n as i64 {
            nfact *= i;
        }
        for g1 in 0..=gmax {
            for g2 in 0..=gmax {
                if g1 + g2 + n as u32 - 1 > gmax {
                    continue;
                }
                let mut ksum = Trunc::zero();
                let mut kvecs = Vec::new();
                super::density::compositions(a, n, &mut kvecs);
                for kvec in kvecs {
                    let prodk: i64 = kvec.iter().product();
                    let mut w1 = vec![0i64];
                    w1.extend_from_slice(&kvec);
                    w1.push(-a);
                    let t1 = vertex_factor(g1, &w1, 0, p as u32, cohft, gmax)?;
                    if t1.is_zero() {
                        continue;
                    }
                    let mut w2 = vec![0i64];
                    w2.extend(kvec.iter().map(|&k| -k));
                    w2.push(a);
                    let t2 = vertex_factor(g2, &w2, 0, q as u32, cohft, gmax)?;
                    ksum = ksum.add(&t1.mul(&t2).scale(&ExactScalar::from_int(prodk)));
                }
                acc = acc.add(
                    &ksum.scale(&ExactScalar::from_ratio(1, nfact)).mul_i_hbar_pow(n as u32 - 1),
                );
            }
        }
    }
    Ok(acc.cap_order(gmax))
}

/// The constant term of `Ω_{d₁;d₂}` by the telescoped recursion
/// `C(p,q) = Σ_{j=0}^{p} (−1)^j D(p−j, q+1+j)`, with the redundant
/// equations of the overdetermined system checked explicitly.
fn two_point_constant(
    d1: i64,
    d2: i64,
    cohft: Arc<dyn CohFt + Send + Sync>,
    gmax: u32,
) -> Result<Trunc, QdrError> {
    let closed_form = |p: i64, q: i64| -> Result<Trunc, QdrError> {
        let mut acc = Trunc::zero().cap_order(gmax);
        for j in 0..=p {
            let d = derivative_two_point(p - j, q + 1 + j, cohft.clone(), gmax)?;
            let sign = if j % 2 == 0 { 1 } else { -1 };
            acc = acc.add(&d.scale(&ExactScalar::from_int(sign)));
        }
        Ok(acc)
    };
    let c = closed_form(d1, d2)?;
    // Symmetry of Ω under swapping its two indices.
    let c_swapped = closed_form(d2, d1)?;
    if c != c_swapped {
        return Err(QdrError::ConstantRecursionInconsistent(format!(
            "constant of Ω_{{{d1};{d2}}} differs from Ω_{{{d2};{d1}}}: {c} vs {c_swapped}"
        )));
    }
    // The recursion instances with a zero second index are not consumed by
    // the closed form; they are the redundant equations of the
    // overdetermined system: D(r, 0) = C(r−1, 0).
    for r in 1..=(d1.max(d2) + 1) {
        let lhs = derivative_two_point(r, 0, cohft.clone(), gmax)?;
        let rhs = closed_form(r - 1, 0)?;
        if lhs != rhs {
            return Err(QdrError::ConstantRecursionInconsistent(format!(
                "redundant constant equation fails at r={r}: {lhs} vs {rhs}"
            )));
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdr::theory::TrivialCohFt;

    fn trivial() -> Arc<dyn CohFt + Send + Sync> {
        Arc::new(TrivialCohFt)
    }

    #[test]
    fn derivative_two_point_base_case_is_the_pairing() {
        // D(0,0) = η = 1 at the classical slice, nothing above.
        let d = derivative_two_point(0, 0, trivial(), 2).unwrap();
        assert_eq!(d.coefficient(0, 0, 0).unwrap(), ExactScalar::one());
        for (h, e) in [(1u32, 0u32), (0, 1), (2, 0), (1, 1), (0, 2)] {
            assert!(
                d.coefficient(h, e, 0).unwrap().is_zero(),
                "D(0,0) has an unexpected ℏ^{h}ε^{} term",
                2 * e
            );
        }
    }

    #[test]
    fn omega_with_unit_second_index_is_the_shifted_hamiltonian() {
        // Ω_{d,1;0,1} = H_{d−1,1} coefficientwise, constants included.
        let theory = trivial();
        for d in [1i64, 2] {
            let omega = two_point(d, 0, theory.clone(), 2).unwrap();
            let h = hamiltonian_density(d - 1, 1, theory.clone(), 2);
            for b in [vec![3i64], vec![1, 2], vec![2, -2], vec![1, 1, -2]] {
                let lhs = omega.coeff(&b).unwrap();
                let rhs = h.coeff(&b).unwrap().cap_order(lhs.order());
                assert_eq!(lhs, rhs, "Ω_{{{d};0}} ≠ H_{{{}}} at {b:?}", d - 1);
            }
            let c = omega.constant().clone();
            let hc = h.coeff(&[]).unwrap().cap_order(c.order());
            assert_eq!(c, hc, "constant of Ω_{{{d};0}} ≠ constant of H_{{{}}}", d - 1);
        }
    }

    #[test]
    fn initial_condition_of_the_two_point_function() {
        // ∂Ω_{0;0}/∂p₀¹ at the origin is η: the arity-1 coefficient at
        // index 0, classical slice.
        let omega = two_point(0, 0, trivial(), 2).unwrap();
        let v = omega.coeff(&[0]).unwrap();
        assert_eq!(v.coefficient(0, 0, 0).unwrap(), ExactScalar::one());
        // And it agrees with the direct double-DR formula on every slice.
        let direct = derivative_two_point(0, 0, trivial(), 2).unwrap();
        assert_eq!(v.cap_order(direct.order()), direct);
    }
}
