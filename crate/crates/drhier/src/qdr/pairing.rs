//! DR–ψ–λ pairings over arbitrary balanced integer profiles, and the
//! truncated-series vertex factor that packages a full μ-graded CohFT
//! insertion with its (ℏ, ε²) bookkeeping.
//!
//! [`dr_pairing`] generalizes the fixed-shape integral of the cycle layer:
//! the ψ-class may sit at any marked point and the profile is arbitrary.
//! Off-dimension requests return zero (they arise as vanishing slices of
//! graded sums, not as caller bugs).  Values are memoized in the shared
//! persistent table under a relabeling-canonical key.

use super::series::Trunc;
use super::QdrError;
use crate::drcalc::{dr_cycle_numeric, CohFt};
use crate::exactalg::{ExactScalar, Rational};
use crate::intnum::{dr_insert, dr_lookup};
use num::Zero;

/// `∫_{DR_g(w)} ψ_{psi_idx}^d · ∏ λ_{lams[j]}`, zero when the grading is
/// off-dimension or a λ-index exceeds the genus.
pub fn dr_pairing(
    g: u32,
    weights: &[i64],
    psi_idx: usize,
    d: u32,
    lams: &[u32],
) -> Result<Rational, QdrError> {
    let n = weights.len();
    assert!(psi_idx < n, "ψ-point index out of range");
    assert_eq!(weights.iter().sum::<i64>(), 0, "ramification profile must balance");
    assert!(
        2 * g as i64 - 2 + n as i64 > 0,
        "unstable pairing requested: genus {g} with {n} points"
    );
    let lam_sum: u32 = lams.iter().sum();
    if lams.iter().any(|&j| j > g) {
        return Ok(Rational::zero());
    }
    // c(E)c(E∨) = 1 forces λ_g² = 0 in genus g ≥ 1; skip the class build.
    if g >= 1 && lams.iter().filter(|&&j| j == g).count() >= 2 {
        return Ok(Rational::zero());
    }
    if (g + d + lam_sum) as i64 != 3 * g as i64 - 3 + n as i64 {
        return Ok(Rational::zero());
    }

    // Canonical form under relabeling: the ψ-point first, the rest sorted.
    let mut canon = Vec::with_capacity(n);
    canon.push(weights[psi_idx]);
    let mut rest: Vec<i64> =
        weights.iter().enumerate().filter(|&(i, _)| i != psi_idx).map(|(_, &w)| w).collect();
    rest.sort_unstable();
    canon.extend(rest);

    let mut lam_tag: Vec<u32> = lams.iter().copied().filter(|&j| j > 0).collect();
    lam_tag.sort_unstable();
    let tag: Vec<String> = lam_tag.iter().map(|x| x.to_string()).collect();
    let key = (g, canon.clone(), format!("qdr:psi^{d}*lam[{}]", tag.join(",")));
    if let Some(v) = dr_lookup(&key) {
        return Ok(v);
    }

    let cycle = dr_cycle_numeric(g, &canon)?;
    let poly = cycle.class().mul_psi(0, d).integrate_with_lambdas(&lam_tag).map_err(
        crate::drcalc::DrCalcError::from,
    )?;
    let scalar = poly.as_scalar().expect("numeric pairing is a constant");
    assert!(scalar.im().is_zero(), "DR pairing must be rational");
    let value = scalar.re().clone();
    dr_insert(key, value.clone());
    Ok(value)
}

/// The truncated-series factor of a single moduli integral carrying the
/// full CohFT: for each `(l, k)` admissible on dimension grounds,
/// `𝗂^{g−l}(−1)^l·∫_{DR_g(w)} ψ_{psi_idx}^d λ_l c_{k}` is placed at the
/// grading key `ℏ^{g−l} ε^{2l} μ^k` — exactly the coefficient produced by
/// the prefactor `(𝗂ℏ)^g (−ε²/𝗂ℏ)^l μ^k`.  `order` is the exactness order
/// stamped on the result (the caller's genus budget).
pub fn vertex_factor(
    g: u32,
    weights: &[i64],
    psi_idx: usize,
    d: u32,
    cohft: &dyn CohFt,
    order: u32,
) -> Result<Trunc, QdrError> {
    let n = weights.len();
    let dim = 3 * g as i64 - 3 + n as i64;
    let rem = dim - (g + d) as i64;
    let mut out = Trunc::zero().cap_order(order);
    if rem < 0 {
        return Ok(out);
    }
    for l in 0..=g.min(rem as u32) {
        let deg_k = rem as u32 - l;
        for k in 0..=(2 * g + 2) {
            if cohft.class_degree(g, n, k) != Some(deg_k) {
                continue;
            }
            let (scale, mut lams) = cohft.mu_part(k).expect("nonzero class has a μ-part");
            if l > 0 {
                lams.push(l);
            }
            let bare = dr_pairing(g, weights, psi_idx, d, &lams)?;
            if bare.is_zero() {
                continue;
            }
            let phase = ExactScalar::i_pow(g as i64 - l as i64);
            let sign = if l % 2 == 0 { 1 } else { -1 };
            let coeff = &(&phase * &ExactScalar::from_int(sign))
                * &ExactScalar::from_rational(scale * bare);
            out.insert(g - l, l, k, coeff);
        }
    }
    Ok(out)
}
