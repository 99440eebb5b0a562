//! λ-class integrals reduced to ψ/κ data through the Chern-character
//! expansion of the Hodge bundle, memoized globally.
//!
//! Odd Chern characters expand into κ-classes, ψ-classes and boundary
//! degenerations; even ones vanish, which pins every λ-monomial at genus
//! ≤ 3 to powers of λ₁ plus (genus 3 only) one ch₃ insertion.

use std::collections::BTreeMap;
use std::sync::Mutex;

use num::{BigInt, BigRational, One, Zero};
use once_cell::sync::Lazy;

use super::psi::kappa_psi_filtered;
use super::IntNumError;

fn is_stable(g: i64, n: usize) -> bool {
    g >= 0 && 2 * g - 2 + n as i64 > 0
}

fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn binom(n: u32, k: u32) -> BigRational {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from((n - i) as i64) / BigInt::from((i + 1) as i64);
    }
    BigRational::from_integer(acc)
}

/// Target of the λ-monomial normal form on a genus-g vertex.
enum NormalTerm {
    /// λ₁^e
    Lam1(u32),
    /// one ch₃ insertion (genus 3 only)
    Ch3,
}

/// Rewrite a λ-index multiset as Σ cᵢ·termᵢ using the multiplicative
/// relations of the Hodge bundle's Chern roots (even Chern characters
/// vanish). Empty result means the monomial is zero.
fn lambda_normal_form(
    g: u32,
    lambdas: &[u32],
) -> Result<Vec<(BigRational, NormalTerm)>, IntNumError> {
    let idx: Vec<u32> = lambdas.iter().copied().filter(|&k| k > 0).collect();
    if idx.iter().any(|&k| k > g) {
        return Ok(vec![]);
    }
    if idx.is_empty() {
        return Ok(vec![(BigRational::one(), NormalTerm::Lam1(0))]);
    }
    let c1 = idx.iter().filter(|&&k| k == 1).count() as u32;
    let c2 = idx.iter().filter(|&&k| k == 2).count() as u32;
    let c3 = idx.iter().filter(|&&k| k == 3).count() as u32;
    match g {
        0 => Ok(vec![]),
        1 => {
            // λ₁² = 0
            if c1 >= 2 {
                Ok(vec![])
            } else {
                Ok(vec![(BigRational::one(), NormalTerm::Lam1(1))])
            }
        }
        2 => {
            // λ₂ = λ₁²/2 and λ₁⁴ = 4λ₂² = 0
            let e = c1 + 2 * c2;
            if e >= 4 {
                Ok(vec![])
            } else {
                Ok(vec![(q(1, 2).pow(c2 as i32), NormalTerm::Lam1(e))])
            }
        }
        3 => {
            // λ₂ = λ₁²/2, λ₁λ₃ = λ₂²/2 = λ₁⁴/8, λ₃² = 0,
            // and the lone λ₃ = λ₁³/6 + 2ch₃
            if c3 >= 2 {
                return Ok(vec![]);
            }
            let e12 = c1 + 2 * c2;
            let c = q(1, 2).pow(c2 as i32);
            if c3 == 0 {
                Ok(vec![(c, NormalTerm::Lam1(e12))])
            } else if e12 >= 1 {
                Ok(vec![(c * q(1, 8), NormalTerm::Lam1(e12 + 3))])
            } else {
                Ok(vec![
                    (q(1, 6), NormalTerm::Lam1(3)),
                    (q(2, 1), NormalTerm::Ch3),
                ])
            }
        }
        _ => Err(IntNumError::GenusOutOfRange(g)),
    }
}

static HK_MEMO: Lazy<Mutex<BTreeMap<(u32, Vec<u32>, Vec<u32>, u32, bool), BigRational>>> =
    Lazy::new(|| Mutex::new(BTreeMap::new()));

/// ∫ ∏ψ^{dᵢ}·∏κ_b·λ₁^{lam1}·(ch₃ if requested) with zero-semantics for
/// unstable or off-dimension input.
fn hodge_kappa_psi(g: i64, psi: &[u32], kappa: &[u32], lam1: u32, ch3: bool) -> BigRational {
    let n = psi.len();
    if !is_stable(g, n) {
        return BigRational::zero();
    }
    let g = g as u32;
    let total: i64 = psi.iter().map(|&x| x as i64).sum::<i64>()
        + kappa.iter().map(|&x| x as i64).sum::<i64>()
        + lam1 as i64
        + if ch3 { 3 } else { 0 };
    if total != 3 * g as i64 - 3 + n as i64 {
        return BigRational::zero();
    }
    if g == 0 && (lam1 > 0 || ch3) {
        return BigRational::zero();
    }
    if lam1 == 0 && !ch3 {
        return kappa_psi_filtered(g as i64, psi, kappa);
    }

    let mut pkey: Vec<u32> = psi.to_vec();
    pkey.sort_unstable();
    let mut kkey: Vec<u32> = kappa.to_vec();
    kkey.sort_unstable();
    let key = (g, pkey, kkey, lam1, ch3);
    if let Some(v) = HK_MEMO.lock().unwrap().get(&key) {
        return v.clone();
    }

    // odd Chern character: ch_{2k−1} = B_{2k}/(2k)!·[κ_{2k−1} − Σψ^{2k−1}
    //   + (1/2)·Σ_{degenerations}Σ_{i+j=2k−2}(−ψ')^i(ψ'')^j]
    // expand ch₁ (= λ₁, consuming one power) or ch₃ (the flagged insertion)
    let (prefactor, kap_idx, psi_pow, rem, patterns): (_, u32, u32, u32, Vec<(u32, u32, i64)>) =
        if ch3 {
            (q(-1, 720), 3, 3, lam1, vec![(0, 2, 1), (1, 1, -1), (2, 0, 1)])
        } else {
            (q(1, 12), 1, 1, lam1 - 1, vec![(0, 0, 1)])
        };

    let mut sum = BigRational::zero();
    // κ-term
    let mut kap: Vec<u32> = kappa.to_vec();
    kap.push(kap_idx);
    sum += hodge_kappa_psi(g as i64, psi, &kap, rem, false);
    // −Σψ^{2k−1} at existing points
    for p in 0..n {
        let mut np: Vec<u32> = psi.to_vec();
        np[p] += psi_pow;
        sum -= hodge_kappa_psi(g as i64, &np, kappa, rem, false);
    }
    // boundary degenerations, each with a uniform 1/2:
    // one non-separating term plus ordered separating splits
    let mut boundary = BigRational::zero();
    for &(pi, pj, sign) in &patterns {
        let signed = BigRational::from_integer(BigInt::from(sign));
        if g >= 1 {
            let mut np: Vec<u32> = psi.to_vec();
            np.push(pi);
            np.push(pj);
            boundary += signed.clone() * hodge_kappa_psi(g as i64 - 1, &np, kappa, rem, false);
        }
        for g1 in 0..=g {
            let g2 = g - g1;
            for pmask in 0u32..(1 << n) {
                let mut pa: Vec<u32> = Vec::new();
                let mut pb: Vec<u32> = Vec::new();
                for (i, &x) in psi.iter().enumerate() {
                    if pmask & (1 << i) != 0 {
                        pa.push(x);
                    } else {
                        pb.push(x);
                    }
                }
                pa.push(pi);
                pb.push(pj);
                if !is_stable(g1 as i64, pa.len()) || !is_stable(g2 as i64, pb.len()) {
                    continue;
                }
                for kmask in 0u32..(1 << kappa.len()) {
                    let mut ka: Vec<u32> = Vec::new();
                    let mut kb: Vec<u32> = Vec::new();
                    for (i, &x) in kappa.iter().enumerate() {
                        if kmask & (1 << i) != 0 {
                            ka.push(x);
                        } else {
                            kb.push(x);
                        }
                    }
                    for j in 0..=rem {
                        let left = hodge_kappa_psi(g1 as i64, &pa, &ka, j, false);
                        if left.is_zero() {
                            continue;
                        }
                        let right = hodge_kappa_psi(g2 as i64, &pb, &kb, rem - j, false);
                        if right.is_zero() {
                            continue;
                        }
                        boundary += signed.clone() * binom(rem, j) * left * right;
                    }
                }
            }
        }
    }
    sum += boundary / BigRational::from_integer(BigInt::from(2));

    let result = prefactor * sum;
    HK_MEMO.lock().unwrap().insert(key, result.clone());
    result
}

/// Vertex-level integral ∫ ∏ψ^{dᵢ}·∏κ_b·∏λ_{kⱼ} with zero-semantics on
/// dimension mismatch; errors only where the λ-reduction itself is
/// unsupported (genus > 3).
pub(crate) fn vertex_integral(
    g: u32,
    psi: &[u32],
    kappa: &[u32],
    lambdas: &[u32],
) -> Result<BigRational, IntNumError> {
    if lambdas.iter().any(|&k| k > 0) && g > 3 {
        return Err(IntNumError::GenusOutOfRange(g));
    }
    let mut acc = BigRational::zero();
    for (c, term) in lambda_normal_form(g, lambdas)? {
        let v = match term {
            NormalTerm::Lam1(e) => hodge_kappa_psi(g as i64, psi, kappa, e, false),
            NormalTerm::Ch3 => hodge_kappa_psi(g as i64, psi, kappa, 0, true),
        };
        acc += c * v;
    }
    Ok(acc)
}

type HodgeKey = (u32, Vec<u32>, Vec<u32>);

static HODGE_TABLE: Lazy<Mutex<BTreeMap<HodgeKey, BigRational>>> =
    Lazy::new(|| Mutex::new(BTreeMap::new()));

/// Record a top-level Hodge integral, insisting that duplicate insertions
/// agree: a divergent recomputation is a fatal invariant violation.
pub(crate) fn table_insert(key: HodgeKey, value: BigRational) {
    let mut table = HODGE_TABLE.lock().unwrap();
    if let Some(old) = table.get(&key) {
        assert_eq!(
            *old, value,
            "divergent memoized Hodge integral for {key:?}"
        );
    } else {
        table.insert(key, value);
    }
}

pub(crate) fn table_lookup(key: &HodgeKey) -> Option<BigRational> {
    HODGE_TABLE.lock().unwrap().get(key).cloned()
}

pub(crate) fn table_snapshot() -> Vec<(HodgeKey, BigRational)> {
    HODGE_TABLE
        .lock()
        .unwrap()
        .iter()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

/// ∫ ∏ψᵢ^{dᵢ}·∏λ_{kⱼ} over the genus-g moduli space with n marked points.
pub fn hodge_psi_integral(
    g: u32,
    n: usize,
    d: &[u32],
    lambdas: &[u32],
) -> Result<BigRational, IntNumError> {
    if d.len() != n {
        return Err(IntNumError::DimensionMismatch(format!(
            "{} ψ-exponents for {n} marked points",
            d.len()
        )));
    }
    if !is_stable(g as i64, n) {
        return Err(IntNumError::DimensionMismatch(format!(
            "no stable curves of genus {g} with {n} marked points"
        )));
    }
    let total: i64 = d.iter().map(|&x| x as i64).sum::<i64>()
        + lambdas.iter().map(|&x| x as i64).sum::<i64>();
    if total != 3 * g as i64 - 3 + n as i64 {
        return Err(IntNumError::DimensionMismatch(format!(
            "integrand degree {total} differs from dimension {} at genus {g} with {n} points",
            3 * g as i64 - 3 + n as i64
        )));
    }
    let mut dk: Vec<u32> = d.to_vec();
    dk.sort_unstable();
    let mut lk: Vec<u32> = lambdas.iter().copied().filter(|&k| k > 0).collect();
    lk.sort_unstable();
    let key = (g, dk, lk);
    if let Some(v) = table_lookup(&key) {
        return Ok(v);
    }
    let value = vertex_integral(g, d, &[], lambdas)?;
    table_insert(key, value.clone());
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_hodge_values() {
        assert_eq!(hodge_psi_integral(1, 1, &[0], &[1]).unwrap(), q(1, 24));
        assert_eq!(hodge_psi_integral(1, 2, &[1, 0], &[1]).unwrap(), q(1, 24));
        assert_eq!(
            hodge_psi_integral(2, 0, &[], &[1, 1, 1]).unwrap(),
            q(1, 2880)
        );
        assert_eq!(hodge_psi_integral(2, 0, &[], &[1, 2]).unwrap(), q(1, 5760));
        assert_eq!(hodge_psi_integral(2, 1, &[2], &[2]).unwrap(), q(7, 5760));
        // rank bound: any λ-index above the genus kills the class
        assert_eq!(
            hodge_psi_integral(0, 4, &[0, 0, 0, 0], &[1]).unwrap(),
            BigRational::zero()
        );
    }

    #[test]
    fn lambda_g_multinomial_structure() {
        // ∫ψ₁^{d₁}ψ₂^{d₂}λ₂ over (2,2) = C(3,d₁)·∫ψ²λ₂ over (2,1)
        let base = hodge_psi_integral(2, 1, &[2], &[2]).unwrap();
        for d1 in 0..=3u32 {
            let got = hodge_psi_integral(2, 2, &[d1, 3 - d1], &[2]).unwrap();
            assert_eq!(got, binom(3, d1) * base.clone(), "d1 = {d1}");
        }
    }

    #[test]
    fn mumford_relation_pairings_vanish() {
        // coefficients of Λ(t)Λ(−t)−1 pair to zero with every ψ-monomial
        // genus 1, t²-coefficient: −λ₁² (off-dimension queries are errors)
        assert!(matches!(
            hodge_psi_integral(1, 1, &[0], &[1, 1]),
            Err(IntNumError::DimensionMismatch(_))
        ));
        for n in 1..=3usize {
            let dim = 3 - 3 + n as i64; // genus 1
            let deg = dim - 2;
            if deg < 0 {
                continue;
            }
            for d in exponent_lists(deg as u32, n) {
                let x = hodge_psi_integral(1, n, &d, &[1, 1]).unwrap();
                assert!(x.is_zero(), "λ₁² should vanish at (1,{n}), d={d:?}");
            }
        }
        // genus 2, t²-coefficient: 2λ₂ − λ₁²; t⁴-coefficient: λ₂²
        for n in 0..=2usize {
            let dim = 3 + n as i64;
            for d in exponent_lists((dim - 2) as u32, n) {
                let a = hodge_psi_integral(2, n, &d, &[1, 1]).unwrap();
                let b = hodge_psi_integral(2, n, &d, &[2]).unwrap();
                assert_eq!(a, q(2, 1) * b, "2λ₂ = λ₁² pairing at (2,{n}), d={d:?}");
            }
            for d in exponent_lists((dim - 4) as u32, n) {
                let x = hodge_psi_integral(2, n, &d, &[2, 2]).unwrap();
                assert!(x.is_zero(), "λ₂² should vanish at (2,{n}), d={d:?}");
            }
        }
    }

    fn exponent_lists(total: u32, parts: usize) -> Vec<Vec<u32>> {
        if parts == 0 {
            return if total == 0 { vec![vec![]] } else { vec![] };
        }
        let mut out = Vec::new();
        for first in 0..=total {
            for mut tail in exponent_lists(total - first, parts - 1) {
                tail.insert(0, first);
                out.push(tail);
            }
        }
        out
    }

    #[test]
    fn genus_cap() {
        assert_eq!(
            hodge_psi_integral(4, 1, &[9], &[1]),
            Err(IntNumError::GenusOutOfRange(4))
        );
    }

    #[test]
    fn lambda_top_multinomial_genus_three() {
        // ∫ψ₁^{2g−2}λ_g over (g,1) equals (2^{2g−1}−1)/2^{2g−1}·|B_{2g}|/(2g)!,
        // and adding points spreads the ψ-exponents multinomially; this
        // drives the ch₃ expansion end to end.
        let c3 = q(31, 967_680);
        assert_eq!(hodge_psi_integral(3, 1, &[4], &[3]).unwrap(), c3);
        for d1 in 0..=5u32 {
            let got = hodge_psi_integral(3, 2, &[d1, 5 - d1], &[3]).unwrap();
            assert_eq!(got, binom(5, d1) * c3.clone(), "d1 = {d1}");
        }
    }
}
