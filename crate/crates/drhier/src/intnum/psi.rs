//! Exact ψ- and κ-class top intersection numbers on moduli of stable curves.
//!
//! Pure ψ-integrals follow the KdV-type recursion on the first insertion,
//! seeded by the two smallest moduli spaces; κ-classes are traded for
//! ψ-classes at extra marked points by an inclusion–exclusion rule.

use std::collections::BTreeMap;
use std::sync::Mutex;

use num::{BigInt, BigRational, One, Zero};
use once_cell::sync::Lazy;

use super::IntNumError;

/// (2k+1)!! as a big integer, with the convention (−1)!! = 1.
fn odd_double_factorial(k: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut j = 1i64;
    while 2 * j - 1 <= 2 * k + 1 {
        acc *= 2 * j - 1;
        j += 1;
    }
    acc
}

fn is_stable(g: u32, n: usize) -> bool {
    2 * g as i64 - 2 + n as i64 > 0
}

fn dimension(g: u32, n: usize) -> i64 {
    3 * g as i64 - 3 + n as i64
}

fn degree_matches(g: u32, d: &[u32], extra: i64) -> bool {
    d.iter().map(|&x| x as i64).sum::<i64>() + extra == dimension(g, d.len())
}

/// ∫ ψ₁^{d₁}⋯ψₙ^{dₙ} over the moduli space of genus-g stable curves with
/// n = d.len() marked points.
pub fn psi_top_integral(g: u32, d: &[u32]) -> Result<BigRational, IntNumError> {
    if !is_stable(g, d.len()) {
        return Err(IntNumError::DimensionMismatch(format!(
            "no stable curves of genus {g} with {} marked points",
            d.len()
        )));
    }
    if !degree_matches(g, d, 0) {
        return Err(IntNumError::DimensionMismatch(format!(
            "ψ-degree {} differs from dimension {} at genus {g} with {} points",
            d.iter().map(|&x| x as i64).sum::<i64>(),
            dimension(g, d.len()),
            d.len()
        )));
    }
    Ok(psi_rec(g, d))
}

/// Same integral with zero-semantics: 0 for unstable or dimension-mismatched
/// input. Used inside recursions where off-dimension factors vanish.
pub(crate) fn psi_filtered(g: i64, d: &[u32]) -> BigRational {
    if g < 0 || !is_stable(g as u32, d.len()) || !degree_matches(g as u32, d, 0) {
        return BigRational::zero();
    }
    psi_rec(g as u32, d)
}

static PSI_MEMO: Lazy<Mutex<BTreeMap<(u32, Vec<u32>), BigRational>>> =
    Lazy::new(|| Mutex::new(BTreeMap::new()));

/// Core recursion; assumes stability and a dimension-matched exponent list.
fn psi_rec(g: u32, d: &[u32]) -> BigRational {
    let mut key: Vec<u32> = d.to_vec();
    key.sort_unstable_by(|a, b| b.cmp(a));
    if g == 0 && key == [0, 0, 0] {
        return BigRational::one();
    }
    if g == 1 && key == [1] {
        return BigRational::new(BigInt::one(), BigInt::from(24));
    }
    if let Some(v) = PSI_MEMO.lock().unwrap().get(&(g, key.clone())) {
        return v.clone();
    }

    // first insertion has a positive exponent on every non-seed input
    let k = key[0] as i64 - 1;
    debug_assert!(k >= 0, "unexpected all-zero exponents at ({g}, {key:?})");
    let rest = &key[1..];
    let mut sum = BigRational::zero();

    // transfer of the first insertion onto each remaining point
    for j in 0..rest.len() {
        let dj = rest[j] as i64;
        let coeff = BigRational::from_integer(odd_double_factorial(k + dj))
            / BigRational::from_integer(odd_double_factorial(dj - 1));
        let mut nd: Vec<u32> = Vec::with_capacity(rest.len());
        nd.push((k + dj) as u32);
        nd.extend(rest.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &x)| x));
        sum += coeff * psi_rec(g, &nd);
    }

    // splitting the first insertion into a pair on a degenerated curve
    for a in 0..=k - 1 {
        let b = k - 1 - a;
        let coeff = BigRational::from_integer(
            odd_double_factorial(a) * odd_double_factorial(b),
        );
        let mut inner = BigRational::zero();

        // non-separating degeneration
        let mut nd: Vec<u32> = vec![a as u32, b as u32];
        nd.extend_from_slice(rest);
        inner += psi_filtered(g as i64 - 1, &nd);

        // separating degenerations over genus and point distributions
        for g1 in 0..=g {
            let g2 = g - g1;
            for mask in 0u32..(1 << rest.len()) {
                let mut da = vec![a as u32];
                let mut db = vec![b as u32];
                for (i, &x) in rest.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        da.push(x);
                    } else {
                        db.push(x);
                    }
                }
                let left = psi_filtered(g1 as i64, &da);
                if left.is_zero() {
                    continue;
                }
                inner += left * psi_filtered(g2 as i64, &db);
            }
        }
        sum += coeff * inner / BigRational::from_integer(BigInt::from(2));
    }

    let result = sum / BigRational::from_integer(odd_double_factorial(k + 1));
    PSI_MEMO
        .lock()
        .unwrap()
        .insert((g, key), result.clone());
    result
}

static KAPPA_MEMO: Lazy<Mutex<BTreeMap<(u32, Vec<u32>, Vec<u32>), BigRational>>> =
    Lazy::new(|| Mutex::new(BTreeMap::new()));

/// ∫ ∏ψᵢ^{dᵢ}·∏κ_{bⱼ} with zero-semantics for unstable or off-dimension
/// input. κ₀ factors are scalars; higher κ's trade for ψ-classes at new
/// points: with m κ-indices the last one becomes ψ^{b_m+1} at a fresh point
/// while every subset S of the others merges into its exponent with an
/// alternating sign.
pub(crate) fn kappa_psi_filtered(g: i64, psi: &[u32], kappa: &[u32]) -> BigRational {
    if g < 0 || !is_stable(g as u32, psi.len()) {
        return BigRational::zero();
    }
    let g = g as u32;
    let kdeg: i64 = kappa.iter().map(|&x| x as i64).sum();
    if !degree_matches(g, psi, kdeg) {
        return BigRational::zero();
    }
    let mut kap: Vec<u32> = kappa.iter().copied().filter(|&x| x > 0).collect();
    kap.sort_unstable();
    let zeros = kappa.len() - kap.len();
    let kappa0 = BigRational::from_integer(BigInt::from(
        2 * g as i64 - 2 + psi.len() as i64,
    ))
    .pow(zeros as i32);
    if kap.is_empty() {
        return kappa0 * psi_rec(g, psi);
    }

    let mut pkey: Vec<u32> = psi.to_vec();
    pkey.sort_unstable();
    let key = (g, pkey, kap.clone());
    if let Some(v) = KAPPA_MEMO.lock().unwrap().get(&key) {
        return kappa0 * v.clone();
    }

    let bm = kap.pop().unwrap();
    let others = kap;
    let mut sum = BigRational::zero();
    for mask in 0u32..(1 << others.len()) {
        let mut merged = bm;
        let mut rest: Vec<u32> = Vec::new();
        for (i, &b) in others.iter().enumerate() {
            if mask & (1 << i) != 0 {
                merged += b;
            } else {
                rest.push(b);
            }
        }
        let mut np: Vec<u32> = psi.to_vec();
        np.push(merged + 1);
        let term = kappa_psi_filtered(g as i64, &np, &rest);
        if mask.count_ones() % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    KAPPA_MEMO.lock().unwrap().insert(key, sum.clone());
    kappa0 * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn seed_and_frozen_values() {
        assert_eq!(psi_top_integral(0, &[0, 0, 0]).unwrap(), q(1, 1));
        assert_eq!(psi_top_integral(1, &[1]).unwrap(), q(1, 24));
        assert_eq!(psi_top_integral(0, &[1, 0, 0, 0]).unwrap(), q(1, 1));
        assert_eq!(psi_top_integral(1, &[0, 2]).unwrap(), q(1, 24));
        assert_eq!(psi_top_integral(1, &[1, 1]).unwrap(), q(1, 24));
        assert_eq!(psi_top_integral(2, &[4]).unwrap(), q(1, 1152));
        assert_eq!(psi_top_integral(2, &[2, 3]).unwrap(), q(29, 5760));
    }

    #[test]
    fn genus_zero_closed_form() {
        // ∫ over (0,n) of ∏ψ^{dᵢ} = (n−3)!/∏dᵢ!
        fn fact(n: u32) -> BigInt {
            (1..=n as i64).product::<i64>().into()
        }
        fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
            if parts == 1 {
                return vec![vec![total]];
            }
            let mut out = Vec::new();
            for first in 0..=total {
                for mut tail in compositions(total - first, parts - 1) {
                    tail.insert(0, first);
                    out.push(tail);
                }
            }
            out
        }
        for n in 3..=7usize {
            for d in compositions(n as u32 - 3, n) {
                let expected = BigRational::from_integer(fact(n as u32 - 3))
                    / BigRational::from_integer(
                        d.iter().map(|&x| fact(x)).product::<BigInt>(),
                    );
                assert_eq!(psi_top_integral(0, &d).unwrap(), expected, "d = {d:?}");
            }
        }
    }

    #[test]
    fn string_and_dilaton_identities() {
        fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
            if parts == 0 {
                return if total == 0 { vec![vec![]] } else { vec![] };
            }
            let mut out = Vec::new();
            for first in 0..=total {
                for mut tail in compositions(total - first, parts - 1) {
                    tail.insert(0, first);
                    out.push(tail);
                }
            }
            out
        }
        for g in 0..=2u32 {
            for n in 1..=5usize {
                if !is_stable(g, n) {
                    continue;
                }
                let dim = dimension(g, n);
                if dim < 0 {
                    continue;
                }
                // string: ⟨τ₀ ∏τ_{dᵢ}⟩ over (g,n+1) needs Σdᵢ = dim(g,n)+1
                for d in compositions(dim as u32 + 1, n) {
                    let mut extended = vec![0u32];
                    extended.extend_from_slice(&d);
                    let mut string_sum = BigRational::zero();
                    for i in 0..n {
                        if d[i] == 0 {
                            continue;
                        }
                        let mut lowered = d.clone();
                        lowered[i] -= 1;
                        string_sum += psi_top_integral(g, &lowered).unwrap();
                    }
                    assert_eq!(
                        psi_top_integral(g, &extended).unwrap(),
                        string_sum,
                        "string fails at g={g}, d={d:?}"
                    );
                }
                // dilaton: ⟨τ₁ ∏τ_{dᵢ}⟩ over (g,n+1) needs Σdᵢ = dim(g,n)
                for d in compositions(dim as u32, n) {
                    let base = psi_top_integral(g, &d).unwrap();
                    let mut dilated = vec![1u32];
                    dilated.extend_from_slice(&d);
                    let factor = BigRational::from_integer(BigInt::from(
                        2 * g as i64 - 2 + n as i64,
                    ));
                    assert_eq!(
                        psi_top_integral(g, &dilated).unwrap(),
                        factor * base,
                        "dilaton fails at g={g}, d={d:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(
            psi_top_integral(1, &[2]),
            Err(IntNumError::DimensionMismatch(_))
        ));
        assert!(matches!(
            psi_top_integral(0, &[0, 0]),
            Err(IntNumError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn kappa_powers_on_rational_curves() {
        // ∫ κ₁^{n−3} over (0,n) for n = 4,5,6 gives 1, 5, 61
        assert_eq!(kappa_psi_filtered(0, &[0, 0, 0, 0], &[1]), q(1, 1));
        assert_eq!(kappa_psi_filtered(0, &[0, 0, 0, 0, 0], &[1, 1]), q(5, 1));
        assert_eq!(
            kappa_psi_filtered(0, &[0, 0, 0, 0, 0, 0], &[1, 1, 1]),
            q(61, 1)
        );
        // ∫ κ₁ over the one-pointed genus-1 space
        assert_eq!(kappa_psi_filtered(1, &[0], &[1]), q(1, 24));
        // κ₀ is the scalar 2g−2+n
        assert_eq!(kappa_psi_filtered(1, &[1], &[0]), q(1, 24));
        // off-dimension and unstable input vanish
        assert!(kappa_psi_filtered(0, &[0, 0, 0], &[1]).is_zero());
        assert!(kappa_psi_filtered(0, &[0, 0], &[1]).is_zero());
    }
}
