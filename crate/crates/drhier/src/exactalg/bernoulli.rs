//! Bernoulli numbers (B₁ = −1/2 convention, generating function x/(eˣ−1))
//! and closed forms for weighted power sums over compositions.

use super::poly::MultiPoly;
use super::scalar::{ExactScalar, Rational};
use num::bigint::BigInt;
use num::{One, Zero};
use once_cell::sync::Lazy;
use std::sync::Mutex;

static BERNOULLI_CACHE: Lazy<Mutex<Vec<Rational>>> =
    Lazy::new(|| Mutex::new(vec![Rational::one()]));

/// The n-th Bernoulli number in the x/(eˣ−1) convention, so B₁ = −1/2.
pub fn bernoulli(n: usize) -> Rational {
    let mut cache = BERNOULLI_CACHE.lock().unwrap();
    while cache.len() <= n {
        let m = cache.len();
        // Σ_{j=0}^{m} C(m+1, j)·B_j = 0  ⟹  B_m = −(1/(m+1))·Σ_{j<m} C(m+1,j)·B_j
        let mut acc = Rational::zero();
        let mut binom = BigInt::one(); // C(m+1, 0)
        for (j, b) in cache.iter().enumerate() {
            acc += b * Rational::from_integer(binom.clone());
            // C(m+1, j+1) = C(m+1, j)·(m+1−j)/(j+1)
            binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        let bm = -acc / Rational::from_integer(BigInt::from(m + 1));
        cache.push(bm);
    }
    cache[n].clone()
}

/// Closed form for `Q(N) = Σ_{k₁+…+k_q=N, kᵢ≥0} k₁⋯k_q · P(k₁,…,k_q)`.
///
/// `P` is a polynomial in the variables `kvars` (other variables of its
/// [`VarSet`] pass through symbolically); the result is a polynomial in the
/// variable `nvar` of the same set, of degree `2q−1+deg P` and of matching
/// parity. Computed by brute-force evaluation at N = 0..deg and exact
/// Lagrange interpolation; the degree and parity claims are test targets,
/// not assumptions.
pub fn faulhaber_sum(p: &MultiPoly, kvars: &[usize], nvar: usize) -> MultiPoly {
    let q = kvars.len();
    assert!(q > 0, "need at least one summation variable");
    assert!(!kvars.contains(&nvar), "result variable must differ from summation variables");
    let deg_p: u32 = p
        .terms()
        .map(|(e, _)| kvars.iter().map(|&i| e[i]).sum::<u32>())
        .max()
        .unwrap_or(0);
    let degree = 2 * q as u32 - 1 + deg_p;
    let samples: Vec<(i64, MultiPoly)> = (0..=degree as i64)
        .map(|n| (n, brute_weighted_sum(p, kvars, n)))
        .collect();
    super::interp::lagrange_interpolate(&samples, nvar, p.vars())
}

/// Brute-force `Σ_{k₁+…+k_q=N} k₁⋯k_q·P(k)`; compositions with a zero part
/// contribute nothing because of the k₁⋯k_q weight, so parts run from 1.
pub fn brute_weighted_sum(p: &MultiPoly, kvars: &[usize], n: i64) -> MultiPoly {
    let vars = p.vars().clone();
    let mut total = MultiPoly::zero(&vars);
    let q = kvars.len();
    let mut parts = vec![1i64; q];
    if (q as i64) > n {
        return total; // every part must be ≥ 1
    }
    loop {
        let rem = n - parts[..q - 1].iter().sum::<i64>();
        if rem >= 1 {
            parts[q - 1] = rem;
            let mut weight: i64 = 1;
            for &k in &parts {
                weight *= k;
            }
            let mut value = p.clone();
            for (i, &kv) in kvars.iter().enumerate() {
                value = substitute_int(&value, kv, parts[i]);
            }
            total += &value.scale(&ExactScalar::from_int(weight));
        }
        // advance the first q−1 parts in mixed radix
        let mut pos = 0;
        loop {
            if q == 1 || pos == q - 1 {
                return total;
            }
            parts[pos] += 1;
            if parts[..q - 1].iter().sum::<i64>() <= n - 1 {
                break;
            }
            parts[pos] = 1;
            pos += 1;
        }
    }
}

fn substitute_int(p: &MultiPoly, var: usize, value: i64) -> MultiPoly {
    let v = MultiPoly::from_int(p.vars(), value);
    p.substitute(var, &v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::poly::VarSet;

    #[test]
    fn small_bernoulli() {
        assert_eq!(bernoulli(0), Rational::one());
        assert_eq!(bernoulli(1), Rational::new(BigInt::from(-1), BigInt::from(2)));
        assert_eq!(bernoulli(2), Rational::new(BigInt::from(1), BigInt::from(6)));
        assert_eq!(bernoulli(3), Rational::zero());
        assert_eq!(bernoulli(12), Rational::new(BigInt::from(-691), BigInt::from(2730)));
    }

    #[test]
    fn faulhaber_single_variable() {
        // Σ_{k=N} k·1 = N
        let vs = VarSet::new(vec!["k1", "N"]);
        let p = MultiPoly::one(&vs);
        let q = faulhaber_sum(&p, &[0], 1);
        assert_eq!(q, MultiPoly::var(&vs, 1));
    }

    #[test]
    fn faulhaber_weighted_square() {
        // Σ_{k=N} k·k² = N³
        let vs = VarSet::new(vec!["k1", "N"]);
        let k = MultiPoly::var(&vs, 0);
        let q = faulhaber_sum(&(&(&k * &k) * &MultiPoly::one(&vs)), &[0], 1);
        let n = MultiPoly::var(&vs, 1);
        assert_eq!(q, &(&n * &n) * &n);
    }

    #[test]
    fn faulhaber_two_variables() {
        // Σ_{k1+k2=N} k1k2 = N³/6 − N/6
        let vs = VarSet::new(vec!["k1", "k2", "N"]);
        let p = MultiPoly::one(&vs);
        let q = faulhaber_sum(&p, &[0, 1], 2);
        let n = MultiPoly::var(&vs, 2);
        let sixth = ExactScalar::from_ratio(1, 6);
        let expect = &(&(&n * &n) * &n).scale(&sixth) - &n.scale(&sixth);
        assert_eq!(q, expect);
        // parity: odd degree ⟹ Q(−N) = −Q(N); spot check via evaluation
        for t in 0..=8 {
            let plus = q.eval_ints(&[0, 0, t]);
            let brute = brute_weighted_sum(&p, &[0, 1], t).constant_term();
            assert_eq!(plus, brute);
        }
    }
}
