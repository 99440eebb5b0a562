//! Shipped cohomological field theories and the degree condition gating
//! which statements the verification suites may claim for a theory.

use crate::drcalc::CohFt;
use crate::exactalg::Rational;
use num::{BigInt, One, Zero};

/// The trivial rank-one theory: `c ≡ 1`, η₁₁ = 1, no μ-dependence.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrivialCohFt;

impl CohFt for TrivialCohFt {
    fn dimension(&self) -> usize {
        1
    }

    fn eta(&self, i: usize, j: usize) -> Rational {
        assert!(i == 1 && j == 1, "rank-one theory has a single primary");
        Rational::one()
    }

    fn mu_part(&self, k: u32) -> Option<(Rational, Vec<u32>)> {
        (k == 0).then(|| (Rational::one(), Vec::new()))
    }

    fn class_degree(&self, _g: u32, _n: usize, k: u32) -> Option<u32> {
        (k == 0).then_some(0)
    }

    fn tag(&self) -> String {
        "trivial".into()
    }
}

/// The Hodge-class family `c^{[μ]} = Λ(μ·s) = Σ_k (s^k λ_k) μ^k` for a
/// rational parameter `s`; η₁₁ = 1.
#[derive(Debug, Clone)]
pub struct HodgeCohFt {
    s: Rational,
}

impl HodgeCohFt {
    pub fn new(s: Rational) -> Self {
        HodgeCohFt { s }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        HodgeCohFt { s: Rational::new(BigInt::from(num), BigInt::from(den)) }
    }

    pub fn scale(&self) -> &Rational {
        &self.s
    }
}

impl CohFt for HodgeCohFt {
    fn dimension(&self) -> usize {
        1
    }

    fn eta(&self, i: usize, j: usize) -> Rational {
        assert!(i == 1 && j == 1, "rank-one theory has a single primary");
        Rational::one()
    }

    fn mu_part(&self, k: u32) -> Option<(Rational, Vec<u32>)> {
        if k == 0 {
            return Some((Rational::one(), Vec::new()));
        }
        if self.s.is_zero() {
            return None;
        }
        let mut scale = Rational::one();
        for _ in 0..k {
            scale *= self.s.clone();
        }
        Some((scale, vec![k]))
    }

    fn class_degree(&self, g: u32, _n: usize, k: u32) -> Option<u32> {
        // λ_k vanishes above the genus; μ⁰ is the fundamental class.
        if k == 0 {
            Some(0)
        } else if k <= g && !self.s.is_zero() {
            Some(k)
        } else {
            None
        }
    }

    fn tag(&self) -> String {
        format!("hodge[s={}/{}]", self.s.numer(), self.s.denom())
    }
}

/// One row of the degree-condition report: whether `deg c_{g,n;k} < g−1+n`.
#[derive(Debug, Clone)]
pub struct DegreeCase {
    pub g: u32,
    pub n: usize,
    pub k: u32,
    pub degree: u32,
    pub bound: u32,
    pub holds: bool,
}

/// Tabulate the degree condition `deg c_{g,n;k} < g−1+n` over every stable
/// `(g,n)` with `g ≤ gmax`, `n ≤ nmax`, and every μ-exponent with a nonzero
/// coefficient there.  The condition gates which theorems the verification
/// suites claim for the theory.
pub fn degree_condition(cohft: &dyn CohFt, gmax: u32, nmax: usize) -> Vec<DegreeCase> {
    let mut rows = Vec::new();
    for g in 0..=gmax {
        for n in 0..=nmax {
            if 2 * (g as i64) - 2 + (n as i64) <= 0 {
                continue;
            }
            for k in 0..=(2 * gmax + 2) {
                let Some(degree) = cohft.class_degree(g, n, k) else {
                    continue;
                };
                let bound = g + n as u32 - 1;
                rows.push(DegreeCase { g, n, k, degree, bound, holds: degree < bound });
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_theory_satisfies_the_degree_condition_everywhere() {
        let rows = degree_condition(&TrivialCohFt, 2, 5);
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r.holds), "degree 0 < g−1+n at every stable (g,n)");
    }

    #[test]
    fn hodge_theory_fails_the_degree_condition_exactly_at_top_lambda_one_point() {
        let rows = degree_condition(&HodgeCohFt::from_ratio(1, 1), 2, 3);
        let find = |g: u32, n: usize, k: u32| {
            rows.iter().find(|r| r.g == g && r.n == n && r.k == k).expect("row present")
        };
        // (1,1), k=1: degree 1 is not < g−1+n = 1.
        assert!(!find(1, 1, 1).holds);
        // (1,2), k=1: degree 1 < 2.
        assert!(find(1, 2, 1).holds);
        // (2,1), k=2: degree 2 is not < 2.
        assert!(!find(2, 1, 2).holds);
    }

    #[test]
    fn hodge_mu_parts_scale_geometrically() {
        let h = HodgeCohFt::from_ratio(3, 2);
        let (s2, parts) = h.mu_part(2).unwrap();
        assert_eq!(parts, vec![2]);
        assert_eq!(s2, Rational::new(BigInt::from(9), BigInt::from(4)));
        assert!(h.class_degree(1, 1, 2).is_none(), "λ₂ vanishes in genus 1");
    }
}
