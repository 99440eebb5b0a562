//! Truncated coefficient ring for hierarchy computations: exact Gaussian
//! rationals graded by (ℏ, ε², μ) exponents, together with an explicit
//! exactness order.
//!
//! A [`Trunc`] asserts that every term of combined weight `h + e ≤ order`
//! (where `h` is the ℏ-exponent and `e` the ε²-exponent; μ does not weigh)
//! is exactly represented, and says nothing about heavier terms.  Sums take
//! the weaker of the two orders; products exploit that a factor with
//! minimum weight β shifts everything it multiplies up by β, so the product
//! of `(order o₁, min weight β₁)` and `(o₂, β₂)` is exact through
//! `min(o₁+β₂, o₂+β₁)`.  Requesting a coefficient beyond the order is a
//! loud [`QdrError::TruncationExceeded`], never a silent zero.

use super::QdrError;
use crate::exactalg::ExactScalar;
use std::collections::BTreeMap;
use std::fmt;

/// Grading key: (ℏ exponent, ε² exponent, μ exponent).
pub type TruncKey = (u32, u32, u32);

/// A truncated exact series in ℏ, ε², μ over ℚ(𝗂).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trunc {
    terms: BTreeMap<TruncKey, ExactScalar>,
    order: u32,
}

impl Trunc {
    /// The zero series, exact at every order.
    pub fn zero() -> Self {
        Trunc { terms: BTreeMap::new(), order: u32::MAX }
    }

    /// A single term, exact through `order`.
    pub fn term(h: u32, e: u32, k: u32, c: ExactScalar, order: u32) -> Self {
        let mut t = Trunc { terms: BTreeMap::new(), order };
        t.insert(h, e, k, c);
        t
    }

    /// A weight-zero constant, exact at every order.
    pub fn constant(c: ExactScalar) -> Self {
        Trunc::term(0, 0, 0, c, u32::MAX)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest combined weight `h+e` among nonzero terms.
    pub fn min_weight(&self) -> Option<u32> {
        self.terms.keys().map(|&(h, e, _)| h + e).min()
    }

    /// Add a term in place (dropped when beyond the order).
    pub fn insert(&mut self, h: u32, e: u32, k: u32, c: ExactScalar) {
        if c.is_zero() || h.saturating_add(e) > self.order {
            return;
        }
        let entry = self.terms.entry((h, e, k)).or_insert_with(ExactScalar::zero);
        *entry = &*entry + &c;
        if entry.is_zero() {
            self.terms.remove(&(h, e, k));
        }
    }

    /// Forget exactness above `order`.
    pub fn cap_order(mut self, order: u32) -> Self {
        if order < self.order {
            self.order = order;
            self.terms.retain(|&(h, e, _), _| h + e <= order);
        }
        self
    }

    pub fn add(&self, rhs: &Trunc) -> Trunc {
        let order = self.order.min(rhs.order);
        let mut out = Trunc { terms: BTreeMap::new(), order };
        for (&(h, e, k), c) in self.terms.iter().chain(rhs.terms.iter()) {
            out.insert(h, e, k, c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Trunc) -> Trunc {
        self.add(&rhs.scale(&ExactScalar::from_int(-1)))
    }

    pub fn mul(&self, rhs: &Trunc) -> Trunc {
        if self.terms.is_empty() || rhs.terms.is_empty() {
            return Trunc::zero();
        }
        let beta_l = self.min_weight().expect("nonempty");
        let beta_r = rhs.min_weight().expect("nonempty");
        let order =
            (self.order.saturating_add(beta_r)).min(rhs.order.saturating_add(beta_l));
        let mut out = Trunc { terms: BTreeMap::new(), order };
        for (&(h1, e1, k1), c1) in &self.terms {
            for (&(h2, e2, k2), c2) in &rhs.terms {
                out.insert(h1 + h2, e1 + e2, k1 + k2, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &ExactScalar) -> Trunc {
        if c.is_zero() {
            return Trunc::zero();
        }
        let terms = self.terms.iter().map(|(k, v)| (*k, v * c)).collect();
        Trunc { terms, order: self.order }
    }

    /// Multiply by `(𝗂ℏ)^j`: shifts ℏ-exponents and the order up by `j`.
    pub fn mul_i_hbar_pow(&self, j: u32) -> Trunc {
        let phase = ExactScalar::i_pow(j as i64);
        let terms = self
            .terms
            .iter()
            .map(|(&(h, e, k), v)| ((h + j, e, k), v * &phase))
            .collect();
        Trunc { terms, order: self.order.saturating_add(j) }
    }

    /// Divide by `ℏ^j`.  Every term must carry at least ℏ^j; a violation is
    /// a structural bug in the caller, not a data condition.
    pub fn div_hbar_pow(&self, j: u32) -> Trunc {
        let terms = self
            .terms
            .iter()
            .map(|(&(h, e, k), v)| {
                assert!(h >= j, "term ℏ^{h}ε^{}μ^{} not divisible by ℏ^{j}", 2 * e, k);
                ((h - j, e, k), v.clone())
            })
            .collect();
        Trunc { terms, order: self.order.saturating_sub(j) }
    }

    /// The coefficient of ℏ^h ε^{2e} μ^k, or an error when the request is
    /// beyond the exactness order.
    pub fn coefficient(&self, h: u32, e: u32, k: u32) -> Result<ExactScalar, QdrError> {
        if h.saturating_add(e) > self.order {
            return Err(QdrError::TruncationExceeded(format!(
                "coefficient of ℏ^{h}ε^{}μ^{k} requested from a series exact only \
                 through combined order {}",
                2 * e,
                self.order
            )));
        }
        Ok(self.terms.get(&(h, e, k)).cloned().unwrap_or_else(ExactScalar::zero))
    }

    /// Iterate over stored terms as `((h, e, k), coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (&TruncKey, &ExactScalar)> {
        self.terms.iter()
    }
}

impl fmt::Display for Trunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        } else {
            for (i, (&(h, e, k), c)) in self.terms.iter().enumerate() {
                if i > 0 {
                    write!(f, " + ")?;
                }
                write!(f, "({})", c.to_fraction_string())?;
                if h > 0 {
                    write!(f, "·ℏ^{h}")?;
                }
                if e > 0 {
                    write!(f, "·ε^{}", 2 * e)?;
                }
                if k > 0 {
                    write!(f, "·μ^{k}")?;
                }
            }
        }
        if self.order != u32::MAX {
            write!(f, " [order {}]", self.order)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64) -> ExactScalar {
        ExactScalar::from_int(n)
    }

    #[test]
    fn product_orders_track_minimum_weights() {
        // f = 1 + ℏ (exact to order 1), g = ℏ·x (exact to order 3).
        let f = Trunc::term(0, 0, 0, s(1), 1).add(&Trunc::term(1, 0, 0, s(1), 1));
        let g = Trunc::term(1, 0, 0, s(5), 3);
        let p = f.mul(&g);
        // β_g = 1 lifts f's order 1 to 2; g's order 3 + β_f = 0 gives 3.
        assert_eq!(p.order(), 2);
        assert_eq!(p.coefficient(1, 0, 0).unwrap(), s(5));
        assert_eq!(p.coefficient(2, 0, 0).unwrap(), s(5));
        assert!(matches!(
            p.coefficient(3, 0, 0),
            Err(QdrError::TruncationExceeded(_))
        ));
    }

    #[test]
    fn i_hbar_multiplication_shifts_weight_and_phase() {
        let f = Trunc::term(0, 1, 0, s(3), 2);
        let g = f.mul_i_hbar_pow(2);
        assert_eq!(g.order(), 4);
        assert_eq!(g.coefficient(2, 1, 0).unwrap(), s(-3));
        let back = g.div_hbar_pow(2);
        assert_eq!(back.coefficient(0, 1, 0).unwrap(), s(-3));
        assert_eq!(back.order(), 2);
    }

    #[test]
    fn addition_takes_the_weaker_order_and_cancels_exactly() {
        let f = Trunc::term(1, 1, 0, s(7), 5);
        let g = f.scale(&s(-1)).cap_order(3);
        let sum = f.add(&g);
        assert!(sum.is_zero());
        assert_eq!(sum.order(), 3);
    }
}
