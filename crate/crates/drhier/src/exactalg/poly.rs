//! Sparse multivariate polynomials over ℚ(𝗂) with a fixed, shared variable
//! universe per polynomial. Zero coefficients are never stored, and the
//! `BTreeMap` term order makes every traversal canonical.

use super::scalar::ExactScalar;
use super::ExactAlgError;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::Arc;

/// An ordered list of variable names shared by a family of polynomials.
/// Cloning is cheap; equality is by name list.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VarSet(Arc<Vec<String>>);

impl VarSet {
    pub fn new<S: Into<String>>(names: Vec<S>) -> Self {
        VarSet(Arc::new(names.into_iter().map(Into::into).collect()))
    }

    /// Variables `a1..an` (1-based suffixes), commonly the leaf weights.
    pub fn leaf_weights(n: usize) -> Self {
        VarSet::new((1..=n).map(|i| format!("a{i}")).collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.0[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }
}

/// A multivariate polynomial: finite map from exponent tuples to nonzero
/// Gaussian-rational coefficients. All arithmetic requires both operands to
/// share the same [`VarSet`].
#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    vars: VarSet,
    terms: BTreeMap<Vec<u32>, ExactScalar>,
}

impl MultiPoly {
    pub fn zero(vars: &VarSet) -> Self {
        MultiPoly { vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn scalar(vars: &VarSet, c: ExactScalar) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; vars.len()], c);
        }
        p
    }

    pub fn one(vars: &VarSet) -> Self {
        Self::scalar(vars, ExactScalar::one())
    }

    pub fn from_int(vars: &VarSet, n: i64) -> Self {
        Self::scalar(vars, ExactScalar::from_int(n))
    }

    /// The variable `x_idx` as a polynomial.
    pub fn var(vars: &VarSet, idx: usize) -> Self {
        assert!(idx < vars.len(), "variable index out of range");
        let mut exps = vec![0; vars.len()];
        exps[idx] = 1;
        let mut p = Self::zero(vars);
        p.terms.insert(exps, ExactScalar::one());
        p
    }

    /// A monomial `c · ∏ x_i^{e_i}`.
    pub fn monomial(vars: &VarSet, exps: Vec<u32>, c: ExactScalar) -> Self {
        assert_eq!(exps.len(), vars.len());
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    /// A linear form `Σ cᵢ·x_{idxᵢ}` from (index, coefficient) pairs.
    pub fn linear_form(vars: &VarSet, parts: &[(usize, i64)]) -> Self {
        let mut p = Self::zero(vars);
        for &(idx, c) in parts {
            p += &(Self::var(vars, idx) * Self::from_int(vars, c));
        }
        p
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &ExactScalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree, or 0 for the zero polynomial.
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, idx: usize) -> u32 {
        self.terms.keys().map(|e| e[idx]).max().unwrap_or(0)
    }

    /// Coefficient of an exact exponent tuple.
    pub fn coeff_of(&self, exps: &[u32]) -> ExactScalar {
        self.terms.get(exps).cloned().unwrap_or_else(ExactScalar::zero)
    }

    /// The (polynomial) coefficient of `x_idx^power`: all terms with exactly
    /// that exponent in `x_idx`, with the exponent zeroed out.
    pub fn coeff_in_var(&self, idx: usize, power: u32) -> MultiPoly {
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            if e[idx] == power {
                let mut e2 = e.clone();
                e2[idx] = 0;
                out.terms.insert(e2, c.clone());
            }
        }
        out
    }

    /// The constant term as a scalar.
    pub fn constant_term(&self) -> ExactScalar {
        self.coeff_of(&vec![0; self.vars.len()])
    }

    /// If the polynomial is constant, its value.
    pub fn as_scalar(&self) -> Option<ExactScalar> {
        if self.terms.keys().all(|e| e.iter().all(|&x| x == 0)) {
            Some(self.constant_term())
        } else {
            None
        }
    }

    fn insert_add(&mut self, exps: Vec<u32>, c: ExactScalar) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = &*o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &ExactScalar) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(&self.vars);
        }
        let mut out = Self::zero(&self.vars);
        for (e, v) in &self.terms {
            out.terms.insert(e.clone(), v * c);
        }
        out
    }

    pub fn pow(&self, n: u32) -> MultiPoly {
        let mut acc = Self::one(&self.vars);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Substitute the polynomial `value` for variable `idx`. `value` must
    /// share the variable set (it may of course use the variable itself).
    pub fn substitute(&self, idx: usize, value: &MultiPoly) -> MultiPoly {
        assert_eq!(self.vars, value.vars, "variable sets differ");
        // Horner-style by descending power of x_idx.
        let maxdeg = self.degree_in(idx);
        let mut acc = Self::zero(&self.vars);
        for power in (0..=maxdeg).rev() {
            acc = &acc * value;
            acc += &self.coeff_in_var(idx, power);
        }
        acc
    }

    /// Full evaluation at scalar values (one per variable).
    pub fn eval(&self, point: &[ExactScalar]) -> ExactScalar {
        assert_eq!(point.len(), self.vars.len());
        let mut total = ExactScalar::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (i, &exp) in e.iter().enumerate() {
                if exp > 0 {
                    term = &term * &point[i].pow(exp);
                }
            }
            total += &term;
        }
        total
    }

    /// Evaluation at integer values.
    pub fn eval_ints(&self, point: &[i64]) -> ExactScalar {
        let scalars: Vec<ExactScalar> = point.iter().map(|&x| ExactScalar::from_int(x)).collect();
        self.eval(&scalars)
    }

    /// Map each variable `x_i ↦ s_i·x_i` with integer signs/scales.
    pub fn scale_vars(&self, scales: &[i64]) -> MultiPoly {
        assert_eq!(scales.len(), self.vars.len());
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            let mut factor = ExactScalar::one();
            for (i, &exp) in e.iter().enumerate() {
                factor = &factor * &ExactScalar::from_int(scales[i]).pow(exp);
            }
            out.insert_add(e.clone(), &factor * c);
        }
        out
    }

    /// Exact division by a linear form (a degree-≤1 polynomial with at least
    /// one degree-1 term). Returns the quotient; a nonzero remainder is the
    /// error [`ExactAlgError::DivisionNotExact`] — a divisibility-theorem
    /// violation at call sites that test one.
    pub fn exact_div_linear(&self, divisor: &MultiPoly) -> Result<MultiPoly, ExactAlgError> {
        assert_eq!(self.vars, divisor.vars, "variable sets differ");
        if divisor.is_zero() {
            return Err(ExactAlgError::InvalidDivisor("zero divisor".into()));
        }
        if divisor.total_degree() != 1 {
            return Err(ExactAlgError::InvalidDivisor(format!(
                "divisor has total degree {}, want 1",
                divisor.total_degree()
            )));
        }
        // Pivot: the highest-index variable with a degree-1 coefficient.
        let mut pivot: Option<(usize, ExactScalar)> = None;
        for (e, c) in &divisor.terms {
            if e.iter().sum::<u32>() == 1 {
                let idx = e.iter().position(|&x| x == 1).unwrap();
                if pivot.as_ref().map_or(true, |(p, _)| idx > *p) {
                    pivot = Some((idx, c.clone()));
                }
            }
        }
        let (pidx, pcoeff) = pivot.expect("degree-1 divisor has a linear term");
        let rest = {
            // divisor minus its pivot term
            let mut exps = vec![0; self.vars.len()];
            exps[pidx] = 1;
            divisor - &Self::monomial(&self.vars, exps, pcoeff.clone())
        };
        let mut remainder = self.clone();
        let mut quotient = Self::zero(&self.vars);
        // Repeatedly clear the term with the highest pivot-exponent (ties by
        // exponent tuple order); each step strictly reduces that population.
        loop {
            let lead = remainder
                .terms
                .iter()
                .filter(|(e, _)| e[pidx] > 0)
                .max_by(|(e1, _), (e2, _)| e1[pidx].cmp(&e2[pidx]).then_with(|| e1.cmp(e2)))
                .map(|(e, c)| (e.clone(), c.clone()));
            let Some((e, c)) = lead else { break };
            let mut qe = e.clone();
            qe[pidx] -= 1;
            let qc = &c / &pcoeff;
            // remainder -= (qc·x^qe)·divisor
            remainder.insert_add(e, -c);
            let tail = Self::monomial(&self.vars, qe.clone(), qc.clone()) * rest.clone();
            remainder = &remainder - &tail;
            quotient.insert_add(qe, qc);
        }
        if remainder.is_zero() {
            Ok(quotient)
        } else {
            Err(ExactAlgError::DivisionNotExact(format!(
                "remainder {remainder} after division by {divisor}"
            )))
        }
    }

    /// True iff every monomial has even total degree in the given variables
    /// (i.e. the polynomial is invariant under negating them all at once).
    pub fn is_even_in(&self, var_indices: &[usize]) -> bool {
        self.terms
            .keys()
            .all(|e| var_indices.iter().map(|&i| e[i]).sum::<u32>() % 2 == 0)
    }
}

impl Add<&MultiPoly> for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.vars, rhs.vars, "variable sets differ");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_add(e.clone(), c.clone());
        }
        out
    }
}

impl Add for MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: MultiPoly) -> MultiPoly {
        &self + &rhs
    }
}

impl AddAssign<&MultiPoly> for MultiPoly {
    fn add_assign(&mut self, rhs: &MultiPoly) {
        assert_eq!(self.vars, rhs.vars, "variable sets differ");
        for (e, c) in &rhs.terms {
            self.insert_add(e.clone(), c.clone());
        }
    }
}

impl Sub<&MultiPoly> for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.vars, rhs.vars, "variable sets differ");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_add(e.clone(), -c);
        }
        out
    }
}

impl Sub for MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: MultiPoly) -> MultiPoly {
        &self - &rhs
    }
}

impl Mul<&MultiPoly> for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.vars, rhs.vars, "variable sets differ");
        let mut out = MultiPoly::zero(&self.vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.insert_add(e, c1 * c2);
            }
        }
        out
    }
}

impl Mul for MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: MultiPoly) -> MultiPoly {
        &self * &rhs
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.vars);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), -c);
        }
        out
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (i, &exp) in e.iter().enumerate() {
                if exp == 1 {
                    write!(f, "*{}", self.vars.name(i))?;
                } else if exp > 1 {
                    write!(f, "*{}^{}", self.vars.name(i), exp)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> VarSet {
        VarSet::new(vec!["a1", "a2"])
    }

    #[test]
    fn ring_identity() {
        let vs = ab();
        let a1 = MultiPoly::var(&vs, 0);
        let a2 = MultiPoly::var(&vs, 1);
        let prod = (&a1 + &a2) * (&a1 - &a2);
        let direct = &(&a1 * &a1) - &(&a2 * &a2);
        assert_eq!(prod, direct);
    }

    #[test]
    fn linear_division_exact() {
        let vs = ab();
        let a1 = MultiPoly::var(&vs, 0);
        let a2 = MultiPoly::var(&vs, 1);
        // a1²a2 + a1a2² = (a1+a2)·a1a2
        let p = &(&(&a1 * &a1) * &a2) + &(&a1 * &(&a2 * &a2));
        let q = p.exact_div_linear(&(&a1 + &a2)).unwrap();
        assert_eq!(q, &a1 * &a2);
    }

    #[test]
    fn linear_division_unit_remainder() {
        let vs = ab();
        let a1 = MultiPoly::var(&vs, 0);
        let p = &(&a1 * &a1) + &MultiPoly::one(&vs);
        assert!(matches!(
            p.exact_div_linear(&a1),
            Err(ExactAlgError::DivisionNotExact(_))
        ));
    }

    #[test]
    fn substitute_commutes_with_eval() {
        let vs = ab();
        let a1 = MultiPoly::var(&vs, 0);
        let a2 = MultiPoly::var(&vs, 1);
        let p = &(&a1 * &a1) + &(&a1 * &a2);
        // substitute a1 := a2 + 1, then evaluate at a2 = 3  ==  evaluate at a1 = 4, a2 = 3
        let one = MultiPoly::one(&vs);
        let sub = p.substitute(0, &(&a2 + &one));
        assert_eq!(sub.eval_ints(&[99, 3]), p.eval_ints(&[4, 3]));
    }
}
