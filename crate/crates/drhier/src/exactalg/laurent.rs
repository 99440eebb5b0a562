//! Iterated Laurent expansions in edge symbols, with coefficients that are
//! polynomials in leaf symbols. A fixed variable precedence (the *sector*)
//! determines how inverse linear forms are expanded: the highest-precedence
//! variable in the form dominates and carries the negative exponents.

use super::bernoulli::bernoulli;
use super::poly::{MultiPoly, VarSet};
use super::scalar::ExactScalar;
use super::ExactAlgError;
use num::bigint::BigInt;
use num::rational::BigRational;
use std::collections::BTreeMap;

/// Exponent window for pruning: a term is kept only if it can still reach
/// the extraction target after multiplying by the remaining factors.
#[derive(Clone, Debug)]
struct PruneBox {
    /// Per-variable upper bounds (target plus the worst-case deficit other
    /// factors can later subtract).
    cap: Vec<i32>,
    /// Upper bound on the total degree of a surviving term.
    cap_total: i32,
}

impl PruneBox {
    fn admits(&self, exps: &[i32]) -> bool {
        exps.iter().zip(&self.cap).all(|(&x, &c)| x <= c)
            && exps.iter().sum::<i32>() <= self.cap_total
    }
}

/// A truncated Laurent series in `nvars` edge symbols; exponents may be
/// negative, coefficients are [`MultiPoly`]s in the leaf symbols.
#[derive(Clone, Debug)]
pub struct IteratedLaurent {
    nvars: usize,
    coeff_vars: VarSet,
    terms: BTreeMap<Vec<i32>, MultiPoly>,
}

impl IteratedLaurent {
    pub fn zero(nvars: usize, coeff_vars: &VarSet) -> Self {
        IteratedLaurent { nvars, coeff_vars: coeff_vars.clone(), terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize, coeff_vars: &VarSet) -> Self {
        let mut s = Self::zero(nvars, coeff_vars);
        s.insert_add(vec![0; nvars], MultiPoly::one(coeff_vars));
        s
    }

    pub fn insert_add(&mut self, exps: Vec<i32>, coeff: MultiPoly) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                let sum = &*o.get() + &coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    /// Coefficient of the given exponent tuple.
    pub fn coeff(&self, exps: &[i32]) -> MultiPoly {
        self.terms
            .get(exps)
            .cloned()
            .unwrap_or_else(|| MultiPoly::zero(&self.coeff_vars))
    }

    /// Elementwise minimum (resp. maximum) exponents over all stored terms.
    fn exponent_range(&self) -> (Vec<i32>, Vec<i32>) {
        let mut mins = vec![i32::MAX; self.nvars];
        let mut maxs = vec![i32::MIN; self.nvars];
        for e in self.terms.keys() {
            for (i, &x) in e.iter().enumerate() {
                mins[i] = mins[i].min(x);
                maxs[i] = maxs[i].max(x);
            }
        }
        if self.terms.is_empty() {
            mins = vec![0; self.nvars];
            maxs = vec![0; self.nvars];
        }
        (mins, maxs)
    }

    /// Product keeping only terms admitted by `boxed` (when given) and by the
    /// extra per-term predicate.
    fn mul_filtered<F: Fn(&[i32]) -> bool>(&self, rhs: &Self, keep: F) -> Self {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Self::zero(self.nvars, &self.coeff_vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<i32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                if keep(&e) {
                    out.insert_add(e, c1 * c2);
                }
            }
        }
        out
    }

    fn mul_boxed(&self, rhs: &Self, boxed: &PruneBox) -> Self {
        self.mul_filtered(rhs, |e| boxed.admits(e))
    }

    /// The linear form `Σ form[e]·x_e` as a series (integer coefficients).
    fn linear(nvars: usize, coeff_vars: &VarSet, form: &[i64]) -> Self {
        let mut s = Self::zero(nvars, coeff_vars);
        for (e, &c) in form.iter().enumerate() {
            if c != 0 {
                let mut exps = vec![0; nvars];
                exps[e] = 1;
                s.insert_add(exps, MultiPoly::from_int(coeff_vars, c));
            }
        }
        s
    }

    /// `exp(L·x_var)` truncated at `x_var^max_pow`, with `L` a polynomial in
    /// the leaf symbols.
    fn exp_factor(
        nvars: usize,
        coeff_vars: &VarSet,
        var: usize,
        lin: &MultiPoly,
        max_pow: usize,
    ) -> Self {
        let mut s = Self::zero(nvars, coeff_vars);
        let mut num = MultiPoly::one(coeff_vars); // L^k
        let mut fact = BigRational::from_integer(BigInt::from(1));
        for k in 0..=max_pow {
            if k > 0 {
                num = &num * lin;
                fact *= BigRational::from_integer(BigInt::from(k));
            }
            let mut exps = vec![0; nvars];
            exps[var] = k as i32;
            s.insert_add(exps, num.scale(&ExactScalar::from_rational(fact.recip())));
        }
        s
    }

    /// Sector expansion of `1/(Σ form[e]·x_e)` to `order` terms: with `d`
    /// the highest-precedence variable in the form's support,
    /// `1/X = Σ_{m≤order} (−1)^m R^m / (c_d·x_d)^{m+1}` where `R = X − c_d·x_d`.
    /// Terms outside `boxed` (before the x_d shift) are discarded as they grow.
    fn inverse_linear_factor(
        nvars: usize,
        coeff_vars: &VarSet,
        form: &[i64],
        precedence: &[usize],
        order: usize,
        boxed: &PruneBox,
    ) -> Result<Self, ExactAlgError> {
        let dom = precedence
            .iter()
            .copied()
            .find(|&v| form.get(v).copied().unwrap_or(0) != 0)
            .ok_or_else(|| ExactAlgError::InvalidDivisor("zero linear form".into()))?;
        let cd = form[dom];
        let mut rest = form.to_vec();
        rest[dom] = 0;
        let rest_series = Self::linear(nvars, coeff_vars, &rest);
        // Loosen the box along the dominant axis: R^m never contains x_dom,
        // and the final shift only lowers that exponent.
        let mut rbox = boxed.clone();
        rbox.cap[dom] = i32::MAX;
        rbox.cap_total = i32::MAX;
        let mut out = Self::zero(nvars, coeff_vars);
        let mut rpow = Self::one(nvars, coeff_vars); // R^m, pruned
        for m in 0..=order {
            if m > 0 {
                rpow = rpow.mul_filtered(&rest_series, |e| {
                    e.iter().zip(&rbox.cap).all(|(&x, &c)| x <= c)
                });
                if rpow.terms.is_empty() {
                    break;
                }
            }
            // (−1)^m / c_d^{m+1} · x_d^{−(m+1)} · R^m
            let sign = if m % 2 == 0 { 1 } else { -1 };
            let denom = ExactScalar::from_int(cd).pow(m as u32 + 1).recip();
            let c = &ExactScalar::from_int(sign) * &denom;
            for (e, p) in &rpow.terms {
                let mut exps = e.clone();
                exps[dom] -= m as i32 + 1;
                out.insert_add(exps, p.scale(&c));
            }
        }
        Ok(out)
    }

    /// The power series `(x/(eˣ−1))∘X = Σ_m B_m·X^m/m!` truncated at total
    /// degree `max_deg`, for `X = Σ form[e]·x_e`.
    fn bernoulli_series(
        nvars: usize,
        coeff_vars: &VarSet,
        form: &[i64],
        max_deg: usize,
    ) -> Self {
        let x = Self::linear(nvars, coeff_vars, form);
        let mut out = Self::zero(nvars, coeff_vars);
        let mut xpow = Self::one(nvars, coeff_vars);
        let mut fact = BigRational::from_integer(BigInt::from(1));
        for m in 0..=max_deg {
            if m > 0 {
                xpow = xpow.mul_filtered(&x, |_| true);
                fact *= BigRational::from_integer(BigInt::from(m));
            }
            let c = ExactScalar::from_rational(bernoulli(m) / fact.clone());
            for (e, p) in &xpow.terms {
                out.insert_add(e.clone(), p.scale(&c));
            }
        }
        out
    }
}

/// One factor of a spanning-tree product.
#[derive(Clone, Debug)]
pub enum SectorFactor {
    /// `e^{L·x_var}` with `L` a polynomial in the leaf symbols.
    Exp { var: usize, coeff: MultiPoly },
    /// `x_var/(e^X−1)` with `X = Σ form[e]·x_e` a signed edge combination.
    BernoulliFrac { var: usize, form: Vec<i64> },
}

/// Exact coefficient of `∏ x_e^{target[e]}` in the product of the factors,
/// expanded in the sector given by `precedence` (earlier entries dominate).
///
/// Negative exponents only occur on the dominant variable of an inverse
/// linear form, of which there is one per independent cycle. Every factor
/// has nonnegative total degree, and the totals add up to the target total,
/// so exponential powers and Bernoulli-series degrees are capped at the
/// target total; the inverse-form truncation order absorbs deficit cascades
/// between dominant variables (doubling per inverse factor). Within those
/// windows the expansion is exact.
pub fn sector_coeff(
    nvars: usize,
    coeff_vars: &VarSet,
    factors: &[SectorFactor],
    target: &[u32],
    precedence: &[usize],
) -> Result<MultiPoly, ExactAlgError> {
    assert_eq!(target.len(), nvars);
    assert_eq!(precedence.len(), nvars);
    let d_tot: usize = target.iter().map(|&t| t as usize).sum();
    let inverse_forms: Vec<&Vec<i64>> = factors
        .iter()
        .filter_map(|f| match f {
            SectorFactor::BernoulliFrac { form, .. } => Some(form),
            _ => None,
        })
        .collect();
    let n_inverse = inverse_forms.len();
    let order = (2 * d_tot + n_inverse + 2) << n_inverse.saturating_sub(1).min(4);
    // Worst-case deficit each variable can still receive from inverse factors
    // whose dominant variable it is.
    let mut neg_allow = vec![0i64; nvars];
    for form in &inverse_forms {
        let dom = precedence
            .iter()
            .copied()
            .find(|&v| form.get(v).copied().unwrap_or(0) != 0)
            .ok_or_else(|| ExactAlgError::InvalidDivisor("zero linear form".into()))?;
        neg_allow[dom] += order as i64 + 1;
    }
    let boxed = PruneBox {
        cap: target
            .iter()
            .zip(&neg_allow)
            .map(|(&t, &na)| (t as i64 + na).min(i32::MAX as i64) as i32)
            .collect(),
        cap_total: d_tot as i32,
    };
    // Expand every factor to a finite series first.
    let mut expanded: Vec<IteratedLaurent> = Vec::new();
    for f in factors {
        match f {
            SectorFactor::Exp { var, coeff } => {
                expanded.push(IteratedLaurent::exp_factor(nvars, coeff_vars, *var, coeff, d_tot));
            }
            SectorFactor::BernoulliFrac { var, form } => {
                let inv = IteratedLaurent::inverse_linear_factor(
                    nvars, coeff_vars, form, precedence, order, &boxed,
                )?;
                let bser = IteratedLaurent::bernoulli_series(nvars, coeff_vars, form, d_tot);
                let mut xf = IteratedLaurent::zero(nvars, coeff_vars);
                let mut exps = vec![0; nvars];
                exps[*var] = 1;
                xf.insert_add(exps, MultiPoly::one(coeff_vars));
                expanded.push(xf.mul_boxed(&inv, &boxed).mul_boxed(&bser, &boxed));
            }
        }
    }
    // Fold with two-sided pruning against the remaining factors' exponent
    // ranges: a partial term survives only if the target stays reachable.
    let target_i: Vec<i32> = target.iter().map(|&t| t as i32).collect();
    let mut acc = IteratedLaurent::one(nvars, coeff_vars);
    for (i, f) in expanded.iter().enumerate() {
        let mut fut_min = vec![0i64; nvars];
        let mut fut_max = vec![0i64; nvars];
        for g in &expanded[i + 1..] {
            let (mins, maxs) = g.exponent_range();
            for j in 0..nvars {
                fut_min[j] += mins[j] as i64;
                fut_max[j] += maxs[j] as i64;
            }
        }
        let fut_min_total: i64 = fut_min.iter().sum();
        let fut_max_total: i64 = fut_max.iter().sum();
        acc = acc.mul_filtered(f, |e| {
            let mut total = 0i64;
            for j in 0..nvars {
                let x = e[j] as i64;
                total += x;
                if x + fut_min[j] > target_i[j] as i64 || x + fut_max[j] < target_i[j] as i64 {
                    return false;
                }
            }
            total + fut_min_total <= d_tot as i64 && total + fut_max_total >= d_tot as i64
        });
    }
    Ok(acc.coeff(&target_i))
}
