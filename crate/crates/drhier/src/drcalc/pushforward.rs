//! Forgetful pushforwards of symbolic ramification cycles and their
//! weight-divisibility.
//!
//! With free symbols a₁,…,aₙ and b, the cycle for the profile
//! (a₁,…,aₙ, −Σa−b, b) is pushed forward along the map forgetting the
//! b-weighted point.  Setting b = 0 makes that point forgettable, so
//! the pushforward vanishes at b = 0; the sharper statement checked
//! here is that every coefficient of the pushed-forward family is
//! divisible by b².  The check pairs the pushforward against a basis of
//! complementary-degree monomial classes and inspects the b-expansion
//! of each exact pairing polynomial.

use super::cycle::{dr_cycle, weak_compositions, DRPolyClass, MAX_GENUS};
use super::DrCalcError;
use crate::exactalg::{MultiPoly, VarSet};
use crate::intnum::BoundarySpec;

/// What `dr_pushforward_forget` verified, for reporting.
#[derive(Debug, Clone)]
pub struct PushforwardReport {
    /// Genus of the cycle that was pushed forward.
    pub genus: u32,
    /// Number of free weight symbols besides `b`.
    pub symbols: usize,
    /// How many complementary pairings were expanded and checked.
    pub pairings: usize,
    /// Largest weight-degree among the pushed-forward coefficients.
    pub coefficient_degree: u32,
}

/// Push `DR_g(a₁,…,aₙ, −Σa−b, b)` forward along forgetting the final
/// point and certify that every complementary pairing, as a polynomial
/// in (a, b), lies in the ideal (b²).
///
/// Returns the pushed-forward family (a degree-(g−1) class on the
/// (n+1)-pointed moduli) together with the check report.  A violation
/// of the divisibility is an error, never a silent report entry.
pub fn dr_pushforward_forget(
    g: u32,
    n: usize,
) -> Result<(DRPolyClass, PushforwardReport), DrCalcError> {
    if g > MAX_GENUS {
        return Err(DrCalcError::GenusOutOfRange(g, MAX_GENUS));
    }
    assert!((1..=3).contains(&n), "between one and three free symbols");
    assert!(g >= 1 || n >= 2, "the forgetful target must be a moduli space");

    let mut names: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    names.push("b".into());
    let vars = VarSet::new(names);
    let b_idx = n;

    let mut weights: Vec<MultiPoly> = (0..n).map(|i| MultiPoly::var(&vars, i)).collect();
    let everything: Vec<(usize, i64)> = (0..=n).map(|i| (i, -1)).collect();
    weights.push(MultiPoly::linear_form(&vars, &everything)); // −Σa − b
    weights.push(MultiPoly::var(&vars, b_idx));

    let dr = dr_cycle(g, &vars, &weights)?;
    let pushed = dr.class().pushforward_forget(n + 1)?;
    let coefficient_degree =
        pushed.terms().iter().map(|(_, c)| c.total_degree()).max().unwrap_or(0);

    // Complementary degree for pairings on the (n+1)-pointed target.
    let comp = (3 * g as i64 - 3 + n as i64 + 1) - (g as i64 - 1);
    let mut probes: Vec<(String, MultiPoly)> = Vec::new();
    if pushed.terms().is_empty() {
        // Genus 0: the pushforward is the zero class and there is
        // nothing of complementary degree to pair with.
        debug_assert_eq!(g, 0);
    } else {
        let comp = u32::try_from(comp).expect("complementary degree is nonnegative");
        for composition in weak_compositions(comp, n + 1) {
            let mut probe = pushed.clone();
            for (leg, &p) in composition.iter().enumerate() {
                if p > 0 {
                    probe = probe.mul_psi(leg, p);
                }
            }
            let label = format!("psi^{composition:?}");
            probes.push((label, probe.integrate()?));
        }
        let irr = pushed.mul_boundary(&BoundarySpec::Irreducible).mul_psi(0, comp - 1);
        probes.push(("irr*psi0".into(), irr.integrate()?));
        if n >= 1 && 2 * g as i64 - 2 + n as i64 > 0 {
            let spec = BoundarySpec::Separating { genus: 0, legs: [0, 1].into() };
            let sep = pushed.mul_boundary(&spec).mul_psi(0, comp - 1);
            probes.push(("sep01*psi0".into(), sep.integrate()?));
        }
    }

    for (label, value) in &probes {
        let constant = value.coeff_in_var(b_idx, 0);
        let linear = value.coeff_in_var(b_idx, 1);
        if !constant.is_zero() || !linear.is_zero() {
            return Err(DrCalcError::DivisibilityViolation(format!(
                "pairing {label} of the genus-{g} pushforward has b-expansion \
                 starting {constant} + ({linear})·b"
            )));
        }
    }

    let report =
        PushforwardReport { genus: g, symbols: n, pairings: probes.len(), coefficient_degree };
    Ok((DRPolyClass::from_parts(g, n + 1, pushed), report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_pushforwards_vanish_identically() {
        let (class, report) = dr_pushforward_forget(0, 2).unwrap();
        assert!(class.class().terms().is_empty());
        assert_eq!(report.pairings, 0);
        assert_eq!(report.coefficient_degree, 0);
    }

    #[test]
    fn elliptic_pushforwards_lie_in_b_squared() {
        let (class, report) = dr_pushforward_forget(1, 1).unwrap();
        assert_eq!(class.genus(), 1);
        assert_eq!(class.leaves(), 2);
        assert!(report.pairings >= 3);
        assert!(report.coefficient_degree <= 2);

        // The family specializes correctly: at integer weights it must
        // match the numeric route through the same pushforward.
        let (a1, b) = (3i64, 2i64);
        let numeric = crate::drcalc::dr_cycle_numeric(1, &[a1, -a1 - b, b]).unwrap();
        let numeric_pushed = numeric.class().pushforward_forget(2).unwrap();
        let want = numeric_pushed.mul_psi(0, 1).mul_psi(1, 1).integrate().unwrap();
        let got = class.class().mul_psi(0, 1).mul_psi(1, 1).integrate().unwrap();
        assert_eq!(got.eval_ints(&[a1, b]), want.as_scalar().unwrap());

        let (_, report2) = dr_pushforward_forget(1, 2).unwrap();
        assert!(report2.pairings > report.pairings);
    }

    #[test]
    fn genus_two_pushforwards_lie_in_b_squared() {
        let (class, report) = dr_pushforward_forget(2, 1).unwrap();
        assert_eq!(class.genus(), 2);
        assert!(report.coefficient_degree <= 4);
        assert!(report.pairings >= 5);

        // Forgetting a zero-weight point kills the class: every pairing
        // of the family vanishes identically at b = 0 (here sampled over
        // a basis of ψ-pairings through the coefficient extraction).
        let probe = class.class().mul_psi(0, 2).mul_psi(1, 2).integrate().unwrap();
        assert!(probe.coeff_in_var(1, 0).is_zero());
        assert!(probe.coeff_in_var(1, 1).is_zero());

        // And it again matches the numeric specialization.
        let (a1, b) = (1i64, 2i64);
        let numeric = crate::drcalc::dr_cycle_numeric(2, &[a1, -a1 - b, b]).unwrap();
        let numeric_pushed = numeric.class().pushforward_forget(2).unwrap();
        let want = numeric_pushed.mul_psi(0, 2).mul_psi(1, 2).integrate().unwrap();
        assert_eq!(probe.eval_ints(&[a1, b]), want.as_scalar().unwrap());
    }
}
