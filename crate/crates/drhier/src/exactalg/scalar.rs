//! Exact scalars in ℚ(𝗂): pairs of arbitrary-precision rationals.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Arbitrary-precision rational number (always reduced, positive denominator).
pub type Rational = BigRational;

/// A Gaussian rational `re + im·𝗂`, the coefficient universe of the crate.
///
/// `BigRational` keeps denominators positive and in lowest terms, so the
/// representation is canonical and `Eq`/`Hash` are structural equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    re: Rational,
    im: Rational,
}

impl ExactScalar {
    pub fn zero() -> Self {
        ExactScalar { re: Rational::zero(), im: Rational::zero() }
    }

    pub fn one() -> Self {
        ExactScalar { re: Rational::one(), im: Rational::zero() }
    }

    /// The imaginary unit 𝗂.
    pub fn i() -> Self {
        ExactScalar { re: Rational::zero(), im: Rational::one() }
    }

    pub fn from_int(n: i64) -> Self {
        ExactScalar { re: Rational::from_integer(BigInt::from(n)), im: Rational::zero() }
    }

    /// `num/den` as a real rational. Panics on a zero denominator.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        ExactScalar {
            re: Rational::new(BigInt::from(num), BigInt::from(den)),
            im: Rational::zero(),
        }
    }

    pub fn from_rational(r: Rational) -> Self {
        ExactScalar { re: r, im: Rational::zero() }
    }

    /// `re + im·𝗂` from rational parts.
    pub fn from_parts(re: Rational, im: Rational) -> Self {
        ExactScalar { re, im }
    }

    /// 𝗂 raised to an arbitrary (possibly negative) integer power.
    pub fn i_pow(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => Self::one(),
            1 => Self::i(),
            2 => -Self::one(),
            _ => -Self::i(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// True iff the imaginary part vanishes.
    pub fn is_rational(&self) -> bool {
        self.im.is_zero()
    }

    pub fn re(&self) -> &Rational {
        &self.re
    }

    pub fn im(&self) -> &Rational {
        &self.im
    }

    /// The rational value, if the scalar is real.
    pub fn as_rational(&self) -> Option<&Rational> {
        if self.is_rational() { Some(&self.re) } else { None }
    }

    pub fn conj(&self) -> Self {
        ExactScalar { re: self.re.clone(), im: -self.im.clone() }
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "division by zero scalar");
        let norm = &self.re * &self.re + &self.im * &self.im;
        ExactScalar { re: &self.re / &norm, im: -(&self.im / &norm) }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Renders a real value as `num/den` (`den` omitted when 1).
    /// Panics if the value is not rational; callers assert rationality first.
    pub fn to_fraction_string(&self) -> String {
        let r = self
            .as_rational()
            .unwrap_or_else(|| panic!("scalar {self} is not rational"));
        if r.denom().is_one() {
            format!("{}", r.numer())
        } else {
            format!("{}/{}", r.numer(), r.denom())
        }
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}*i", self.im)
        } else {
            write!(f, "{}{}{}*i", self.re, if self.im < Rational::zero() { "" } else { "+" }, self.im)
        }
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: &ExactScalar) -> ExactScalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<ExactScalar> for &ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                self.$method(&rhs)
            }
        }
    };
}

impl Add<&ExactScalar> for &ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: &ExactScalar) -> ExactScalar {
        ExactScalar { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}
forward_binop!(Add, add);

impl Sub<&ExactScalar> for &ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: &ExactScalar) -> ExactScalar {
        ExactScalar { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}
forward_binop!(Sub, sub);

impl Mul<&ExactScalar> for &ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        ExactScalar {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}
forward_binop!(Mul, mul);

impl Div<&ExactScalar> for &ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: &ExactScalar) -> ExactScalar {
        self * &rhs.recip()
    }
}
forward_binop!(Div, div);

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar { re: -self.re, im: -self.im }
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar { re: -self.re.clone(), im: -self.im.clone() }
    }
}

impl AddAssign<&ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: &ExactScalar) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl AddAssign for ExactScalar {
    fn add_assign(&mut self, rhs: ExactScalar) {
        *self += &rhs;
    }
}

impl SubAssign<&ExactScalar> for ExactScalar {
    fn sub_assign(&mut self, rhs: &ExactScalar) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&ExactScalar> for ExactScalar {
    fn mul_assign(&mut self, rhs: &ExactScalar) {
        *self = &*self * rhs;
    }
}

impl Sum for ExactScalar {
    fn sum<I: Iterator<Item = ExactScalar>>(iter: I) -> ExactScalar {
        let mut acc = ExactScalar::zero();
        for x in iter {
            acc += &x;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_field_ops() {
        let i = ExactScalar::i();
        assert_eq!(&i * &i, ExactScalar::from_int(-1));
        assert_eq!(ExactScalar::i_pow(-1), -ExactScalar::i());
        assert_eq!(ExactScalar::i_pow(6), ExactScalar::from_int(-1));
        let z = ExactScalar::from_parts(
            Rational::new(BigInt::from(1), BigInt::from(2)),
            Rational::new(BigInt::from(-3), BigInt::from(4)),
        );
        assert_eq!(&z * &z.recip(), ExactScalar::one());
        assert!(!z.is_rational());
        assert_eq!(ExactScalar::from_ratio(6, -4).to_fraction_string(), "-3/2");
    }
}
