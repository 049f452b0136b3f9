//! Exact coefficient scalars.
//!
//! All arithmetic in this crate is exact: the two scalar types are arbitrary
//! precision rationals and a 62-bit prime field used for randomized
//! cross-checks. There is intentionally no floating point instantiation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Arbitrary-precision rational, always reduced, denominator positive.
pub type Rat = num_rational::BigRational;

/// The prime used for Schwartz-Zippel style specializations: 2^62 - 57.
pub const SPECIALIZATION_PRIME: u64 = 4_611_686_018_427_387_847;

/// Exact scalar coefficients for polynomials and sections.
pub trait Scalar:
    Clone
    + PartialEq
    + Eq
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_i64(n: i64) -> Self;

    /// Image of a rational under the canonical map into this scalar type.
    fn from_rat(q: &Rat) -> Self;

    /// Exact division. `None` when the divisor is zero or does not divide.
    fn exact_div(&self, rhs: &Self) -> Option<Self>;

    /// Whether canonical rendering should pull out a leading minus sign.
    fn is_display_negative(&self) -> bool {
        false
    }
}

impl Scalar for Rat {
    fn from_i64(n: i64) -> Self {
        Rat::from_integer(BigInt::from(n))
    }

    fn from_rat(q: &Rat) -> Self {
        q.clone()
    }

    fn exact_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.is_zero() {
            None
        } else {
            Some(self / rhs)
        }
    }

    fn is_display_negative(&self) -> bool {
        self.is_negative()
    }
}

/// Parse a rational from `p`, `-p` or `p/q` notation.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Rat::new(n, d))
    } else {
        let n: BigInt = s.parse().ok()?;
        Some(Rat::from_integer(n))
    }
}

/// Prime field of order `P`, with arithmetic through u128 intermediates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Fp<const P: u64>(u64);

/// The concrete specialization field.
pub type Fp62 = Fp<SPECIALIZATION_PRIME>;

impl<const P: u64> Fp<P> {
    pub fn new(v: u64) -> Self {
        Fp(v % P)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Fp::new(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat; zero maps to `None`.
    pub fn inverse(self) -> Option<Self> {
        if self.0 == 0 {
            None
        } else {
            Some(self.pow(P - 2))
        }
    }

    fn from_bigint(n: &BigInt) -> Self {
        let p = BigInt::from(P);
        let r = n.mod_floor(&p);
        let (_, digits) = r.to_u64_digits();
        Fp::new(*digits.first().unwrap_or(&0))
    }
}

impl<const P: u64> fmt::Display for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> Add for Fp<P> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let s = self.0 as u128 + rhs.0 as u128;
        Fp((s % P as u128) as u64)
    }
}

impl<const P: u64> Sub for Fp<P> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<const P: u64> Mul for Fp<P> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let m = self.0 as u128 * rhs.0 as u128;
        Fp((m % P as u128) as u64)
    }
}

impl<const P: u64> Neg for Fp<P> {
    type Output = Self;
    fn neg(self) -> Self {
        if self.0 == 0 {
            self
        } else {
            Fp(P - self.0)
        }
    }
}

impl<const P: u64> Zero for Fp<P> {
    fn zero() -> Self {
        Fp(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl<const P: u64> One for Fp<P> {
    fn one() -> Self {
        Fp(1)
    }
}

impl<const P: u64> Scalar for Fp<P> {
    fn from_i64(n: i64) -> Self {
        let r = (n % P as i64 + P as i64) as u64;
        Fp::new(r)
    }

    fn from_rat(q: &Rat) -> Self {
        let num = Fp::from_bigint(q.numer());
        let den = Fp::from_bigint(q.denom());
        num * den
            .inverse()
            .expect("denominator reduces to zero mod the specialization prime")
    }

    fn exact_div(&self, rhs: &Self) -> Option<Self> {
        rhs.inverse().map(|inv| *self * inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fp_field_ops() {
        let a = Fp62::new(17);
        let b = Fp62::new(SPECIALIZATION_PRIME - 3);
        assert_eq!(a + (-a), Fp62::zero());
        assert_eq!((a * b).exact_div(&b), Some(a));
        assert_eq!(b * b.inverse().unwrap(), Fp62::one());
    }

    #[test]
    fn rat_hom_respects_ops() {
        let x = parse_rat("3/7").unwrap();
        let y = parse_rat("-5/2").unwrap();
        let fx = Fp62::from_rat(&x);
        let fy = Fp62::from_rat(&y);
        assert_eq!(Fp62::from_rat(&(x.clone() * y.clone())), fx * fy);
        assert_eq!(Fp62::from_rat(&(x + y)), fx + fy);
    }

    #[test]
    fn parse_rat_rejects_zero_denominator() {
        assert!(parse_rat("1/0").is_none());
        assert_eq!(parse_rat(" -4 ").unwrap(), Rat::from_i64(-4));
    }

    #[test]
    fn rationals_stay_reduced_with_positive_denominator() {
        let q = Rat::new(BigInt::from(6), BigInt::from(-4));
        assert_eq!(q.numer(), &BigInt::from(-3));
        assert_eq!(q.denom(), &BigInt::from(2));
    }
}
