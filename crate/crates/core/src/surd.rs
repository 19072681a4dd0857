//! Exact arithmetic in `Q(√D)` for a fixed non-square radicand `D`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// `a + b√D` with rational `a`, `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticSurd {
    pub a: BigRational,
    pub b: BigRational,
    d: BigInt,
}

fn is_square(d: &BigInt) -> bool {
    !d.is_negative() && {
        let r = d.sqrt();
        &r * &r == *d
    }
}

impl QuadraticSurd {
    /// Panics if `d` is a perfect square: the `(a, b)` pair would not be unique.
    pub fn new(a: BigRational, b: BigRational, d: BigInt) -> QuadraticSurd {
        assert!(!is_square(&d), "radicand {d} is a perfect square");
        QuadraticSurd { a, b, d }
    }

    pub fn from_ints(a: i64, b: i64, d: &BigInt) -> QuadraticSurd {
        QuadraticSurd::new(
            BigRational::from_integer(a.into()),
            BigRational::from_integer(b.into()),
            d.clone(),
        )
    }

    pub fn rational(a: BigRational, d: &BigInt) -> QuadraticSurd {
        QuadraticSurd::new(a, BigRational::zero(), d.clone())
    }

    pub fn radicand(&self) -> &BigInt {
        &self.d
    }

    pub fn conjugate(&self) -> QuadraticSurd {
        QuadraticSurd {
            a: self.a.clone(),
            b: -self.b.clone(),
            d: self.d.clone(),
        }
    }

    /// `a^2 - b^2 D`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(self.d.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// `None` for zero.
    pub fn recip(&self) -> Option<QuadraticSurd> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        Some(QuadraticSurd {
            a: &self.a / &n,
            b: -(&self.b / &n),
            d: self.d.clone(),
        })
    }

    pub fn div(&self, other: &QuadraticSurd) -> Option<QuadraticSurd> {
        other.recip().map(|r| self * &r)
    }

    pub fn pow(&self, mut exp: u32) -> QuadraticSurd {
        let mut base = self.clone();
        let mut acc = QuadraticSurd::rational(BigRational::one(), &self.d);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            exp >>= 1;
        }
        acc
    }

    /// The integer value, if `b = 0` and `a` is integral.
    pub fn to_integer(&self) -> Option<BigInt> {
        (self.b.is_zero() && self.a.is_integer()).then(|| self.a.to_integer())
    }

    fn same_field(&self, other: &QuadraticSurd) {
        assert_eq!(self.d, other.d, "mixed radicands");
    }
}

impl Add for &QuadraticSurd {
    type Output = QuadraticSurd;
    fn add(self, rhs: &QuadraticSurd) -> QuadraticSurd {
        self.same_field(rhs);
        QuadraticSurd {
            a: &self.a + &rhs.a,
            b: &self.b + &rhs.b,
            d: self.d.clone(),
        }
    }
}

impl Sub for &QuadraticSurd {
    type Output = QuadraticSurd;
    fn sub(self, rhs: &QuadraticSurd) -> QuadraticSurd {
        self.same_field(rhs);
        QuadraticSurd {
            a: &self.a - &rhs.a,
            b: &self.b - &rhs.b,
            d: self.d.clone(),
        }
    }
}

impl Mul for &QuadraticSurd {
    type Output = QuadraticSurd;
    fn mul(self, rhs: &QuadraticSurd) -> QuadraticSurd {
        self.same_field(rhs);
        let d = BigRational::from_integer(self.d.clone());
        QuadraticSurd {
            a: &self.a * &rhs.a + &self.b * &rhs.b * d,
            b: &self.a * &rhs.b + &rhs.a * &self.b,
            d: self.d.clone(),
        }
    }
}

impl Neg for &QuadraticSurd {
    type Output = QuadraticSurd;
    fn neg(self) -> QuadraticSurd {
        QuadraticSurd {
            a: -self.a.clone(),
            b: -self.b.clone(),
            d: self.d.clone(),
        }
    }
}

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + ({})√{}", self.a, self.b, self.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d() -> BigInt {
        BigInt::from(12) // (q-1)(q+3) at q = 3
    }

    #[test]
    fn multiplication_and_conjugate() {
        let x = QuadraticSurd::from_ints(1, 2, &d());
        let y = QuadraticSurd::from_ints(3, -1, &d());
        // (1 + 2√12)(3 - √12) = 3 - 24 + (6 - 1)√12
        assert_eq!(&x * &y, QuadraticSurd::from_ints(-21, 5, &d()));
        assert_eq!((&x * &x.conjugate()).to_integer(), Some(BigInt::from(1 - 4 * 12)));
    }

    #[test]
    fn reciprocal_round_trip() {
        let x = QuadraticSurd::from_ints(5, -3, &d());
        let one = &x * &x.recip().unwrap();
        assert_eq!(one.to_integer(), Some(BigInt::one()));
        assert!(QuadraticSurd::from_ints(0, 0, &d()).recip().is_none());
    }

    #[test]
    fn power_matches_repeated_product() {
        let x = QuadraticSurd::from_ints(2, 1, &d());
        let mut acc = QuadraticSurd::from_ints(1, 0, &d());
        for k in 0..9 {
            assert_eq!(x.pow(k), acc);
            acc = &acc * &x;
        }
    }

    #[test]
    #[should_panic]
    fn square_radicand_rejected() {
        QuadraticSurd::from_ints(1, 1, &BigInt::from(16));
    }
}
