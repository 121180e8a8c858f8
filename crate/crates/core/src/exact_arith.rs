//! Exact integers and rationals, plus the combinatorial quantities the
//! closed forms are built from.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary-precision rational number, always in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalParseError {
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

impl Rational {
    /// `numer / denom`, reduced. Panics if `denom == 0`.
    pub fn new(numer: i64, denom: i64) -> Self {
        Self::from_bigints(BigInt::from(numer), BigInt::from(denom))
    }

    pub fn from_bigints(numer: BigInt, denom: BigInt) -> Self {
        assert!(!denom.is_zero(), "rational with zero denominator");
        Rational(BigRational::new(numer, denom))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rational(self.0.recip())
    }

    pub fn pow(&self, exp: i32) -> Self {
        Rational(num_traits::Pow::pow(&self.0, exp))
    }

    /// Largest integer not exceeding `self`.
    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Smallest integer not below `self`.
    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Nearest `f64`; magnitudes beyond the `f64` range become infinite.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            if self.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }

    /// Always `p/q`, even for integers.
    pub fn to_ratio_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    /// Exact value of a finite `f64`.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rational)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = RationalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let numer: BigInt = n.parse().map_err(|_| RationalParseError::Invalid(s.into()))?;
        let denom: BigInt = d.parse().map_err(|_| RationalParseError::Invalid(s.into()))?;
        if denom.is_zero() {
            return Err(RationalParseError::ZeroDenominator(s.into()));
        }
        Ok(Rational::from_bigints(numer, denom))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_ratio_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

impl PartialEq<i64> for Rational {
    fn eq(&self, other: &i64) -> bool {
        self.is_integer() && *self.numer() == BigInt::from(*other)
    }
}

impl PartialOrd<i64> for Rational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.0.cmp(&BigRational::from_integer(BigInt::from(*other))))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CombinatoricsError {
    #[error("binomial({n}, {i}) requested with i > n")]
    BinomialOutOfRange { n: u64, i: u64 },
}

/// `n!`, with `0! = 1`.
pub fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// `n` choose `i`, exactly.
pub fn binomial(n: u64, i: u64) -> Result<BigInt, CombinatoricsError> {
    if i > n {
        return Err(CombinatoricsError::BinomialOutOfRange { n, i });
    }
    let i = i.min(n - i);
    // Each partial product is itself a binomial coefficient, so the division is exact.
    let mut acc = BigInt::one();
    for t in 0..i {
        acc = acc * (n - t) / (t + 1);
    }
    Ok(acc)
}

/// Product `N·(N−step)·(N−2·step)···` down to the smallest positive member of
/// the progression. `multifactorial(N, 1) = N!`, `multifactorial(N, 2) = N!!`.
///
/// A zero `n` or `step` is outside the domain; `n = 0` yields the empty product.
pub fn multifactorial(n: u64, step: u64) -> BigInt {
    assert!(step >= 1, "multifactorial step must be positive");
    let mut acc = BigInt::one();
    let mut m = n;
    while m > 0 {
        acc *= m;
        m = m.saturating_sub(step);
    }
    acc
}

/// `gcd(a, b)` for nonnegative results.
pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn factorial_small_values() {
        assert_eq!(factorial(0), big(1));
        assert_eq!(factorial(3), big(6));
        // iterated multiplication oracle
        let mut oracle = 1i64;
        for k in 1..=10 {
            oracle *= k;
        }
        assert_eq!(factorial(10), big(oracle));
        assert_eq!(oracle, 3_628_800);
    }

    fn pascal_row(n: usize) -> Vec<BigInt> {
        let mut row = vec![BigInt::one()];
        for _ in 0..n {
            let mut next = vec![BigInt::one(); row.len() + 1];
            for j in 1..row.len() {
                next[j] = &row[j - 1] + &row[j];
            }
            row = next;
        }
        row
    }

    #[test]
    fn binomial_matches_pascal() {
        assert_eq!(binomial(4, 0).unwrap(), big(1));
        assert_eq!(binomial(4, 2).unwrap(), big(6));
        assert_eq!(binomial(20, 10).unwrap(), big(184_756));
        for n in 0..=30u64 {
            let row = pascal_row(n as usize);
            for i in 0..=n {
                assert_eq!(binomial(n, i).unwrap(), row[i as usize]);
            }
        }
    }

    #[test]
    fn binomial_rejects_i_above_n() {
        assert_eq!(
            binomial(3, 4),
            Err(CombinatoricsError::BinomialOutOfRange { n: 3, i: 4 })
        );
    }

    #[test]
    fn binomial_symmetry() {
        for n in 0..=64u64 {
            for i in 0..=n {
                assert_eq!(binomial(n, i).unwrap(), binomial(n, n - i).unwrap());
            }
        }
    }

    #[test]
    fn multifactorial_examples() {
        assert_eq!(multifactorial(6, 3), big(18));
        assert_eq!(multifactorial(5, 3), big(10));
        assert_eq!(multifactorial(7, 1), big(5040));
        // N < step: single-element product
        assert_eq!(multifactorial(2, 5), big(2));
    }

    #[test]
    fn multifactorial_reductions() {
        for n in 1..=25u64 {
            assert_eq!(multifactorial(n, 1), factorial(n));
            let double: BigInt = (1..=n).filter(|k| k % 2 == n % 2).map(BigInt::from).product();
            assert_eq!(multifactorial(n, 2), double);
            for step in 1..n {
                assert_eq!(
                    multifactorial(n, step),
                    BigInt::from(n) * multifactorial(n - step, step)
                );
            }
        }
    }

    #[test]
    fn rational_is_canonical() {
        let r = Rational::new(6, -4);
        assert_eq!(*r.numer(), big(-3));
        assert_eq!(*r.denom(), big(2));
        assert_eq!(r.to_string(), "-3/2");
        assert_eq!(Rational::from(5).to_ratio_string(), "5/1");
        assert_eq!("10/-4".parse::<Rational>().unwrap(), Rational::new(-5, 2));
        assert_eq!(" 7 ".parse::<Rational>().unwrap(), Rational::from(7));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
    }

    #[test]
    fn rational_floor_ceil() {
        assert_eq!(Rational::new(-3, 2).floor(), big(-2));
        assert_eq!(Rational::new(-3, 2).ceil(), big(-1));
        assert_eq!(Rational::new(4, 2).ceil(), big(2));
    }

    proptest! {
        #[test]
        fn add_then_subtract_is_identity(
            p in -10_000i64..10_000, q in 1i64..10_000,
            r in -10_000i64..10_000, s in 1i64..10_000,
        ) {
            let a = Rational::new(p, q);
            let b = Rational::new(r, s);
            prop_assert_eq!(&(&a + &b) - &b, a);
        }

        #[test]
        fn canonical_form_invariant(p in -1_000_000i64..1_000_000, q in 1i64..1_000_000, neg in any::<bool>()) {
            let r = if neg { Rational::new(p, -q) } else { Rational::new(p, q) };
            prop_assert!(r.denom().is_positive());
            prop_assert!(gcd(r.numer(), r.denom()).is_one());
        }

        #[test]
        fn ratio_string_round_trips(p in -1_000_000i64..1_000_000, q in 1i64..1_000_000) {
            let r = Rational::new(p, q);
            prop_assert_eq!(r.to_ratio_string().parse::<Rational>().unwrap(), r);
        }
    }
}
