//! Dense univariate polynomials in `k` over [`Rational`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::exact_arith::Rational;

/// Degree of a polynomial; the zero polynomial has degree `NegInfinity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(usize),
}

impl Degree {
    pub fn finite(self) -> Option<usize> {
        match self {
            Degree::NegInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInfinity => f.write_str("-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolynomialError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
}

/// `coeffs[i]` is the coefficient of `k^i`. Never has trailing zeros; the
/// zero polynomial is the empty vector.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Rational::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `k`.
    pub fn var() -> Self {
        Self::new(vec![Rational::zero(), Rational::one()])
    }

    /// `k + shift`.
    pub fn linear(shift: Rational) -> Self {
        Self::new(vec![shift, Rational::one()])
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Rational::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `k^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Degree {
        match self.coeffs.len() {
            0 => Degree::NegInfinity,
            n => Degree::Finite(n - 1),
        }
    }

    pub fn leading_coeff(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from(i as i64))
                .collect(),
        )
    }

    pub fn pow(&self, exp: u32) -> Self {
        (0..exp).fold(Self::one(), |acc, _| &acc * self)
    }

    /// `(quotient, remainder)` with `deg(remainder) < deg(divisor)`.
    pub fn divide_with_remainder(&self, divisor: &Self) -> Result<(Self, Self), PolynomialError> {
        let Some(lead) = divisor.leading_coeff() else {
            return Err(PolynomialError::DivisionByZero);
        };
        let dd = divisor.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for pos in (0..quot.len()).rev() {
            let c = &rem[pos + dd] / lead;
            if c.is_zero() {
                continue;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[pos + j] -= &(&c * d);
            }
            quot[pos] = c;
        }
        rem.truncate(dd);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Returns `q` with `q(t) = p(t + shift)`; the coefficients of `q` are the
    /// Taylor coefficients of `p` around `shift`.
    pub fn compose_shift(&self, shift: &Rational) -> Self {
        // Horner with the linear polynomial t + shift.
        let lin = Self::linear(shift.clone());
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, c| &(&acc * &lin) + &Self::constant(c.clone()))
    }

    /// `leading · ∏ (k + shift)^multiplicity`, expanded.
    pub fn expand_factored(leading: &Rational, factors: &[(Rational, u32)]) -> Self {
        factors
            .iter()
            .fold(Self::constant(leading.clone()), |acc, (shift, m)| {
                &acc * &Self::linear(shift.clone()).pow(*m)
            })
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for Polynomial {
    /// DSL form, e.g. `3*k^2-1/2*k+1`; parseable by the series parser.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if c.is_negative() {
                f.write_str("-")?;
            } else if !first {
                f.write_str("+")?;
            }
            first = false;
            let mono = match i {
                0 => String::new(),
                1 => "k".to_string(),
                _ => format!("k^{i}"),
            };
            if i == 0 {
                write!(f, "{mag}")?;
            } else if mag == 1 {
                f.write_str(&mono)?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn k_k1_k2() -> Polynomial {
        Polynomial::expand_factored(
            &Rational::one(),
            &[(r(0, 1), 1), (r(1, 1), 1), (r(2, 1), 1)],
        )
    }

    #[test]
    fn degree_cases() {
        assert_eq!(Polynomial::zero().degree(), Degree::NegInfinity);
        assert_eq!(Polynomial::from_i64s(&[1, 0, 1]).degree(), Degree::Finite(2));
        assert_eq!(k_k1_k2().degree(), Degree::Finite(3));
        assert!(Degree::NegInfinity < Degree::Finite(0));
        assert_eq!(Polynomial::from_i64s(&[0, 0]).degree(), Degree::NegInfinity);
    }

    #[test]
    fn eval_examples() {
        assert_eq!(Polynomial::from_i64s(&[1, 0, 1]).eval(&r(2, 1)), r(5, 1));
        assert_eq!(k_k1_k2().eval(&r(1, 1)), r(6, 1));
        assert_eq!(k_k1_k2().eval(&r(-1, 1)), r(0, 1));
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(
            Polynomial::from_i64s(&[0, 0, 0, 1]).derivative(),
            Polynomial::from_i64s(&[0, 0, 3])
        );
        let (q, rem) = Polynomial::from_i64s(&[-1, 0, 1])
            .divide_with_remainder(&Polynomial::from_i64s(&[-1, 1]))
            .unwrap();
        assert_eq!(q, Polynomial::from_i64s(&[1, 1]));
        assert!(rem.is_zero());
        assert_eq!(
            &Polynomial::from_i64s(&[1, 1]) * &Polynomial::from_i64s(&[2, 1]),
            Polynomial::from_i64s(&[2, 3, 1])
        );
        assert_eq!(
            Polynomial::one().divide_with_remainder(&Polynomial::zero()),
            Err(PolynomialError::DivisionByZero)
        );
    }

    #[test]
    fn expand_factored_examples() {
        assert_eq!(k_k1_k2(), Polynomial::from_i64s(&[0, 2, 3, 1]));
        assert_eq!(
            Polynomial::expand_factored(&Rational::one(), &[(r(1, 1), 2)]),
            Polynomial::from_i64s(&[1, 2, 1])
        );
        assert_eq!(
            Polynomial::expand_factored(&r(2, 1), &[(r(0, 1), 1)]),
            Polynomial::from_i64s(&[0, 2])
        );
    }

    #[test]
    fn compose_shift_moves_roots() {
        // p(k) = k(k+1)(k+2); p(t - 1) = (t-1) t (t+1) = t^3 - t
        assert_eq!(
            k_k1_k2().compose_shift(&r(-1, 1)),
            Polynomial::from_i64s(&[0, -1, 0, 1])
        );
    }

    #[test]
    fn display_forms() {
        assert_eq!(Polynomial::from_i64s(&[-1, 0, 3]).to_string(), "3*k^2-1");
        assert_eq!(Polynomial::new(vec![r(1, 2), r(-1, 1)]).to_string(), "-k+1/2");
        assert_eq!(Polynomial::zero().to_string(), "0");
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-20i64..=20, 1i64..=6).prop_map(|(n, d)| Rational::new(n, d))
    }

    fn small_poly() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(small_rational(), 0..6).prop_map(Polynomial::new)
    }

    proptest! {
        #[test]
        fn expand_factored_evaluates_to_product(
            c in small_rational(),
            factors in prop::collection::vec((small_rational(), 1u32..=3), 1..4),
            x in small_rational(),
        ) {
            let p = Polynomial::expand_factored(&c, &factors);
            let direct = factors
                .iter()
                .fold(c.clone(), |acc, (a, m)| acc * (&x + a).pow(*m as i32));
            prop_assert_eq!(p.eval(&x), direct);
        }

        #[test]
        fn division_reconstructs_dividend(a in small_poly(), b in small_poly()) {
            prop_assume!(!b.is_zero());
            let (q, rem) = a.divide_with_remainder(&b).unwrap();
            prop_assert!(rem.degree() < b.degree());
            prop_assert_eq!(&(&b * &q) + &rem, a);
        }

        #[test]
        fn derivative_is_linear_and_leibniz(a in small_poly(), b in small_poly(), c in small_rational()) {
            prop_assert_eq!(
                (&a.scale(&c) + &b).derivative(),
                &a.derivative().scale(&c) + &b.derivative()
            );
            prop_assert_eq!(
                (&a * &b).derivative(),
                &(&a.derivative() * &b) + &(&a * &b.derivative())
            );
        }
    }
}
