//! Exact partial-fraction decomposition of `Q(k) / (c·∏ (k + aᵢ)^mᵢ)` into
//! `(1/c) Σᵢ Σⱼ Aᵢⱼ / (k + aᵢ)^j`.

use std::fmt;

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::exact_arith::{binomial, factorial, Rational};
use crate::polynomials::{Degree, Polynomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactoredError {
    #[error("no linear factors in the denominator")]
    NoFactors,
    #[error("factor {index} has multiplicity zero")]
    ZeroMultiplicity { index: usize },
    #[error("leading constant is zero")]
    ZeroLeading,
    #[error("shift {shift} appears in factors {first} and {second}")]
    RepeatedRoot {
        shift: Rational,
        first: usize,
        second: usize,
    },
    #[error("series diverges: deg Q = {numerator_degree} but deg P = {denominator_degree} (need deg Q + 2 <= deg P)")]
    Divergent {
        numerator_degree: Degree,
        denominator_degree: usize,
    },
    #[error("factor k{shift:+} vanishes at k = {pole}, inside the summation range")]
    PoleInRange { shift: Rational, pole: BigInt, index: usize },
}

/// `k + shift` raised to `multiplicity`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LinearFactor {
    pub shift: Rational,
    pub multiplicity: u32,
}

impl LinearFactor {
    pub fn new(shift: Rational, multiplicity: u32) -> Self {
        LinearFactor { shift, multiplicity }
    }
}

/// A series term `Q(k) / P(k)` with `P(k) = leading · ∏ (k + aᵢ)^mᵢ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactoredRational {
    numerator: Polynomial,
    leading: Rational,
    factors: Vec<LinearFactor>,
}

impl FactoredRational {
    /// Checks distinct shifts, positive multiplicities and the convergence
    /// condition `deg Q + 2 <= deg P`. Poles are checked separately against
    /// a summation start with [`FactoredRational::check_start`].
    pub fn new(
        numerator: Polynomial,
        leading: Rational,
        factors: Vec<LinearFactor>,
    ) -> Result<Self, FactoredError> {
        if factors.is_empty() {
            return Err(FactoredError::NoFactors);
        }
        if leading.is_zero() {
            return Err(FactoredError::ZeroLeading);
        }
        for (index, f) in factors.iter().enumerate() {
            if f.multiplicity == 0 {
                return Err(FactoredError::ZeroMultiplicity { index });
            }
            if let Some(first) = factors[..index].iter().position(|g| g.shift == f.shift) {
                return Err(FactoredError::RepeatedRoot {
                    shift: f.shift.clone(),
                    first,
                    second: index,
                });
            }
        }
        let out = FactoredRational {
            numerator,
            leading,
            factors,
        };
        let dp = out.denominator_degree();
        if let Degree::Finite(dq) = out.numerator.degree() {
            if dq + 2 > dp {
                return Err(FactoredError::Divergent {
                    numerator_degree: out.numerator.degree(),
                    denominator_degree: dp,
                });
            }
        }
        Ok(out)
    }

    /// `1 / (k (k+1) ··· (k+n))`.
    pub fn andreoli(n: u32) -> Self {
        Self::new(
            Polynomial::one(),
            Rational::one(),
            (0..=n as i64)
                .map(|i| LinearFactor::new(Rational::from(i), 1))
                .collect(),
        )
        .expect("andreoli factors are distinct and convergent for n >= 1")
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.numerator
    }

    pub fn leading(&self) -> &Rational {
        &self.leading
    }

    pub fn factors(&self) -> &[LinearFactor] {
        &self.factors
    }

    pub fn denominator_degree(&self) -> usize {
        self.factors.iter().map(|f| f.multiplicity as usize).sum()
    }

    pub fn denominator(&self) -> Polynomial {
        let pairs: Vec<_> = self
            .factors
            .iter()
            .map(|f| (f.shift.clone(), f.multiplicity))
            .collect();
        Polynomial::expand_factored(&self.leading, &pairs)
    }

    /// Rejects any factor `k + a` that vanishes at an integer `k >= start`.
    pub fn check_start(&self, start: u64) -> Result<(), FactoredError> {
        for (index, f) in self.factors.iter().enumerate() {
            if f.shift.is_integer() {
                let pole = -f.shift.numer();
                if pole >= BigInt::from(start) {
                    return Err(FactoredError::PoleInRange {
                        shift: f.shift.clone(),
                        pole,
                        index,
                    });
                }
            }
        }
        Ok(())
    }

    /// `P(x)` exactly.
    pub fn denominator_at(&self, x: &Rational) -> Rational {
        self.factors.iter().fold(self.leading.clone(), |acc, f| {
            acc * (x + &f.shift).pow(f.multiplicity as i32)
        })
    }

    /// `Q(x)/P(x)`, or `None` at a pole.
    pub fn term(&self, x: &Rational) -> Option<Rational> {
        let den = self.denominator_at(x);
        if den.is_zero() {
            None
        } else {
            Some(self.numerator.eval(x) / den)
        }
    }

    pub fn term_f64(&self, x: f64) -> f64 {
        let den = self
            .factors
            .iter()
            .fold(self.leading.to_f64(), |acc, f| {
                acc * (x + f.shift.to_f64()).powi(f.multiplicity as i32)
            });
        self.numerator.eval_f64(x) / den
    }

    /// Same term with every shift moved by `offset`: `k ↦ k + offset`.
    pub fn shifted(&self, offset: &Rational) -> Self {
        FactoredRational {
            numerator: self.numerator.compose_shift(offset),
            leading: self.leading.clone(),
            factors: self
                .factors
                .iter()
                .map(|f| LinearFactor::new(&f.shift + offset, f.multiplicity))
                .collect(),
        }
    }
}

impl fmt::Display for FactoredRational {
    /// DSL form, e.g. `1/(4*(k+1/2)*(k+3/2))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = &self.numerator;
        let plain_numerator = q.degree() <= Degree::Finite(0)
            && !q.coeff(0).is_negative()
            && q.coeff(0).is_integer();
        if plain_numerator {
            write!(f, "{q}/(")?;
        } else {
            write!(f, "({q})/(")?;
        }
        let mut parts = Vec::new();
        if self.leading != 1 {
            if self.leading.is_negative() || !self.leading.is_integer() {
                parts.push(format!("({})", self.leading));
            } else {
                parts.push(self.leading.to_string());
            }
        }
        for fac in &self.factors {
            let base = if fac.shift.is_zero() {
                "k".to_string()
            } else if fac.shift.is_negative() {
                format!("(k-{})", fac.shift.abs())
            } else {
                format!("(k+{})", fac.shift)
            };
            if fac.multiplicity == 1 {
                parts.push(base);
            } else {
                parts.push(format!("{base}^{}", fac.multiplicity));
            }
        }
        write!(f, "{})", parts.join("*"))
    }
}

/// One coefficient `Aᵢⱼ` of `Aᵢⱼ / (k + aᵢ)^j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PartialFractionTerm {
    pub shift: Rational,
    pub order: u32,
    pub coeff: Rational,
}

/// Terms sorted by `(shift, order)`; every order `1..=mᵢ` is present for
/// each shift, zeros included.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PartialFractionDecomposition {
    pub terms: Vec<PartialFractionTerm>,
    pub leading: Rational,
}

impl PartialFractionDecomposition {
    fn from_unsorted(mut terms: Vec<PartialFractionTerm>, leading: Rational) -> Self {
        terms.sort_by(|a, b| a.shift.cmp(&b.shift).then(a.order.cmp(&b.order)));
        PartialFractionDecomposition { terms, leading }
    }

    /// Distinct shifts with their multiplicities, ascending.
    pub fn poles(&self) -> Vec<(Rational, u32)> {
        let mut out: Vec<(Rational, u32)> = Vec::new();
        for t in &self.terms {
            match out.last_mut() {
                Some((s, m)) if *s == t.shift => *m = (*m).max(t.order),
                _ => out.push((t.shift.clone(), t.order)),
            }
        }
        out
    }

    pub fn coeff(&self, shift: &Rational, order: u32) -> Option<&Rational> {
        self.terms
            .iter()
            .find(|t| t.shift == *shift && t.order == order)
            .map(|t| &t.coeff)
    }

    /// `Σᵢ Aᵢ₁`; zero for every convergent series.
    pub fn simple_pole_sum(&self) -> Rational {
        self.terms
            .iter()
            .filter(|t| t.order == 1)
            .map(|t| &t.coeff)
            .sum()
    }

    pub fn max_order(&self) -> u32 {
        self.terms.iter().map(|t| t.order).max().unwrap_or(0)
    }

    /// `(1/leading) Σ Aᵢⱼ / (x + aᵢ)^j`, or `None` at a pole.
    pub fn eval(&self, x: &Rational) -> Option<Rational> {
        let mut acc = Rational::zero();
        for t in &self.terms {
            let base = x + &t.shift;
            if base.is_zero() {
                return None;
            }
            acc += &t.coeff / base.pow(t.order as i32);
        }
        Some(acc / &self.leading)
    }

    /// Decomposition of the same function with `k ↦ k + offset`.
    pub fn shifted(&self, offset: &Rational) -> Self {
        PartialFractionDecomposition {
            terms: self
                .terms
                .iter()
                .map(|t| PartialFractionTerm {
                    shift: &t.shift + offset,
                    order: t.order,
                    coeff: t.coeff.clone(),
                })
                .collect(),
            leading: self.leading.clone(),
        }
    }
}

/// Computes the `Aᵢⱼ` table. For each pole `aᵢ` the reduced function
/// `gᵢ(k) = Q(k) / ∏_{i'≠i} (k + a_{i'})^{m_{i'}}` is expanded around
/// `k = −aᵢ` by exact power-series division; its `r`-th Taylor coefficient is
/// `A_{i, mᵢ−r}`.
pub fn decompose(f: &FactoredRational) -> PartialFractionDecomposition {
    let mut terms = Vec::new();
    for (i, pole) in f.factors.iter().enumerate() {
        let order = pole.multiplicity as usize;
        // t = k + aᵢ
        let num = f.numerator.compose_shift(&-&pole.shift);
        let others: Vec<(Rational, u32)> = f
            .factors
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, g)| (&g.shift - &pole.shift, g.multiplicity))
            .collect();
        let den = Polynomial::expand_factored(&Rational::one(), &others);
        let series = series_quotient(&num, &den, order);
        for (r, c) in series.into_iter().enumerate() {
            terms.push(PartialFractionTerm {
                shift: pole.shift.clone(),
                order: (order - r) as u32,
                coeff: c,
            });
        }
    }
    PartialFractionDecomposition::from_unsorted(terms, f.leading.clone())
}

/// First `n` power-series coefficients of `num / den`; `den(0) != 0`.
fn series_quotient(num: &Polynomial, den: &Polynomial, n: usize) -> Vec<Rational> {
    let d0 = den.coeff(0);
    debug_assert!(!d0.is_zero());
    let mut out: Vec<Rational> = Vec::with_capacity(n);
    for r in 0..n {
        let mut acc = num.coeff(r);
        for s in 1..=r {
            let ds = den.coeff(s);
            if !ds.is_zero() {
                acc -= &(&ds * &out[r - s]);
            }
        }
        out.push(acc / &d0);
    }
    out
}

/// Closed-form coefficients of `1/(k(k+1)···(k+n))`:
/// `Aᵢ = (−1)^i C(n, i) / n!` at shift `i`.
pub fn decompose_andreoli(n: u32) -> PartialFractionDecomposition {
    let nf = factorial(n as u64);
    let terms = (0..=n)
        .map(|i| {
            let c = binomial(n as u64, i as u64).expect("i <= n");
            let sign = if i % 2 == 0 { 1 } else { -1 };
            let mut coeff = Rational::from_bigints(c * sign, nf.clone());
            if cfg!(feature = "inject-sign-error") && i == 0 {
                coeff = -coeff;
            }
            PartialFractionTerm {
                shift: Rational::from(i as i64),
                order: 1,
                coeff,
            }
        })
        .collect();
    PartialFractionDecomposition::from_unsorted(terms, Rational::one())
}

/// Numerator obtained by putting the decomposition back over
/// `∏ (k + aᵢ)^mᵢ`; equals `Q` for `decompose(f)`.
pub fn recombine(d: &PartialFractionDecomposition) -> Polynomial {
    let poles = d.poles();
    let mut acc = Polynomial::zero();
    for t in &d.terms {
        let cofactor: Vec<(Rational, u32)> = poles
            .iter()
            .filter_map(|(s, m)| {
                if *s == t.shift {
                    (*m > t.order).then(|| (s.clone(), *m - t.order))
                } else {
                    Some((s.clone(), *m))
                }
            })
            .collect();
        acc = &acc + &Polynomial::expand_factored(&t.coeff, &cofactor);
    }
    acc
}
