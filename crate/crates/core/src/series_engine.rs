//! Series evaluation by four independent routes: exact closed forms for the
//! known families, the polygamma formula applied to a partial-fraction table,
//! quadrature of the Laplace-transformed integrand, and brute-force partial
//! sums with certified tails.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_arith::{factorial, multifactorial, Rational};
use crate::oracle::{partial_sum, tail_bound, OracleError};
use crate::partial_fractions::{
    decompose, FactoredError, FactoredRational, LinearFactor, PartialFractionDecomposition,
};
use crate::polynomials::{Degree, Polynomial};
use crate::quadrature::{integrate_unit_interval, integrate_unit_interval_split, QuadratureError};
use crate::special_functions::{polygamma, SpecialFunctionError};

/// Work limit for exact oracle runs, in summed terms.
pub const MAX_ORACLE_TERMS: u64 = 1_000_000;
/// Cutoff cap when the partial sums do not telescope (their exact
/// denominators then grow like lcm(1..K)).
pub const MAX_NON_TELESCOPING_TERMS: u64 = 16_384;
/// Cutoff used by the automatic oracle cross-check.
pub const CROSS_CHECK_TERMS: u64 = 2_000;
/// Tightest tolerance passed to the quadrature; below it rounding dominates.
pub const QUADRATURE_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("invalid series: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Factored(#[from] FactoredError),
    #[error("method `{method}` does not apply to {kind}")]
    MethodInapplicable { method: Method, kind: &'static str },
    #[error("no closed form matches this series")]
    NoClosedForm,
    #[error("simple-pole coefficients sum to {0}, not zero; the series diverges")]
    SimplePoleSum(Rational),
    #[error(transparent)]
    SpecialFunction(#[from] SpecialFunctionError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{what}: {first} and {second} differ by {diff:e}, beyond the combined bound {bound:e}")]
    Inconsistent {
        what: &'static str,
        first: f64,
        second: f64,
        diff: f64,
        bound: f64,
    },
    #[error("terms do not decay: {0}")]
    Divergent(String),
}

/// Evaluation route requested by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Auto,
    Closed,
    Polygamma,
    Integral,
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Auto => "auto",
            Method::Closed => "closed",
            Method::Polygamma => "polygamma",
            Method::Integral => "integral",
            Method::Oracle => "oracle",
        })
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Method::Auto),
            "closed" => Ok(Method::Closed),
            "polygamma" => Ok(Method::Polygamma),
            "integral" => Ok(Method::Integral),
            "oracle" => Ok(Method::Oracle),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

/// Route that actually produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodTag {
    ClosedForm,
    Polygamma,
    Integral,
    Oracle,
    AlternatingSeries,
}

impl fmt::Display for MethodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodTag::ClosedForm => "closed_form",
            MethodTag::Polygamma => "polygamma",
            MethodTag::Integral => "integral",
            MethodTag::Oracle => "oracle",
            MethodTag::AlternatingSeries => "alternating_series",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    pub exact: Option<Rational>,
    pub numeric: f64,
    /// Absolute bound on `|numeric − true value|`.
    pub error_bound: f64,
    pub method: MethodTag,
}

impl EvalResult {
    pub fn from_exact(exact: Rational, method: MethodTag) -> Self {
        let numeric = exact.to_f64();
        EvalResult {
            error_bound: numeric.abs() * f64::EPSILON,
            numeric,
            exact: Some(exact),
            method,
        }
    }

    fn numeric(numeric: f64, error_bound: f64, method: MethodTag) -> Self {
        EvalResult {
            exact: None,
            numeric,
            error_bound,
            method,
        }
    }
}

/// A series to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesSpec {
    /// `Σ_{k >= start} Q(k)/P(k)`.
    GeneralRational { term: FactoredRational, start: u64 },
    /// `Σ_{k>=1} 1/(k(k+1)···(k+n))`.
    AndreoliFamily { n: u32 },
    /// `Σ_{k>=1} 1/([a+kb][a+(k+1)b]···[a+(k+n)b])`.
    ArithmeticFamily { a: Rational, b: Rational, n: u32 },
    /// `Σ_{k>=1} 1/(k(k+ℓ)···(k+nℓ))`.
    StepFamily { step: u32, n: u32 },
    /// `F(x; ℓ) = Σ_{n>=0} 1/(x(x+ℓ)···(x+nℓ))`.
    OverNFamily { x: f64, step: u32 },
    /// `Σ_{n>=0} 1/([a+xb][a+(x+ℓ)b]···[a+(x+nℓ)b])`.
    ConclusionOverN { a: Rational, b: Rational, x: f64, step: u32 },
    /// `Σ_{k>=1} 1/([a+kb][a+(k+ℓ)b]···[a+(k+nℓ)b])`.
    ConclusionOverK { a: Rational, b: Rational, n: u32, step: u32 },
}

impl SeriesSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SeriesSpec::GeneralRational { .. } => "a general rational series",
            SeriesSpec::AndreoliFamily { .. } => "the Andreoli family",
            SeriesSpec::ArithmeticFamily { .. } => "the arithmetic family",
            SeriesSpec::StepFamily { .. } => "the step family",
            SeriesSpec::OverNFamily { .. } => "the over-n family",
            SeriesSpec::ConclusionOverN { .. } => "the two-parameter over-n family",
            SeriesSpec::ConclusionOverK { .. } => "the two-parameter over-k family",
        }
    }

    /// Checks the preconditions of each variant.
    pub fn validate(&self) -> Result<(), EvalError> {
        match self {
            SeriesSpec::GeneralRational { term, start } => {
                if *start == 0 {
                    return Err(EvalError::InvalidSpec("start index must be >= 1".into()));
                }
                term.check_start(*start)?;
            }
            SeriesSpec::AndreoliFamily { n } => positive("n", *n)?,
            SeriesSpec::ArithmeticFamily { a, b, n } => {
                positive("n", *n)?;
                if !b.is_positive() {
                    return Err(EvalError::InvalidSpec(format!("b must be > 0, got {b}")));
                }
                if !(a + b).is_positive() {
                    return Err(EvalError::InvalidSpec(format!(
                        "a + b must be > 0 so every factor a + kb is positive, got a = {a}, b = {b}"
                    )));
                }
            }
            SeriesSpec::StepFamily { step, n } => {
                positive("step", *step)?;
                positive("n", *n)?;
            }
            SeriesSpec::OverNFamily { x, step } => {
                positive("step", *step)?;
                if !(*x > 0.0) || !x.is_finite() {
                    return Err(EvalError::InvalidSpec(format!("x must be > 0, got {x}")));
                }
            }
            SeriesSpec::ConclusionOverN { b, x, step, .. } => {
                positive("step", *step)?;
                if !b.is_positive() {
                    return Err(EvalError::InvalidSpec(format!("b must be > 0, got {b}")));
                }
                if !x.is_finite() {
                    return Err(EvalError::InvalidSpec(format!("x must be finite, got {x}")));
                }
            }
            SeriesSpec::ConclusionOverK { b, n, step, .. } => {
                positive("step", *step)?;
                positive("n", *n)?;
                if !b.is_positive() {
                    return Err(EvalError::InvalidSpec(format!("b must be > 0, got {b}")));
                }
                self.to_factored().expect("over-k is rational")?.0.check_start(1)?;
            }
        }
        Ok(())
    }

    /// The rational term and start index, for variants summed over `k`.
    pub fn to_factored(&self) -> Option<Result<(FactoredRational, u64), EvalError>> {
        let arithmetic = |a: &Rational, b: &Rational, n: u32, step: u32| {
            // [a + (k + iℓ) b] = b (k + iℓ + a/b)
            let ratio = a / b;
            let factors = (0..=n as i64)
                .map(|i| LinearFactor::new(Rational::from(i * step as i64) + &ratio, 1))
                .collect();
            FactoredRational::new(Polynomial::one(), b.pow(n as i32 + 1), factors)
                .map(|f| (f, 1))
                .map_err(EvalError::from)
        };
        Some(match self {
            SeriesSpec::GeneralRational { term, start } => Ok((term.clone(), *start)),
            SeriesSpec::AndreoliFamily { n } => Ok((FactoredRational::andreoli(*n), 1)),
            SeriesSpec::ArithmeticFamily { a, b, n } => arithmetic(a, b, *n, 1),
            SeriesSpec::StepFamily { step, n } => arithmetic(&Rational::zero(), &Rational::one(), *n, *step),
            SeriesSpec::ConclusionOverK { a, b, n, step } => arithmetic(a, b, *n, *step),
            SeriesSpec::OverNFamily { .. } | SeriesSpec::ConclusionOverN { .. } => return None,
        })
    }
}

fn positive(name: &str, v: u32) -> Result<(), EvalError> {
    if v == 0 {
        Err(EvalError::InvalidSpec(format!("{name} must be >= 1")))
    } else {
        Ok(())
    }
}

impl fmt::Display for SeriesSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesSpec::GeneralRational { term, start } if *start == 1 => write!(f, "{term}"),
            SeriesSpec::GeneralRational { term, start } => write!(f, "{term} from k={start}"),
            SeriesSpec::AndreoliFamily { n } => write!(f, "andreoli n={n}"),
            SeriesSpec::ArithmeticFamily { a, b, n } => write!(f, "arith a={a} b={b} n={n}"),
            SeriesSpec::StepFamily { step, n } => write!(f, "step l={step} n={n}"),
            SeriesSpec::OverNFamily { x, step } => write!(f, "overn x={x} l={step}"),
            SeriesSpec::ConclusionOverN { a, b, x, step } => {
                write!(f, "conclusion-over-n a={a} b={b} x={x} l={step}")
            }
            SeriesSpec::ConclusionOverK { a, b, n, step } => {
                write!(f, "conclusion-over-k a={a} b={b} n={n} l={step}")
            }
        }
    }
}

/// `1/(n·n!)`.
pub fn closed_form_andreoli(n: u32) -> Rational {
    assert!(n >= 1, "andreoli family needs n >= 1");
    Rational::from_bigints(BigInt::from(1), factorial(n as u64) * n)
}

/// `(1/(n b)) ∏_{i=1}^{n} 1/(a + i b)`.
pub fn closed_form_arithmetic(a: &Rational, b: &Rational, n: u32) -> Result<Rational, EvalError> {
    positive("n", n)?;
    if !b.is_positive() {
        return Err(EvalError::InvalidSpec(format!("b must be > 0, got {b}")));
    }
    if !(a + b).is_positive() {
        return Err(EvalError::InvalidSpec(format!("a + b must be > 0, got a = {a}, b = {b}")));
    }
    let mut out = (Rational::from(n as i64) * b).recip();
    for i in 1..=n as i64 {
        let factor = a + Rational::from(i) * b;
        if factor.is_zero() {
            return Err(EvalError::InvalidSpec(format!("factor a + {i}b vanishes")));
        }
        out = out / factor;
    }
    Ok(out)
}

/// `(1/(ℓn)) Σ_{m=0}^{ℓ−1} 1/(ℓn − m)!^ℓ`, with `!^ℓ` the step-ℓ multifactorial.
pub fn closed_form_step(step: u32, n: u32) -> Rational {
    assert!(step >= 1 && n >= 1, "step family needs step >= 1 and n >= 1");
    let ln = step as u64 * n as u64;
    let sum: Rational = (0..step as u64)
        .map(|m| Rational::from_bigints(BigInt::from(1), multifactorial(ln - m, step as u64)))
        .sum();
    sum / Rational::from(ln as i64)
}

/// Exact value of `Σ_{k >= start} Q(k)/P(k)` when the term is a constant
/// multiple of an Andreoli, arithmetic or step family member, possibly with
/// its index shifted.
pub fn match_family(term: &FactoredRational, start: u64) -> Option<Rational> {
    let q = term.numerator();
    if q.is_zero() {
        return Some(Rational::zero());
    }
    if q.degree() != Degree::Finite(0) || term.factors().iter().any(|f| f.multiplicity != 1) {
        return None;
    }
    let mut shifts: Vec<Rational> = term.factors().iter().map(|f| f.shift.clone()).collect();
    shifts.sort();
    if shifts.len() < 2 {
        return None;
    }
    let gap = &shifts[1] - &shifts[0];
    if !gap.is_integer() || shifts.windows(2).any(|w| &w[1] - &w[0] != gap) {
        return None;
    }
    let step = gap.numer().to_u32()?;
    let n = shifts.len() as u32 - 1;
    let scale = q.coeff(0) / term.leading();
    // Σ_{k>=1} 1/∏(k + c + iℓ) with c the effective first shift
    let mut c = &shifts[0] + Rational::from(start as i64 - 1);
    let family = |c: &Rational| -> Rational {
        (0..=n as i64)
            .map(|i| Rational::from(i * step as i64) + c)
            .product()
    };
    let mut prefix = Rational::zero();
    if step == 1 {
        // peel off leading terms until every factor is positive
        while !(&c + Rational::one()).is_positive() {
            c = &c + Rational::one();
            let denom = family(&c);
            if denom.is_zero() {
                return None;
            }
            prefix += denom.recip();
        }
        let value = closed_form_arithmetic(&c, &Rational::one(), n).ok()?;
        return Some((prefix + value) * scale);
    }
    if !c.is_integer() || c.is_negative() {
        return None;
    }
    let skip = c.numer().to_i64()?;
    let head: Rational = (1..=skip)
        .map(|k| family(&Rational::from(k)).recip())
        .sum();
    Some((closed_form_step(step, n) - head) * scale)
}

/// Decomposition re-indexed so the sum runs over `k >= 1` with every shift
/// above −1, plus the exact value of the terms skipped to get there.
struct ShiftedTail {
    decomposition: PartialFractionDecomposition,
    prefix: Rational,
}

fn shift_to_admissible(d: &PartialFractionDecomposition, start: u64) -> Result<ShiftedTail, EvalError> {
    if start == 0 {
        return Err(EvalError::InvalidSpec("start index must be >= 1".into()));
    }
    let sum = d.simple_pole_sum();
    if !sum.is_zero() {
        return Err(EvalError::SimplePoleSum(sum));
    }
    // smallest s >= start with aᵢ + s > 0 for every i
    let mut first = start;
    for (shift, _) in d.poles() {
        let need: BigInt = (-&shift).floor() + 1;
        if need > BigInt::from(first) {
            first = need.to_u64().ok_or_else(|| EvalError::InvalidSpec("shift too large".into()))?;
        }
    }
    let mut prefix = Rational::zero();
    for k in start..first {
        let term = d.eval(&Rational::from(k as i64)).ok_or_else(|| {
            EvalError::InvalidSpec(format!("pole at k = {k} inside the summation range"))
        })?;
        prefix += term;
    }
    Ok(ShiftedTail {
        decomposition: d.shifted(&Rational::from(first as i64 - 1)),
        prefix,
    })
}

/// Σ_{k>=start} via `Σ_{k>=1} 1/(k+a)^j = (−1)^j ψ^{(j−1)}(1+a)/(j−1)!` for
/// `j >= 2` and `Σᵢ Aᵢ₁ Σ_k 1/(k+aᵢ) = −Σᵢ Aᵢ₁ ψ(1+aᵢ)`.
pub fn closed_form_polygamma(d: &PartialFractionDecomposition, start: u64) -> Result<EvalResult, EvalError> {
    let ShiftedTail { decomposition, prefix } = shift_to_admissible(d, start)?;
    let lead = decomposition.leading.to_f64();
    let mut sum = 0.0;
    let mut bound = 0.0;
    for t in &decomposition.terms {
        if t.coeff.is_zero() {
            continue;
        }
        let arg = 1.0 + t.shift.to_f64();
        let coeff = t.coeff.to_f64() / lead;
        let value = if t.order == 1 {
            -polygamma(0, arg)?
        } else {
            let m = t.order - 1;
            let sign = if t.order % 2 == 0 { 1.0 } else { -1.0 };
            sign * polygamma(m, arg)? / factorial_f64(m)
        };
        sum += coeff * value;
        // 1e-12 relative from ψ⁽ᵐ⁾, plus the rounding of coeff and arg
        bound += (coeff * value).abs() * 1e-12 + coeff.abs() * 1e-14;
    }
    let p = prefix.to_f64();
    let numeric = p + sum;
    bound += (numeric.abs() + p.abs() + sum.abs()) * f64::EPSILON;
    Ok(EvalResult::numeric(numeric, bound, MethodTag::Polygamma))
}

fn factorial_f64(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Σ_{k>=start} by quadrature of
/// `∫₀¹ [Σᵢⱼ Aᵢⱼ (−ln u)^{j−1}/(j−1)! · u^{aᵢ}] / (1−u) du`,
/// with the `j = 1` terms grouped as `Σᵢ Aᵢ₁ (u^{aᵢ} − 1)/(1−u)` so the
/// singularity at `u = 1` cancels.
pub fn integral_eval(
    d: &PartialFractionDecomposition,
    start: u64,
    tolerance: f64,
) -> Result<EvalResult, EvalError> {
    let ShiftedTail { decomposition, prefix } = shift_to_admissible(d, start)?;
    let lead = decomposition.leading.to_f64();
    let simple: Vec<(f64, f64)> = decomposition
        .terms
        .iter()
        .filter(|t| t.order == 1 && !t.coeff.is_zero())
        .map(|t| (t.coeff.to_f64() / lead, t.shift.to_f64()))
        .collect();
    let higher: Vec<(f64, f64, i32)> = decomposition
        .terms
        .iter()
        .filter(|t| t.order >= 2 && !t.coeff.is_zero())
        .map(|t| {
            let j = t.order;
            (t.coeff.to_f64() / lead / factorial_f64(j - 1), t.shift.to_f64(), j as i32 - 1)
        })
        .collect();
    let integrand = |u: f64, v: f64| -> f64 {
        // ln u without cancellation near u = 1
        let ln_u = if u > 0.5 { (-v).ln_1p() } else { u.ln() };
        let mut acc = 0.0;
        for &(c, a) in &simple {
            acc += c * (a * ln_u).exp_m1();
        }
        let mut high = 0.0;
        for &(c, a, p) in &higher {
            high += c * (-ln_u).powi(p) * (a * ln_u).exp();
        }
        (acc + high) / v
    };
    let quad = integrate_unit_interval_split(integrand, tolerance.max(QUADRATURE_FLOOR))?;
    let p = prefix.to_f64();
    let numeric = p + quad.value;
    let bound = quad.error_estimate + (numeric.abs() + p.abs()) * f64::EPSILON;
    Ok(EvalResult::numeric(numeric, bound, MethodTag::Integral))
}

/// Both representations of `F(x; ℓ)`: quadrature of
/// `e^{1/ℓ} ∫₀¹ u^{x−1} e^{−u^ℓ/ℓ} du`, and the alternating series
/// `e^{1/ℓ} Σ_m (−1)^m / (ℓ^m m! (x + mℓ))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverNEvaluation {
    pub series: EvalResult,
    pub integral: EvalResult,
    pub terms: usize,
}

/// `F(x; ℓ)` from the alternating series, truncated by the Leibniz bound and
/// cross-checked against the integral representation.
pub fn over_n_eval(x: f64, step: u32, tolerance: f64) -> Result<EvalResult, EvalError> {
    Ok(over_n_both(x, step, tolerance)?.series)
}

pub fn over_n_both(x: f64, step: u32, tolerance: f64) -> Result<OverNEvaluation, EvalError> {
    SeriesSpec::OverNFamily { x, step }.validate()?;
    if !(tolerance > 0.0) {
        return Err(EvalError::InvalidSpec(format!("tolerance must be > 0, got {tolerance}")));
    }
    let l = step as f64;
    let scale = (1.0 / l).exp();

    let quad = integrate_unit_interval(
        |u| u.powf(x - 1.0) * (-u.powi(step as i32) / l).exp(),
        (0.5 * tolerance / scale).max(QUADRATURE_FLOOR),
    )?;
    let integral = EvalResult::numeric(
        scale * quad.value,
        scale * quad.error_estimate + 2.0 * f64::EPSILON * (scale * quad.value).abs(),
        MethodTag::Integral,
    );

    // c_m = 1/(ℓ^m m!)
    let mut coeff = 1.0f64;
    let mut sum = 0.0f64;
    let mut abs_sum = 0.0f64;
    let mut m = 0usize;
    let omitted = loop {
        let term = coeff / (x + m as f64 * l);
        if scale * term <= 0.5 * tolerance && m > 0 {
            break term;
        }
        let signed = if m.is_multiple_of(2) { term } else { -term };
        sum += signed;
        abs_sum += term;
        coeff /= l * (m as f64 + 1.0);
        m += 1;
    };
    let rounding = 4.0 * (m as f64 + 2.0) * f64::EPSILON * abs_sum * scale;
    let series = EvalResult::numeric(scale * sum, scale * omitted + rounding, MethodTag::AlternatingSeries);

    let diff = (series.numeric - integral.numeric).abs();
    let combined = series.error_bound + integral.error_bound;
    if diff > combined {
        return Err(EvalError::Inconsistent {
            what: "over-n series and integral representations",
            first: series.numeric,
            second: integral.numeric,
            diff,
            bound: combined,
        });
    }
    Ok(OverNEvaluation {
        series,
        integral,
        terms: m,
    })
}

/// Direct summation of the two-parameter families with an explicit
/// remainder bound; no closed form is attempted.
pub fn conclusion_eval(spec: &SeriesSpec, tolerance: f64) -> Result<EvalResult, EvalError> {
    spec.validate()?;
    if !(tolerance > 0.0) {
        return Err(EvalError::InvalidSpec(format!("tolerance must be > 0, got {tolerance}")));
    }
    match spec {
        SeriesSpec::ConclusionOverN { a, b, x, step } => {
            direct_over_n(a.to_f64(), b.to_f64(), *x, *step as f64, tolerance)
        }
        SeriesSpec::ConclusionOverK { .. } => {
            let (term, start) = spec.to_factored().expect("rational")?;
            oracle_eval(&term, start, tolerance, MAX_ORACLE_TERMS)
        }
        other => Err(EvalError::MethodInapplicable {
            method: Method::Oracle,
            kind: other.kind(),
        }),
    }
}

/// `Σ_{n>=0} ∏_{i=0}^{n} 1/dᵢ` with `dᵢ = a + (x + iℓ) b`. Once `d_{N+2} >= 2`
/// every later ratio is at most `1/d_{N+2}`, so the tail after term `N` is
/// at most `|t_{N+1}| / (1 − 1/d_{N+2})`.
fn direct_over_n(a: f64, b: f64, x: f64, l: f64, tolerance: f64) -> Result<EvalResult, EvalError> {
    let denom = |i: usize| a + (x + i as f64 * l) * b;
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    for n in 0..MAX_ORACLE_TERMS as usize {
        let d = denom(n);
        if d == 0.0 || !d.is_finite() {
            return Err(EvalError::InvalidSpec(format!("factor {n} of the product vanishes")));
        }
        term /= d;
        sum += term;
        abs_sum += term.abs();
        let next = term / denom(n + 1);
        let after = denom(n + 2);
        if after >= 2.0 && denom(n + 1) > 0.0 {
            let tail = next.abs() / (1.0 - 1.0 / after);
            let rounding = 2.0 * (n as f64 + 2.0) * f64::EPSILON * abs_sum;
            if tail + rounding <= tolerance || tail == 0.0 {
                return Ok(EvalResult::numeric(sum, tail + rounding, MethodTag::Oracle));
            }
        }
    }
    Err(EvalError::Divergent(format!(
        "term ratio still not below 1/2 after {MAX_ORACLE_TERMS} terms"
    )))
}

/// True when every exact partial sum collapses to a few boundary terms:
/// simple poles only, and the coefficients within each residue class of the
/// shifts modulo 1 sum to zero.
pub fn is_telescoping(d: &PartialFractionDecomposition) -> bool {
    if d.max_order() > 1 {
        return false;
    }
    let mut classes: Vec<(Rational, Rational)> = Vec::new();
    for t in &d.terms {
        let frac = &t.shift - Rational::from(t.shift.floor());
        match classes.iter_mut().find(|(c, _)| *c == frac) {
            Some((_, s)) => *s += &t.coeff,
            None => classes.push((frac, t.coeff.clone())),
        }
    }
    classes.iter().all(|(_, s)| s.is_zero())
}

/// Exact partial sum to the smallest power-of-two-scaled cutoff whose tail
/// bound meets the tolerance, capped at `max_terms` (and lower still for
/// non-telescoping terms). The bound reported is the tail bound actually
/// achieved, which may exceed the tolerance when the cap binds.
pub fn oracle_eval(
    term: &FactoredRational,
    start: u64,
    tolerance: f64,
    max_terms: u64,
) -> Result<EvalResult, EvalError> {
    term.check_start(start)?;
    let cap = if is_telescoping(&decompose(term)) {
        max_terms
    } else {
        max_terms.min(MAX_NON_TELESCOPING_TERMS)
    };
    let tol = Rational::from_f64(tolerance).unwrap_or_else(Rational::zero);
    let mut cutoff = (start + 999).min(start + cap - 1);
    let mut tail = tail_bound(term, cutoff)?;
    while tail.bound > tol && cutoff - start + 1 < cap {
        let next = (cutoff * 4).min(start + cap - 1);
        tail = tail_bound(term, next)?;
        cutoff = next;
    }
    let sum = partial_sum(term, start, cutoff)?;
    let numeric = sum.to_f64();
    let bound = tail.bound.to_f64() * (1.0 + 4.0 * f64::EPSILON) + numeric.abs() * f64::EPSILON;
    Ok(EvalResult::numeric(numeric, bound, MethodTag::Oracle))
}

/// Evaluates `spec` by the requested route. `Auto` prefers an exact closed
/// form, falls back to the polygamma formula, and cross-checks either one
/// against an exact partial sum with its tail bound.
pub fn evaluate(spec: &SeriesSpec, method: Method, tolerance: f64) -> Result<EvalResult, EvalError> {
    spec.validate()?;
    if !(tolerance > 0.0) || !tolerance.is_finite() {
        return Err(EvalError::InvalidSpec(format!("tolerance must be > 0, got {tolerance}")));
    }
    let inapplicable = || EvalError::MethodInapplicable {
        method,
        kind: spec.kind(),
    };
    match spec {
        SeriesSpec::OverNFamily { x, step } => match method {
            Method::Auto => over_n_eval(*x, *step, tolerance),
            Method::Integral => Ok(over_n_both(*x, *step, tolerance)?.integral),
            Method::Oracle => direct_over_n(0.0, 1.0, *x, *step as f64, tolerance),
            Method::Closed | Method::Polygamma => Err(inapplicable()),
        },
        SeriesSpec::ConclusionOverN { .. } => match method {
            Method::Auto | Method::Oracle => conclusion_eval(spec, tolerance),
            _ => Err(inapplicable()),
        },
        SeriesSpec::ConclusionOverK { .. } if method == Method::Closed => Err(inapplicable()),
        SeriesSpec::ConclusionOverK { .. } if method == Method::Auto => conclusion_eval(spec, tolerance),
        _ => {
            let (term, start) = spec.to_factored().expect("rational series")?;
            match method {
                Method::Closed => closed(spec, &term, start)
                    .map(|e| EvalResult::from_exact(e, MethodTag::ClosedForm))
                    .ok_or(EvalError::NoClosedForm),
                Method::Polygamma => closed_form_polygamma(&decompose(&term), start),
                Method::Integral => integral_eval(&decompose(&term), start, tolerance),
                Method::Oracle => oracle_eval(&term, start, tolerance, MAX_ORACLE_TERMS),
                Method::Auto => {
                    let result = match closed(spec, &term, start) {
                        Some(e) => EvalResult::from_exact(e, MethodTag::ClosedForm),
                        None => closed_form_polygamma(&decompose(&term), start)?,
                    };
                    cross_check(&result, &term, start)?;
                    Ok(result)
                }
            }
        }
    }
}

fn closed(spec: &SeriesSpec, term: &FactoredRational, start: u64) -> Option<Rational> {
    match spec {
        SeriesSpec::AndreoliFamily { n } => Some(closed_form_andreoli(*n)),
        SeriesSpec::ArithmeticFamily { a, b, n } => closed_form_arithmetic(a, b, *n).ok(),
        SeriesSpec::StepFamily { step, n } => Some(closed_form_step(*step, *n)),
        _ => match_family(term, start),
    }
}

fn cross_check(result: &EvalResult, term: &FactoredRational, start: u64) -> Result<(), EvalError> {
    let cutoff = start + CROSS_CHECK_TERMS - 1;
    let partial = partial_sum(term, start, cutoff)?;
    let tail = tail_bound(term, cutoff)?.bound;
    let diff = match &result.exact {
        Some(exact) => (exact - &partial).abs().to_f64(),
        None => (result.numeric - partial.to_f64()).abs(),
    };
    let bound = tail.to_f64() + result.error_bound + 4.0 * f64::EPSILON * result.numeric.abs();
    if diff > bound {
        return Err(EvalError::Inconsistent {
            what: "oracle cross-check",
            first: result.numeric,
            second: partial.to_f64(),
            diff,
            bound,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partial_fractions::decompose_andreoli;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn general(q: &[i64], lead: Rational, factors: &[(Rational, u32)]) -> FactoredRational {
        FactoredRational::new(
            Polynomial::from_i64s(q),
            lead,
            factors.iter().map(|(s, m)| LinearFactor::new(s.clone(), *m)).collect(),
        )
        .unwrap()
    }

    /// 2 − π²/6, from Σ 1/k − 1/(k+1) = 1 and Σ 1/(k+1)² = π²/6 − 1.
    const REPEATED_ROOT_VALUE: f64 = 0.355_065_933_151_773_56;

    #[test]
    fn andreoli_closed_forms() {
        assert_eq!(closed_form_andreoli(1), r(1, 1));
        assert_eq!(closed_form_andreoli(2), r(1, 4));
        assert_eq!(closed_form_andreoli(3), r(1, 18));
        assert_eq!(closed_form_andreoli(5), r(1, 600));
    }

    #[test]
    fn arithmetic_closed_forms() {
        assert_eq!(closed_form_arithmetic(&r(0, 1), &r(1, 1), 3).unwrap(), r(1, 18));
        assert_eq!(closed_form_arithmetic(&r(1, 1), &r(2, 1), 1).unwrap(), r(1, 6));
        assert_eq!(closed_form_arithmetic(&r(1, 2), &r(1, 1), 2).unwrap(), r(2, 15));
        assert!(closed_form_arithmetic(&r(-1, 1), &r(1, 1), 2).is_err());
        assert!(closed_form_arithmetic(&r(1, 1), &r(-1, 1), 2).is_err());
        for n in 1..=8 {
            assert_eq!(closed_form_arithmetic(&r(0, 1), &r(1, 1), n).unwrap(), closed_form_andreoli(n));
        }
    }

    #[test]
    fn step_closed_forms() {
        for n in 1..=8 {
            assert_eq!(closed_form_step(1, n), closed_form_andreoli(n));
        }
        assert_eq!(closed_form_step(2, 1), r(3, 4));
        assert_eq!(closed_form_step(2, 2), r(11, 96));
        assert_eq!(closed_form_step(2, 3), r(7, 480));
        assert_eq!(closed_form_step(3, 1), r(11, 18));
    }

    #[test]
    fn polygamma_route() {
        let res = closed_form_polygamma(&decompose_andreoli(2), 1).unwrap();
        assert!((res.numeric - 0.25).abs() <= 1e-11);
        let f = general(&[1], r(1, 1), &[(r(0, 1), 1), (r(1, 1), 2)]);
        let res = closed_form_polygamma(&decompose(&f), 1).unwrap();
        assert!((res.numeric - REPEATED_ROOT_VALUE).abs() <= 1e-12);
        let f = general(&[1], r(1, 1), &[(r(0, 1), 1), (r(2, 1), 1)]);
        let res = closed_form_polygamma(&decompose(&f), 1).unwrap();
        assert!((res.numeric - 0.75).abs() <= 1e-11);
    }

    #[test]
    fn integral_route() {
        let res = integral_eval(&decompose_andreoli(1), 1, 1e-12).unwrap();
        assert!((res.numeric - 1.0).abs() <= 1e-12);
        let res = integral_eval(&decompose_andreoli(4), 1, 1e-12).unwrap();
        assert!((res.numeric - 1.0 / 96.0).abs() <= 1e-12);
        let f = general(&[1], r(1, 1), &[(r(0, 1), 1), (r(1, 1), 2)]);
        let res = integral_eval(&decompose(&f), 1, 1e-12).unwrap();
        assert!((res.numeric - REPEATED_ROOT_VALUE).abs() <= 1e-11, "{res:?}");
    }

    #[test]
    fn index_shifting_for_negative_shifts() {
        // Σ_{k>=3} 1/((k-2)(k-1)) = Σ_{j>=1} 1/(j(j+1)) = 1
        let f = general(&[1], r(1, 1), &[(r(-2, 1), 1), (r(-1, 1), 1)]);
        let d = decompose(&f);
        for res in [closed_form_polygamma(&d, 3).unwrap(), integral_eval(&d, 3, 1e-12).unwrap()] {
            assert!((res.numeric - 1.0).abs() <= 1e-11, "{res:?}");
        }
        // 1/((2k−3)(2k−1)) summed from k = 1: first term is 1/((−1)(1)) = −1,
        // then Σ_{k>=2} telescopes to 1/2 · 1/1 = 1/2
        let g = general(&[1], r(4, 1), &[(r(-3, 2), 1), (r(-1, 2), 1)]);
        let d = decompose(&g);
        for res in [closed_form_polygamma(&d, 1).unwrap(), integral_eval(&d, 1, 1e-12).unwrap()] {
            assert!((res.numeric + 0.5).abs() <= 1e-11, "{res:?}");
        }
        assert_eq!(match_family(&g, 1), Some(r(-1, 2)));
    }

    #[test]
    fn over_n_values() {
        use std::f64::consts::E;
        let v = over_n_eval(1.0, 1, 1e-13).unwrap();
        assert!((v.numeric - (E - 1.0)).abs() <= 1e-12);
        let v = over_n_eval(2.0, 1, 1e-13).unwrap();
        assert!((v.numeric - (E - 2.0)).abs() <= 1e-12);
        // direct partial sums Σ 1/(1·3·5···(2n+1)), 30 terms
        let mut direct = 0.0;
        let mut prod = 1.0;
        for n in 0..30 {
            prod *= 2.0 * n as f64 + 1.0;
            direct += 1.0 / prod;
        }
        let v = over_n_eval(1.0, 2, 1e-13).unwrap();
        assert!((v.numeric - direct).abs() <= 1e-13);
        assert!((v.numeric - 1.410_686).abs() < 1e-6);
        assert!(over_n_eval(0.0, 1, 1e-12).is_err());
        assert!(over_n_eval(1.0, 0, 1e-12).is_err());
    }

    #[test]
    fn conclusion_reductions() {
        let over_n = conclusion_eval(
            &SeriesSpec::ConclusionOverN { a: r(0, 1), b: r(1, 1), x: 1.5, step: 2 },
            1e-13,
        )
        .unwrap();
        let f = over_n_eval(1.5, 2, 1e-13).unwrap();
        assert!((over_n.numeric - f.numeric).abs() <= over_n.error_bound + f.error_bound);

        let over_k = conclusion_eval(
            &SeriesSpec::ConclusionOverK { a: r(1, 1), b: r(2, 1), n: 1, step: 1 },
            1e-9,
        )
        .unwrap();
        assert!((over_k.numeric - 1.0 / 6.0).abs() <= over_k.error_bound);
        assert!(over_k.error_bound < 1e-5);
    }

    #[test]
    fn evaluate_dispatch() {
        let res = evaluate(&SeriesSpec::AndreoliFamily { n: 5 }, Method::Auto, 1e-12).unwrap();
        assert_eq!(res.exact, Some(r(1, 600)));
        assert_eq!(res.method, MethodTag::ClosedForm);

        let f = general(&[1], r(1, 1), &[(r(0, 1), 1), (r(1, 1), 2)]);
        let spec = SeriesSpec::GeneralRational { term: f, start: 1 };
        assert_eq!(evaluate(&spec, Method::Closed, 1e-12), Err(EvalError::NoClosedForm));
        let res = evaluate(&spec, Method::Auto, 1e-12).unwrap();
        assert_eq!(res.method, MethodTag::Polygamma);

        let res = evaluate(&SeriesSpec::StepFamily { step: 2, n: 3 }, Method::Auto, 1e-12).unwrap();
        assert_eq!(res.exact, Some(r(7, 480)));

        assert!(matches!(
            evaluate(&SeriesSpec::OverNFamily { x: 1.0, step: 1 }, Method::Closed, 1e-12),
            Err(EvalError::MethodInapplicable { .. })
        ));
    }

    #[test]
    fn family_matching_on_general_terms() {
        // 1/((2k+1)(2k+3)) = (1/4)/((k+1/2)(k+3/2)) -> arith a=1, b=2, n=1 -> 1/6
        let f = general(&[1], r(4, 1), &[(r(1, 2), 1), (r(3, 2), 1)]);
        assert_eq!(match_family(&f, 1), Some(r(1, 6)));
        // 1/(k(k+2)(k+4)) -> step 2, n 2
        let f = general(&[1], r(1, 1), &[(r(0, 1), 1), (r(2, 1), 1), (r(4, 1), 1)]);
        assert_eq!(match_family(&f, 1), Some(r(11, 96)));
        // same from k = 2 drops the first term 1/15
        assert_eq!(match_family(&f, 2), Some(r(11, 96) - r(1, 15)));
        // 3/((k+2)(k+5)): step 3 with c = 2 -> 3·(11/18 − 1/4 − 1/10)
        let f = general(&[3], r(1, 1), &[(r(2, 1), 1), (r(5, 1), 1)]);
        assert_eq!(match_family(&f, 1), Some((r(11, 18) - r(1, 4) - r(1, 10)) * r(3, 1)));
        // repeated root: no family
        let f = general(&[1], r(1, 1), &[(r(0, 1), 1), (r(1, 1), 2)]);
        assert_eq!(match_family(&f, 1), None);
    }

    #[test]
    fn telescoping_detection() {
        assert!(is_telescoping(&decompose_andreoli(4)));
        let f = general(&[1], r(1, 1), &[(r(0, 1), 1), (r(1, 1), 2)]);
        assert!(!is_telescoping(&decompose(&f)));
        let f = general(&[1], r(1, 1), &[(r(0, 1), 1), (r(1, 2), 1)]);
        assert!(!is_telescoping(&decompose(&f)));
    }

    #[test]
    fn exact_results_bound_their_numeric() {
        for n in 1..=8 {
            let res = EvalResult::from_exact(closed_form_andreoli(n), MethodTag::ClosedForm);
            let exact = res.exact.clone().unwrap();
            let diff = (Rational::from_f64(res.numeric).unwrap() - exact).abs();
            assert!(diff <= Rational::from_f64(res.error_bound).unwrap());
        }
    }
}
