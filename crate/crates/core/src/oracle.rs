//! Brute-force certification: exact partial sums, rigorous tail bounds and
//! numerical checks of the one-dimensional Feynman-parameter identities.

use std::thread;

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::exact_arith::{factorial, Rational};
use crate::partial_fractions::FactoredRational;
use crate::polynomials::Degree;
use crate::quadrature::{integrate_unit_interval, QuadratureError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("term has a pole at k = {0}")]
    PoleHit(u64),
    #[error("empty summation range: start {start} > cutoff {cutoff}")]
    EmptyRange { start: u64, cutoff: u64 },
    #[error("tail bound needs cutoff >= 1")]
    ZeroCutoff,
    #[error("series diverges (degree gap {0} < 2)")]
    Divergent(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Absolute bound on `Σ_{k > cutoff} Q(k)/P(k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TailBound {
    pub cutoff: u64,
    pub bound: Rational,
}

const LEAF: u64 = 64;
const QUADRATURE_FLOOR: f64 = 1e-14;
const PARALLEL_THRESHOLD: u64 = 50_000;

/// Exact `Σ_{k=start}^{cutoff} Q(k)/P(k)`.
///
/// Summed by binary splitting; ranges above a threshold are split across
/// threads, exact addition being associative.
pub fn partial_sum(f: &FactoredRational, start: u64, cutoff: u64) -> Result<Rational, OracleError> {
    if start > cutoff {
        return Err(OracleError::EmptyRange { start, cutoff });
    }
    if let Some(k) = pole_in_range(f, start, cutoff) {
        return Err(OracleError::PoleHit(k));
    }
    let term = IntegerTerm::new(f);
    let f = &term;
    let len = cutoff - start + 1;
    if len < PARALLEL_THRESHOLD {
        return Ok(range_sum(f, start, cutoff + 1) * &term.scale);
    }
    let workers = thread::available_parallelism().map_or(4, |n| n.get()) as u64;
    let chunk = len.div_ceil(workers);
    let parts: Vec<Rational> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let lo = start + w * chunk;
                let hi = (lo + chunk).min(cutoff + 1);
                scope.spawn(move || if lo < hi { range_sum(f, lo, hi) } else { Rational::zero() })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("summation worker panicked")).collect()
    });
    Ok(parts.into_iter().sum::<Rational>() * &term.scale)
}

fn pole_in_range(f: &FactoredRational, start: u64, cutoff: u64) -> Option<u64> {
    f.factors()
        .iter()
        .filter(|fac| fac.shift.is_integer())
        .filter_map(|fac| {
            let pole = -fac.shift.numer();
            (pole >= BigInt::from(start) && pole <= BigInt::from(cutoff))
                .then(|| u64::try_from(pole).expect("pole within u64 range"))
        })
        .min()
}

/// Integer form of the term: `Q(k)/P(k) = scale · Qz(k) / ∏ (qᵢ k + pᵢ)^{mᵢ}`
/// with `Qz` integral, so leaves can be summed without intermediate gcds.
struct IntegerTerm {
    scale: Rational,
    numerator: Vec<BigInt>,
    factors: Vec<(BigInt, BigInt, u32)>,
}

impl IntegerTerm {
    fn new(f: &FactoredRational) -> Self {
        let coeffs = f.numerator().coeffs();
        let common = coeffs
            .iter()
            .fold(BigInt::from(1), |acc, c| num_integer::Integer::lcm(&acc, c.denom()));
        let numerator = coeffs
            .iter()
            .map(|c| c.numer() * (&common / c.denom()))
            .collect();
        let mut scale = Rational::from(common).recip() / f.leading();
        let factors = f
            .factors()
            .iter()
            .map(|fac| {
                let q = fac.shift.denom().clone();
                scale *= &Rational::from(q.clone()).pow(fac.multiplicity as i32);
                (q, fac.shift.numer().clone(), fac.multiplicity)
            })
            .collect();
        IntegerTerm { scale, numerator, factors }
    }

    /// `Σ_{k=lo}^{hi-1} Qz(k)/∏(qᵢk+pᵢ)^{mᵢ}`, accumulated unreduced.
    fn leaf(&self, lo: u64, hi: u64) -> Rational {
        let mut num = BigInt::from(0);
        let mut den = BigInt::from(1);
        for k in lo..hi {
            let k = BigInt::from(k);
            let q = self.numerator.iter().rev().fold(BigInt::from(0), |acc, c| acc * &k + c);
            let d = self
                .factors
                .iter()
                .fold(BigInt::from(1), |acc, (qi, pi, m)| acc * num_traits::pow(qi * &k + pi, *m as usize));
            num = num * &d + q * &den;
            den *= d;
        }
        Rational::from_bigints(num, den)
    }
}

/// Σ over `lo..hi`, before scaling.
fn range_sum(f: &IntegerTerm, lo: u64, hi: u64) -> Rational {
    if hi - lo <= LEAF {
        return f.leaf(lo, hi);
    }
    let mid = lo + (hi - lo) / 2;
    range_sum(f, lo, mid) + range_sum(f, mid, hi)
}

/// Compensated (Neumaier) floating-point partial sum, for quick looks only.
/// Returns the sum and a bound on its accumulated rounding error.
pub fn partial_sum_fast(f: &FactoredRational, start: u64, cutoff: u64) -> Result<(f64, f64), OracleError> {
    if start > cutoff {
        return Err(OracleError::EmptyRange { start, cutoff });
    }
    if let Some(k) = pole_in_range(f, start, cutoff) {
        return Err(OracleError::PoleHit(k));
    }
    let (mut sum, mut comp, mut abs) = (0.0f64, 0.0f64, 0.0f64);
    for k in start..=cutoff {
        let t = f.term_f64(k as f64);
        abs += t.abs();
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    // each term carries a few ulps from its own evaluation
    let terms = f.denominator_degree() + f.numerator().coeffs().len() + 4;
    Ok((sum + comp, (terms as f64 + 2.0) * f64::EPSILON * abs))
}

/// With `p = deg P − deg Q >= 2` and `c = 2·|lc(Q)/lc(P)|`, returns
/// `c / ((p−1)·K'^{p−1})` for the smallest `K' >= K` past which
/// `|Q(k)/P(k)| <= c/k^p` is guaranteed, plus the exact absolute terms in
/// `(K, K']` when `K' > K`.
pub fn tail_bound(f: &FactoredRational, cutoff: u64) -> Result<TailBound, OracleError> {
    if cutoff == 0 {
        return Err(OracleError::ZeroCutoff);
    }
    let q = f.numerator();
    let Degree::Finite(dq) = q.degree() else {
        return Ok(TailBound {
            cutoff,
            bound: Rational::zero(),
        });
    };
    let dp = f.denominator_degree();
    if dp < dq + 2 {
        return Err(OracleError::Divergent(dp.saturating_sub(dq)));
    }
    let p = (dp - dq) as i32;
    let lc = q.leading_coeff().expect("nonzero numerator");
    let c = (lc / f.leading()).abs() * Rational::from(2);
    let sigma: Rational = q.coeffs()[..dq].iter().map(|a| (a / lc).abs()).sum();
    let max_shift = f
        .factors()
        .iter()
        .map(|fac| fac.shift.abs())
        .max()
        .expect("at least one factor");

    // |Q(k)/P(k)| · k^p / |lc Q / lead| <= (1 + σ/K') / ∏ (1 − |aᵢ|/K')^{mᵢ}
    let ratio_ok = |kk: u64| -> bool {
        let kr = Rational::from(kk as i64);
        if max_shift >= kr {
            return false;
        }
        let num = Rational::one() + &sigma / &kr;
        let den: Rational = f
            .factors()
            .iter()
            .map(|fac| (Rational::one() - fac.shift.abs() / &kr).pow(fac.multiplicity as i32))
            .product();
        num <= den * Rational::from(2)
    };
    let mut safe = cutoff;
    while !ratio_ok(safe) {
        safe = safe.checked_mul(2).ok_or_else(|| {
            OracleError::InvalidArgument("tail bound threshold overflow".into())
        })?;
    }
    // tighten: smallest safe cutoff in (safe/2, safe]
    if safe > cutoff {
        let (mut lo, mut hi) = ((safe / 2).max(cutoff), safe);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if ratio_ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        safe = hi;
    }
    let integral = c / (Rational::from((p - 1) as i64) * Rational::from(safe as i64).pow(p - 1));
    let head = if safe > cutoff {
        if let Some(k) = pole_in_range(f, cutoff + 1, safe) {
            return Err(OracleError::PoleHit(k));
        }
        (cutoff + 1..=safe)
            .map(|k| f.term(&Rational::from(k as i64)).expect("no pole").abs())
            .sum()
    } else {
        Rational::zero()
    };
    Ok(TailBound {
        cutoff,
        bound: integral + head,
    })
}

/// One side-by-side comparison of an identity's two sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / |lhs|`.
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = (lhs - rhs).abs() / lhs.abs();
        IdentityCheck {
            lhs,
            rhs,
            residual,
            tolerance,
            passed: residual <= tolerance,
        }
    }
}

/// Which normalization of the step-2 identity reproduced its left side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Step2Normalization {
    /// `(1/n!) ∫ u^{k−1} (1−u²)^{n−1} du`
    AsPrinted,
    /// `(1/(2ⁿ n!)) ∫ u^{k−1} (1−u²)^n du`
    Rescaled,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeynmanReport {
    /// `1/(k(k+1)···(k+n)) = (1/n!) ∫₀¹ u^{k−1} (1−u)^n du`
    pub step1: IdentityCheck,
    /// `1/(k(k+2)···(k+2n))` against the printed normalization.
    pub step2_as_printed: IdentityCheck,
    /// `1/(k(k+2)···(k+2n))` against the rescaled normalization.
    pub step2_rescaled: IdentityCheck,
    pub step2_matches: Step2Normalization,
}

/// Checks the single-integral reduction of the Feynman parametrization at a
/// real `k > 0`, and reports on both normalizations of its step-2 analogue.
pub fn feynman_identity_check(k: f64, n: u32, tolerance: f64) -> Result<FeynmanReport, OracleError> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(OracleError::InvalidArgument(format!("k must be positive, got {k}")));
    }
    if n == 0 {
        return Err(OracleError::InvalidArgument("n must be >= 1".into()));
    }
    let nf = factorial(n as u64);
    let nf = Rational::from(nf).to_f64();
    let ni = n as i32;

    let lhs1 = 1.0 / (0..=n).map(|i| k + i as f64).product::<f64>();
    // relative accuracy requested from the quadrature, floored near its rounding limit
    let quad_tol = |scale: f64| (0.1 * tolerance).max(QUADRATURE_FLOOR) * scale;
    let rhs1 = integrate_unit_interval(|u| u.powf(k - 1.0) * (1.0 - u).powi(ni), quad_tol(lhs1 * nf))?
        .value
        / nf;

    let lhs2 = 1.0 / (0..=n).map(|i| k + 2.0 * i as f64).product::<f64>();
    let printed = integrate_unit_interval(
        |u| u.powf(k - 1.0) * (1.0 - u * u).powi(ni - 1),
        quad_tol(lhs2 * nf),
    )?
    .value
        / nf;
    let scale2 = 2f64.powi(ni) * nf;
    let rescaled = integrate_unit_interval(
        |u| u.powf(k - 1.0) * (1.0 - u * u).powi(ni),
        quad_tol(lhs2 * scale2),
    )?
    .value
        / scale2;

    let step2_as_printed = IdentityCheck::new(lhs2, printed, tolerance);
    let step2_rescaled = IdentityCheck::new(lhs2, rescaled, tolerance);
    let step2_matches = match (step2_as_printed.passed, step2_rescaled.passed) {
        (true, _) => Step2Normalization::AsPrinted,
        (false, true) => Step2Normalization::Rescaled,
        (false, false) => Step2Normalization::Neither,
    };
    Ok(FeynmanReport {
        step1: IdentityCheck::new(lhs1, rhs1, tolerance),
        step2_as_printed,
        step2_rescaled,
        step2_matches,
    })
}
