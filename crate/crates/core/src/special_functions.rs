//! Γ, ln Γ, Beta, digamma and polygamma in double precision.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecialFunctionError {
    #[error("{function} is undefined at {x}")]
    Domain { function: &'static str, x: f64 },
    #[error("polygamma order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: u32, max: u32 },
}

/// Highest polygamma order supported.
pub const MAX_POLYGAMMA_ORDER: u32 = 8;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// B₂, B₄, …, B₁₄.
const BERNOULLI_EVEN: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

fn lanczos_sum(x: f64) -> f64 {
    // x here is the shifted argument z - 1
    LANCZOS_COEFFS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS_COEFFS[0], |acc, (i, c)| acc + c / (x + i as f64 + 1.0))
}

/// Γ(x). Lanczos approximation (g = 7) with the reflection formula below 1/2.
pub fn gamma(x: f64) -> Result<f64, SpecialFunctionError> {
    if x.is_nan() || is_nonpositive_integer(x) {
        return Err(SpecialFunctionError::Domain { function: "gamma", x });
    }
    if x < 0.5 {
        let s = (PI * x).sin();
        return Ok(PI / (s * gamma(1.0 - x)?));
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    // split the power so large arguments do not overflow before e^{-t}
    let half = t.powf((z + 0.5) / 2.0);
    Ok((2.0 * PI).sqrt() * half * (-t).exp() * half * lanczos_sum(z))
}

/// ln |Γ(x)|.
pub fn ln_gamma(x: f64) -> Result<f64, SpecialFunctionError> {
    if x.is_nan() || is_nonpositive_integer(x) {
        return Err(SpecialFunctionError::Domain { function: "ln_gamma", x });
    }
    if x < 0.5 {
        let s = (PI * x).sin().abs();
        return Ok((PI / s).ln() - ln_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// B(p, q) = Γ(p)Γ(q)/Γ(p+q) for p, q > 0.
///
/// Uses the direct Γ ratio while every factor stays comfortably inside the
/// `f64` range, and log-space otherwise.
pub fn beta(p: f64, q: f64) -> Result<f64, SpecialFunctionError> {
    if !(p > 0.0) {
        return Err(SpecialFunctionError::Domain { function: "beta", x: p });
    }
    if !(q > 0.0) {
        return Err(SpecialFunctionError::Domain { function: "beta", x: q });
    }
    if p + q < 100.0 && p > 1e-100 && q > 1e-100 {
        let (lo, hi) = if p < q { (p, q) } else { (q, p) };
        // Γ(lo)·(Γ(hi)/Γ(lo+hi)) keeps the intermediate ratio near one
        return Ok(gamma(lo)? * (gamma(hi)? / gamma(lo + hi)?));
    }
    Ok((ln_gamma(p)? + ln_gamma(q)? - ln_gamma(p + q)?).exp())
}

/// ψ(x) = d/dx ln Γ(x), for x > 0.
pub fn digamma(x: f64) -> Result<f64, SpecialFunctionError> {
    polygamma(0, x)
}

/// ψ⁽ᵐ⁾(x) for x > 0 and m <= [`MAX_POLYGAMMA_ORDER`].
///
/// Shifts x upward with ψ⁽ᵐ⁾(x) = ψ⁽ᵐ⁾(x+1) − (−1)ᵐ m!/x^{m+1} until
/// x >= 10 + m, then sums the asymptotic series through B₁₄.
pub fn polygamma(m: u32, x: f64) -> Result<f64, SpecialFunctionError> {
    if m > MAX_POLYGAMMA_ORDER {
        return Err(SpecialFunctionError::OrderTooHigh {
            order: m,
            max: MAX_POLYGAMMA_ORDER,
        });
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecialFunctionError::Domain {
            function: if m == 0 { "digamma" } else { "polygamma" },
            x,
        });
    }
    let threshold = 10.0 + m as f64;
    let mf = factorial_f64(m);
    let mut shifted = x;
    let mut correction = 0.0;
    while shifted < threshold {
        correction += shifted.powi(-(m as i32) - 1);
        shifted += 1.0;
    }
    let sign = if m.is_multiple_of(2) { -1.0 } else { 1.0 }; // (−1)^{m+1}
    let asymptotic = if m == 0 {
        let inv2 = 1.0 / (shifted * shifted);
        let mut pow = inv2;
        let mut s = shifted.ln() - 0.5 / shifted;
        for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
            s -= b / (2.0 * (k as f64 + 1.0)) * pow;
            pow *= inv2;
        }
        s
    } else {
        let inv = 1.0 / shifted;
        let xm = inv.powi(m as i32);
        let mut s = factorial_f64(m - 1) * xm + 0.5 * mf * xm * inv;
        let inv2 = inv * inv;
        let mut pow = xm * inv2;
        for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
            let two_k = 2 * (k as u32 + 1);
            s += b * factorial_f64(two_k + m - 1) / factorial_f64(two_k) * pow;
            pow *= inv2;
        }
        sign * s
    };
    Ok(asymptotic + sign * mf * correction)
}

fn factorial_f64(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_unit_interval;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn gamma_examples() {
        assert!(rel(gamma(1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(gamma(5.0).unwrap(), 24.0) < 1e-14);
        // √π, independent constant
        assert!(rel(gamma(0.5).unwrap(), 1.772_453_850_905_516) < 1e-14);
        assert!(rel(gamma(-0.5).unwrap(), -2.0 * 1.772_453_850_905_516) < 1e-13);
        assert!(matches!(gamma(0.0), Err(SpecialFunctionError::Domain { .. })));
        assert!(matches!(gamma(-3.0), Err(SpecialFunctionError::Domain { .. })));
    }

    #[test]
    fn gamma_matches_factorials_to_fifty() {
        let mut f = 1.0f64;
        for n in 1..50u32 {
            // Γ(n+1) = n!
            f *= n as f64;
            assert!(rel(gamma(n as f64 + 1.0).unwrap(), f) < 1e-13, "n={n}");
            assert!(rel(ln_gamma(n as f64 + 1.0).unwrap(), f.ln()) < 1e-13 || n == 1);
        }
    }

    #[test]
    fn gamma_recurrence_grid() {
        for i in 1..=100 {
            let x = i as f64 / 10.0;
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert!(rel(lhs, rhs) <= 1e-12, "x={x}");
        }
    }

    #[test]
    fn beta_examples() {
        assert!(rel(beta(1.0, 1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(beta(2.0, 3.0).unwrap(), 1.0 / 12.0) < 1e-13);
        assert!(beta(0.0, 1.0).is_err());
        assert!(beta(1.0, -2.0).is_err());
        // log-space branch agrees with the factorial identity
        let big = beta(60.0, 70.0).unwrap();
        let lg = |n: u32| (1..n).map(|k| (k as f64).ln()).sum::<f64>();
        assert!(rel(big, (lg(60) + lg(70) - lg(130)).exp()) < 1e-11);
    }

    #[test]
    fn beta_against_defining_integral() {
        // B(3/2, 4) = ∫ u^{1/2} (1-u)^3 du
        let q = integrate_unit_interval(|u| u.sqrt() * (1.0 - u).powi(3), 1e-13).unwrap();
        assert!((beta(1.5, 4.0).unwrap() - q.value).abs() < 1e-12);
        // (1/2) B(1/2, 4) = ∫ (1-u^2)^3 du = 16/35
        let q = integrate_unit_interval(|u| (1.0 - u * u).powi(3), 1e-13).unwrap();
        assert!((0.5 * beta(0.5, 4.0).unwrap() - q.value).abs() < 1e-12);
        assert!((q.value - 16.0 / 35.0).abs() < 1e-13);
    }

    #[test]
    fn beta_is_symmetric() {
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 20.0 + 1e-3
        };
        for _ in 0..500 {
            let (p, q) = (next(), next());
            let (a, b) = (beta(p, q).unwrap(), beta(q, p).unwrap());
            assert!(rel(a, b) <= 1e-13, "p={p} q={q}");
        }
    }

    #[test]
    fn beta_integral_identity() {
        // ∫₀¹ (1-u^ℓ)^{n-1} u^{m-1} du = (1/ℓ) B(m/ℓ, n)
        for l in 1..=4 {
            for m in 1..=4 {
                for n in 1..=4 {
                    let q = integrate_unit_interval(
                        |u| (1.0 - u.powi(l)).powi(n - 1) * u.powi(m - 1),
                        1e-13,
                    )
                    .unwrap();
                    let b = beta(m as f64 / l as f64, n as f64).unwrap() / l as f64;
                    assert!((q.value - b).abs() <= 1e-10, "l={l} m={m} n={n}");
                }
            }
        }
    }

    /// γ from H_n − ln n with the Euler–Maclaurin correction.
    fn euler_gamma_oracle() -> f64 {
        let n = 1_000_000u32;
        let h: f64 = (1..=n).rev().map(|k| 1.0 / k as f64).sum();
        let nf = n as f64;
        h - nf.ln() - 1.0 / (2.0 * nf) + 1.0 / (12.0 * nf * nf)
    }

    #[test]
    fn digamma_examples() {
        let g = euler_gamma_oracle();
        assert!((g - 0.577_215_664_901_532_9).abs() < 1e-12);
        assert!((digamma(1.0).unwrap() + g).abs() < 1e-12);
        assert!((digamma(2.0).unwrap() - digamma(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.5).is_err());
    }

    #[test]
    fn trigamma_at_one() {
        // Σ 1/k² with Euler–Maclaurin tail
        let n = 1000u32;
        let nf = n as f64;
        let head: f64 = (1..=n).rev().map(|k| 1.0 / (k as f64 * k as f64)).sum();
        let oracle = head + 1.0 / nf - 1.0 / (2.0 * nf * nf) + 1.0 / (6.0 * nf.powi(3));
        assert!((oracle - 1.644_934_066_848_226_4).abs() < 1e-13);
        assert!(rel(polygamma(1, 1.0).unwrap(), oracle) < 1e-12);
    }

    #[test]
    fn polygamma_recurrence_grid() {
        for m in 0..=4u32 {
            let c = if m % 2 == 0 { 1.0 } else { -1.0 } * factorial_f64(m);
            for i in 1..=100 {
                let x = i as f64 / 10.0;
                let d = polygamma(m, x + 1.0).unwrap() - polygamma(m, x).unwrap();
                let expect = c / x.powi(m as i32 + 1);
                assert!((d - expect).abs() <= 1e-11 * expect.abs().max(1.0), "m={m} x={x}");
            }
        }
    }

    #[test]
    fn polygamma_against_hurwitz_sums() {
        // ψ⁽ᵐ⁾(x) = (−1)^{m+1} m! Σ_{k≥0} 1/(x+k)^{m+1} for m >= 1,
        // summed directly to K with an Euler–Maclaurin tail.
        for m in 1..=8u32 {
            for &x in &[0.3, 1.0, 2.5, 7.0, 19.0, 50.0] {
                let p = m as i32 + 1;
                let kmax = 2000;
                let head: f64 = (0..kmax).rev().map(|k| (x + k as f64).powi(-p)).sum();
                let a = x + kmax as f64;
                let tail = a.powi(1 - p) / (p - 1) as f64 + 0.5 * a.powi(-p)
                    + p as f64 / 12.0 * a.powi(-p - 1);
                let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
                let oracle = sign * factorial_f64(m) * (head + tail);
                assert!(rel(polygamma(m, x).unwrap(), oracle) < 1e-12, "m={m} x={x}");
            }
        }
    }

    #[test]
    fn polygamma_order_cap() {
        assert!(polygamma(8, 1.0).is_ok());
        assert_eq!(
            polygamma(9, 1.0),
            Err(SpecialFunctionError::OrderTooHigh { order: 9, max: 8 })
        );
    }
}
