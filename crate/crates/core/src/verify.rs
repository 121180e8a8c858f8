//! The reproduction battery behind `seriesum verify --suite paper`.
//!
//! Each item is an isolated pure computation, so the suite runs them on
//! separate threads and reports in a fixed order.

use std::thread;

use num_bigint::BigInt;
use serde::Serialize;

use crate::exact_arith::{binomial, factorial, Rational};
use crate::oracle::{feynman_identity_check, partial_sum, tail_bound};
use crate::partial_fractions::{decompose, decompose_andreoli, recombine, FactoredRational, LinearFactor};
use crate::polynomials::Polynomial;
use crate::quadrature::{integrate_unit_interval, integrate_unit_interval_split};
use crate::series_engine::{
    closed_form_andreoli, closed_form_arithmetic, closed_form_polygamma, closed_form_step, conclusion_eval,
    integral_eval, over_n_both, over_n_eval, EvalResult, SeriesSpec,
};
use crate::special_functions::{beta, gamma, polygamma};
use crate::spec_parser::parse_term;

/// `2 − π²/6`.
pub const REPEATED_ROOT_VALUE: f64 = 0.355_065_933_151_773_56;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyItem {
    pub name: String,
    pub expected: String,
    pub got: String,
    pub tolerance: f64,
    pub pass: bool,
}

impl VerifyItem {
    fn new(name: &str, expected: impl Into<String>, got: impl Into<String>, tolerance: f64, pass: bool) -> Self {
        VerifyItem {
            name: name.to_string(),
            expected: expected.into(),
            got: got.into(),
            tolerance,
            pass,
        }
    }
}

pub type Check = fn() -> VerifyItem;

/// The battery, in report order.
pub fn checks() -> Vec<(&'static str, Check)> {
    vec![
        ("andreoli_closed_form", andreoli_closed_form),
        ("andreoli_coefficients", andreoli_coefficients),
        ("arithmetic_family", arithmetic_family),
        ("step2_family", step2_family),
        ("step_l_family", step_l_family),
        ("feynman_reduction", feynman_reduction),
        ("over_n_family", over_n_family),
        ("repeated_root_series", repeated_root_series),
        ("property_battery", property_battery),
        ("conclusion_families", conclusion_families),
        ("million_term_oracle", million_term_oracle),
    ]
}

/// Runs every check concurrently and returns the items in report order.
pub fn paper_suite() -> Vec<VerifyItem> {
    let checks = checks();
    thread::scope(|scope| {
        let handles: Vec<_> = checks
            .iter()
            .map(|(name, check)| {
                let check = *check;
                (name, scope.spawn(check))
            })
            .collect();
        handles
            .into_iter()
            .map(|(name, h)| {
                h.join()
                    .unwrap_or_else(|_| VerifyItem::new(name, "no panic", "panicked", 0.0, false))
            })
            .collect()
    })
}

fn fmt_e(x: f64) -> String {
    format!("{x:.3e}")
}

fn andreoli_term(n: u32) -> FactoredRational {
    FactoredRational::andreoli(n)
}

/// `lo <= value <= lo + width`, exactly.
fn within_tail(value: &Rational, partial: &Rational, bound: &Rational) -> bool {
    value >= partial && *value <= partial + bound
}

pub fn andreoli_closed_form() -> VerifyItem {
    let tol = 1e-9;
    let printed = [(1, r(1, 1)), (2, r(1, 4)), (3, r(1, 18)), (4, r(1, 96)), (5, r(1, 600))];
    let mut pass = printed.iter().all(|(n, v)| closed_form_andreoli(*n) == *v);
    let mut worst = 0.0f64;
    for n in 1..=8u32 {
        let closed = closed_form_andreoli(n);
        let formula = Rational::from_bigints(BigInt::from(1), factorial(n as u64) * BigInt::from(n));
        pass &= closed == formula;
        let f = andreoli_term(n);
        let oracle_ok = partial_sum(&f, 1, 10_000)
            .and_then(|ps| tail_bound(&f, 10_000).map(|tb| within_tail(&closed, &ps, &tb.bound)))
            .unwrap_or(false);
        pass &= oracle_ok;
        let d = decompose_andreoli(n);
        for route in [closed_form_polygamma(&d, 1), integral_eval(&d, 1, 1e-13)] {
            match route {
                Ok(res) => worst = worst.max((res.numeric - closed.to_f64()).abs()),
                Err(_) => worst = f64::INFINITY,
            }
        }
    }
    pass &= worst <= tol;
    VerifyItem::new(
        "andreoli_closed_form",
        "1/(n*n!) for n=1..8; oracle within tail bound at K=10^4; routes within 1e-9",
        format!("max route deviation {}", fmt_e(worst)),
        tol,
        pass,
    )
}

pub fn andreoli_coefficients() -> VerifyItem {
    let mut mismatches = Vec::new();
    for n in 1..=8u32 {
        let nf = Rational::from(factorial(n as u64));
        let generic = decompose(&andreoli_term(n));
        let special = decompose_andreoli(n);
        for i in 0..=n {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            let want = Rational::from(binomial(n as u64, i as u64).expect("i <= n") * sign) / &nf;
            let shift = Rational::from(i as i64);
            if generic.coeff(&shift, 1) != Some(&want) || special.coeff(&shift, 1) != Some(&want) {
                mismatches.push(format!("n={n} i={i}"));
            }
        }
        if generic.terms.len() != n as usize + 1 || special.terms.len() != n as usize + 1 {
            mismatches.push(format!("n={n} term count"));
        }
    }
    VerifyItem::new(
        "andreoli_coefficients",
        "A_i = (-1)^i C(n,i)/n! exactly for n=1..8",
        if mismatches.is_empty() { "all exact".to_string() } else { format!("mismatch at {}", mismatches.join(", ")) },
        0.0,
        mismatches.is_empty(),
    )
}

struct XorShift(u64);

impl XorShift {
    fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.next() % (hi - lo + 1) as u64) as i64
    }
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub fn arithmetic_family() -> VerifyItem {
    let tol = 1e-9;
    let mut rng = XorShift(0x9e37_79b9_7f4a_7c15);
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut failed = Vec::new();
    for _ in 0..20 {
        let a = r(rng.range(1, 5), rng.range(1, 4));
        let b = r(rng.range(1, 5), rng.range(1, 4));
        let n = rng.range(1, 5) as u32;
        let spec = SeriesSpec::ArithmeticFamily { a: a.clone(), b: b.clone(), n };
        let ok = (|| -> Option<bool> {
            let closed = closed_form_arithmetic(&a, &b, n).ok()?;
            let (f, _) = spec.to_factored()?.ok()?;
            let ps = partial_sum(&f, 1, 10_000).ok()?;
            let tb = tail_bound(&f, 10_000).ok()?;
            let res = integral_eval(&decompose(&f), 1, 1e-13).ok()?;
            let dev = (res.numeric - closed.to_f64()).abs();
            worst = worst.max(dev);
            Some(within_tail(&closed, &ps, &tb.bound) && dev <= tol)
        })()
        .unwrap_or(false);
        if !ok {
            failed.push(format!("(a={a}, b={b}, n={n})"));
        }
        pass &= ok;
    }
    VerifyItem::new(
        "arithmetic_family",
        "20 random (a,b,n): closed form inside oracle tail interval; integral within 1e-9",
        if failed.is_empty() { format!("max integral deviation {}", fmt_e(worst)) } else { format!("failed {}", failed.join(" ")) },
        tol,
        pass,
    )
}

fn double_factorial(n: u64) -> BigInt {
    let mut acc = BigInt::from(1);
    let mut m = n;
    while m > 1 {
        acc *= m;
        m -= 2;
    }
    acc
}

fn step_term(step: u32, n: u32) -> FactoredRational {
    let factors = (0..=n).map(|i| LinearFactor::new(Rational::from((i * step) as i64), 1)).collect();
    FactoredRational::new(Polynomial::one(), Rational::one(), factors).expect("valid step term")
}

fn step_oracle_ok(step: u32, n: u32, value: &Rational) -> bool {
    let f = step_term(step, n);
    partial_sum(&f, 1, 10_000)
        .and_then(|ps| tail_bound(&f, 10_000).map(|tb| within_tail(value, &ps, &tb.bound)))
        .unwrap_or(false)
}

pub fn step2_family() -> VerifyItem {
    let mut bad = Vec::new();
    for n in 1..=6u32 {
        let closed = closed_form_step(2, n);
        let m = 2 * n as u64;
        let independent = (Rational::from_bigints(1.into(), double_factorial(m))
            + Rational::from_bigints(1.into(), double_factorial(m - 1)))
            / Rational::from(m as i64);
        if closed != independent || !step_oracle_ok(2, n, &closed) {
            bad.push(n);
        }
    }
    let anchors = closed_form_step(2, 1) == r(3, 4) && closed_form_step(2, 2) == r(11, 96);
    let pass = bad.is_empty() && anchors;
    VerifyItem::new(
        "step2_family",
        "(1/2n)(1/(2n)!! + 1/(2n-1)!!) for n=1..6; 3/4 and 11/96; oracle within tail bound",
        format!("n=1: {}, n=2: {}, failures {:?}", closed_form_step(2, 1), closed_form_step(2, 2), bad),
        0.0,
        pass,
    )
}

pub fn step_l_family() -> VerifyItem {
    let mut bad = Vec::new();
    for step in 1..=4u32 {
        for n in 1..=5u32 {
            let closed = closed_form_step(step, n);
            if !step_oracle_ok(step, n, &closed) || (step == 1 && closed != closed_form_andreoli(n)) {
                bad.push(format!("(l={step}, n={n})"));
            }
        }
    }
    let anchor = closed_form_step(3, 1);
    let pass = bad.is_empty() && anchor == r(11, 18);
    VerifyItem::new(
        "step_l_family",
        "l=1..4 x n=1..5 inside oracle tail interval; l=1 equals Andreoli; (l=3,n=1) = 11/18",
        format!("(l=3,n=1) = {anchor}; failures [{}]", bad.join(" ")),
        0.0,
        pass,
    )
}

pub fn feynman_reduction() -> VerifyItem {
    let tol = 1e-10;
    let mut worst = 0.0f64;
    let mut pass = true;
    for k in [0.5, 1.0, 2.0, 7.25] {
        for n in 1..=6 {
            match feynman_identity_check(k, n, tol) {
                Ok(report) => {
                    worst = worst.max(report.step1.residual);
                    pass &= report.step1.passed;
                }
                Err(_) => pass = false,
            }
        }
    }
    VerifyItem::new(
        "feynman_reduction",
        "1/(k(k+1)...(k+n)) = (1/n!) int u^(k-1)(1-u)^n for k in {0.5,1,2,7.25}, n=1..6",
        format!("max relative residual {}", fmt_e(worst)),
        tol,
        pass,
    )
}

pub fn over_n_family() -> VerifyItem {
    let tol = 1e-11;
    let mut worst = 0.0f64;
    let mut pass = true;
    for x in [0.5, 1.0, 1.5, 2.0, 3.0] {
        for step in 1..=3 {
            match over_n_both(x, step, 1e-13) {
                Ok(both) => {
                    let diff = (both.series.numeric - both.integral.numeric).abs();
                    worst = worst.max(diff);
                    pass &= diff <= tol;
                }
                Err(_) => pass = false,
            }
        }
    }
    let at_one = over_n_eval(1.0, 1, 1e-13).map(|v| v.numeric).unwrap_or(f64::NAN);
    let e_minus_1 = std::f64::consts::E - 1.0;
    pass &= (at_one - e_minus_1).abs() <= 1e-12;
    VerifyItem::new(
        "over_n_family",
        "integral and alternating series agree within 1e-11; F(1;1) = e-1 within 1e-12",
        format!("max disagreement {}, F(1;1) = {at_one:.17}", fmt_e(worst)),
        tol,
        pass,
    )
}

pub fn repeated_root_series() -> VerifyItem {
    let tol = 1e-10;
    let routes = parse_term("1/(k*(k+1)^2)").ok().map(|f| {
        let d = decompose(&f);
        (closed_form_polygamma(&d, 1), integral_eval(&d, 1, 1e-13))
    });
    let (pass, got) = match routes {
        Some((Ok(p), Ok(i))) => {
            let dp = (p.numeric - REPEATED_ROOT_VALUE).abs();
            let di = (i.numeric - REPEATED_ROOT_VALUE).abs();
            (dp <= tol && di <= tol, format!("polygamma {:.17} ({}), integral {:.17} ({})", p.numeric, fmt_e(dp), i.numeric, fmt_e(di)))
        }
        other => (false, format!("{other:?}")),
    };
    VerifyItem::new(
        "repeated_root_series",
        format!("sum 1/(k(k+1)^2) = 2 - pi^2/6 = {REPEATED_ROOT_VALUE:.17}"),
        got,
        tol,
        pass,
    )
}

/// Deterministic miniature of the property suites: decomposition round
/// trips and pointwise equality, quadrature exactness and honesty, and the
/// special-function recurrences.
pub fn property_battery() -> VerifyItem {
    let mut rng = XorShift(0x2545_f491_4f6c_dd1d);
    let mut failures = Vec::new();

    for case in 0..200 {
        let count = rng.range(1, 4) as usize;
        let mut shifts: Vec<Rational> = Vec::new();
        while shifts.len() < count {
            let s = r(rng.range(-12, 12), rng.range(1, 4));
            if !shifts.contains(&s) {
                shifts.push(s);
            }
        }
        let factors: Vec<LinearFactor> =
            shifts.iter().map(|s| LinearFactor::new(s.clone(), rng.range(1, 3) as u32)).collect();
        let degree: u32 = factors.iter().map(|f| f.multiplicity).sum();
        if degree < 2 {
            continue;
        }
        let qdeg = rng.range(0, degree as i64 - 2) as usize;
        let q = Polynomial::new((0..=qdeg).map(|_| r(rng.range(-5, 5), rng.range(1, 3))).collect());
        if q.is_zero() {
            continue;
        }
        let leading = r(rng.range(1, 6), rng.range(1, 3));
        let Ok(f) = FactoredRational::new(q.clone(), leading, factors) else {
            continue;
        };
        let d = decompose(&f);
        if recombine(&d) != q {
            failures.push(format!("round trip #{case}"));
        }
        for i in 0..4 {
            let x = r(rng.range(-30, 30), 7) + r(1, 1000 + i);
            if let (Some(a), Some(b)) = (f.term(&x), d.eval(&x)) {
                if a != b {
                    failures.push(format!("pointwise #{case}"));
                }
            }
        }
    }

    for p in 0..=12 {
        let ok = integrate_unit_interval(|u| u.powi(p), 1e-13)
            .map(|res| (res.value - 1.0 / (p as f64 + 1.0)).abs() <= 1e-13)
            .unwrap_or(false);
        if !ok {
            failures.push(format!("monomial {p}"));
        }
    }
    type Integrand = fn(f64, f64) -> f64;
    let honesty: [(Integrand, f64); 4] = [
        (|u, _| u.powf(-0.5), 2.0),
        (|u, _| -u.ln(), 1.0),
        (|u, _| 1.0 / (1.0 + u), std::f64::consts::LN_2),
        (|_, v| v.powf(-0.5), 2.0),
    ];
    for (i, (f, exact)) in honesty.iter().enumerate() {
        for tol in [1e-6, 1e-9, 1e-12] {
            let ok = integrate_unit_interval_split(f, tol)
                .map(|res| (res.value - exact).abs() <= 10.0 * res.error_estimate)
                .unwrap_or(false);
            if !ok {
                failures.push(format!("honesty {i} at {tol:e}"));
            }
        }
    }

    for i in 0..50 {
        let x = 0.1 + 0.37 * i as f64;
        let g = gamma(x).unwrap_or(f64::NAN);
        let g1 = gamma(x + 1.0).unwrap_or(f64::NAN);
        if ((g1 - x * g) / g1).abs() > 1e-12 {
            failures.push(format!("gamma recurrence at {x}"));
        }
        for m in 0..=4u32 {
            // ψ⁽ᵐ⁾(x+1) = ψ⁽ᵐ⁾(x) + (−1)^m m!/x^{m+1}, judged relative to the larger side
            let lhs = polygamma(m, x + 1.0).unwrap_or(f64::NAN);
            let base = polygamma(m, x).unwrap_or(f64::NAN);
            let step = if m % 2 == 0 { 1.0 } else { -1.0 } * factorial_f64(m) / x.powi(m as i32 + 1);
            let scale = base.abs().max(step.abs()).max(1.0);
            if (lhs - (base + step)).abs() > 1e-11 * scale || lhs.is_nan() {
                failures.push(format!("polygamma({m}) recurrence at {x}"));
            }
        }
        let (p, q) = (0.5 + 0.1 * i as f64, 2.0 + 0.05 * i as f64);
        if let (Ok(a), Ok(b)) = (beta(p, q), beta(q, p)) {
            if ((a - b) / a).abs() > 1e-13 {
                failures.push(format!("beta symmetry at {p},{q}"));
            }
        }
    }

    failures.dedup();
    VerifyItem::new(
        "property_battery",
        "200 decompositions round-trip and match pointwise; quadrature exact and honest; recurrences hold",
        if failures.is_empty() { "all hold".to_string() } else { failures.join(", ") },
        1e-11,
        failures.is_empty(),
    )
}

fn factorial_f64(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn agree(a: &EvalResult, b: &EvalResult) -> (bool, f64) {
    let diff = (a.numeric - b.numeric).abs();
    let bound = a.error_bound + b.error_bound + 4.0 * f64::EPSILON * a.numeric.abs();
    (diff <= bound, diff)
}

pub fn conclusion_families() -> VerifyItem {
    let tol = 1e-6;
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    let mut record = |label: String, result: Option<(bool, f64)>| match result {
        Some((ok, diff)) => {
            worst = worst.max(diff);
            if !ok {
                bad.push(label);
            }
        }
        None => bad.push(label),
    };

    // over k with a = 0, b = 1 is the step family
    for (step, n) in [(1, 2), (2, 2), (3, 3)] {
        let spec = SeriesSpec::ConclusionOverK { a: Rational::zero(), b: Rational::one(), n, step };
        let closed = EvalResult::from_exact(closed_form_step(step, n), crate::series_engine::MethodTag::ClosedForm);
        record(
            format!("over-k step (l={step}, n={n})"),
            conclusion_eval(&spec, tol).ok().map(|v| agree(&v, &closed)),
        );
    }
    // over k with ℓ = 1 is the arithmetic family
    for (a, b, n) in [(r(1, 2), r(1, 1), 2), (r(1, 1), r(2, 1), 3), (r(2, 3), r(3, 2), 2)] {
        let spec = SeriesSpec::ConclusionOverK { a: a.clone(), b: b.clone(), n, step: 1 };
        let closed = closed_form_arithmetic(&a, &b, n)
            .ok()
            .map(|c| EvalResult::from_exact(c, crate::series_engine::MethodTag::ClosedForm));
        record(
            format!("over-k arith (a={a}, b={b}, n={n})"),
            closed.and_then(|c| conclusion_eval(&spec, tol).ok().map(|v| agree(&v, &c))),
        );
    }
    // over n with b = 1 is F(x + a; ℓ)
    for (a, x, step) in [(r(0, 1), 1.0, 1), (r(0, 1), 1.5, 2), (r(1, 2), 1.0, 2), (r(2, 1), 0.5, 3)] {
        let spec = SeriesSpec::ConclusionOverN { a: a.clone(), b: Rational::one(), x, step };
        let reduced = over_n_eval(x + a.to_f64(), step, 1e-13).ok();
        record(
            format!("over-n (a={a}, x={x}, l={step})"),
            reduced.and_then(|f| conclusion_eval(&spec, 1e-13).ok().map(|v| agree(&v, &f))),
        );
    }
    VerifyItem::new(
        "conclusion_families",
        "over-k and over-n families agree with their reductions within combined bounds",
        if bad.is_empty() { format!("max deviation {}", fmt_e(worst)) } else { format!("failed {}", bad.join(", ")) },
        tol,
        bad.is_empty(),
    )
}

/// Exact partial sums to K = 10⁶, with the tail bound bracketing the closed
/// form, for an Andreoli member and an over-k member.
pub fn million_term_oracle() -> VerifyItem {
    const K: u64 = 1_000_000;
    let mut bad = Vec::new();
    let f = andreoli_term(2);
    let ok = partial_sum(&f, 1, K)
        .and_then(|ps| tail_bound(&f, K).map(|tb| within_tail(&closed_form_andreoli(2), &ps, &tb.bound)))
        .unwrap_or(false);
    if !ok {
        bad.push("andreoli n=2");
    }
    let spec = SeriesSpec::ConclusionOverK { a: r(1, 1), b: r(2, 1), n: 1, step: 1 };
    let ok = spec
        .to_factored()
        .and_then(Result::ok)
        .and_then(|(g, _)| {
            let ps = partial_sum(&g, 1, K).ok()?;
            let tb = tail_bound(&g, K).ok()?;
            Some(within_tail(&r(1, 6), &ps, &tb.bound))
        })
        .unwrap_or(false);
    if !ok {
        bad.push("1/((2k+1)(2k+3))");
    }
    VerifyItem::new(
        "million_term_oracle",
        "exact partial sums to K=10^6 plus tail bound bracket 1/4 and 1/6",
        if bad.is_empty() { "both bracketed".to_string() } else { format!("failed {}", bad.join(", ")) },
        0.0,
        bad.is_empty(),
    )
}
