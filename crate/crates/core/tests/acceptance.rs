//! One PASS/FAIL line per acceptance criterion, each at its stated tolerance.
//! Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use seriesum::verify::{self, VerifyItem};

type Check = fn() -> VerifyItem;

fn main() -> ExitCode {
    let criteria: Vec<(u32, &str, Vec<Check>)> = vec![
        (1, "Andreoli closed form, oracle to 10^4 and 10^6, routes within 1e-9", vec![
            verify::andreoli_closed_form,
            verify::million_term_oracle,
        ]),
        (2, "Andreoli partial-fraction coefficients exact for n=1..8", vec![verify::andreoli_coefficients]),
        (3, "arithmetic family: 20 random instances against oracle and integral", vec![verify::arithmetic_family]),
        (4, "step-2 family against double factorials and oracle", vec![verify::step2_family]),
        (5, "step-l family for l=1..4, n=1..5 against oracle", vec![verify::step_l_family]),
        (6, "single-integral reduction at 1e-10", vec![verify::feynman_reduction]),
        (7, "over-n family: integral vs alternating series within 1e-11", vec![verify::over_n_family]),
        (8, "repeated-root series by polygamma and integral within 1e-10", vec![verify::repeated_root_series]),
        (9, "property battery (full proptest suites run as unit tests)", vec![verify::property_battery]),
        (10, "two-parameter families against their reductions", vec![verify::conclusion_families]),
    ];

    let suite_start = Instant::now();
    let mut failed = 0;
    for (number, label, checks) in &criteria {
        let start = Instant::now();
        let items: Vec<VerifyItem> = checks.iter().map(|c| c()).collect();
        let pass = items.iter().all(|i| i.pass);
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {number:>2}: {} {label} [{:.2} s]",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        for item in items.iter().filter(|i| !i.pass) {
            println!("              {}: got {}; expected {}", item.name, item.got, item.expected);
        }
    }
    let wall = suite_start.elapsed().as_secs_f64();
    println!("suite wall time {wall:.1} s (target < 30 s)");
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
