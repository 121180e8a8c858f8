use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use seriesum::oracle::{partial_sum_fast, tail_bound};
use seriesum::output::OutputRecord;
use seriesum::partial_fractions::decompose;
use seriesum::series_engine::{evaluate, EvalResult, Method, MethodTag, SeriesSpec};
use seriesum::spec_parser::{parse_with_start, ParseError};
use seriesum::verify::{paper_suite, VerifyItem};
use seriesum::Rational;

const EXIT_PARSE: u8 = 2;
const EXIT_EVAL: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(name = "seriesum", version, about = "Exact and certified sums of rational series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a series given in the DSL, e.g. "1/(k*(k+1)^2)".
    Eval {
        series: String,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
        /// Absolute tolerance.
        #[arg(long, env = "SERIESUM_TOL", default_value = "1e-12")]
        tol: f64,
        /// First summation index.
        #[arg(long = "from", default_value = "1")]
        from: u64,
        /// With --method oracle: compensated floating-point partial sums up to 10^6 terms.
        #[arg(long)]
        fast: bool,
        #[arg(long)]
        json: bool,
    },
    /// Closed form (or certified value) of a named family.
    #[command(allow_negative_numbers = true)]
    Family {
        #[arg(value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        a: Option<Rational>,
        #[arg(long)]
        b: Option<Rational>,
        #[arg(long)]
        l: Option<u32>,
        #[arg(long)]
        x: Option<f64>,
        #[arg(long, env = "SERIESUM_TOL", default_value = "1e-12")]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Print the partial-fraction coefficients A_ij, ordered by shift then order.
    Decompose {
        series: String,
        #[arg(long)]
        json: bool,
    },
    /// Run the reproduction battery.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Closed,
    Polygamma,
    Integral,
    Oracle,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Closed => Method::Closed,
            MethodArg::Polygamma => Method::Polygamma,
            MethodArg::Integral => Method::Integral,
            MethodArg::Oracle => Method::Oracle,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Andreoli,
    Arith,
    Step,
    Overn,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Paper,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Eval {
            series,
            method,
            tol,
            from,
            fast,
            json,
        } => run_eval(&series, method.into(), tol, from, fast, json),
        Command::Family {
            family,
            n,
            a,
            b,
            l,
            x,
            tol,
            json,
        } => run_family(family, n, a, b, l, x, tol, json),
        Command::Decompose { series, json } => run_decompose(&series, json),
        Command::Verify { suite: SuiteArg::Paper, json } => run_verify(json),
    }
}

fn report_parse_error(input: &str, e: &ParseError) -> ExitCode {
    eprintln!("error: {e}");
    eprintln!("  {input}");
    eprintln!("  {}^", " ".repeat(input[..e.byte_offset.min(input.len())].chars().count()));
    ExitCode::from(EXIT_PARSE)
}

fn eval_error(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_EVAL)
}

fn print_record(record: &OutputRecord, json: bool) {
    if json {
        println!("{}", serde_json::to_string(record).expect("serializable"));
        return;
    }
    println!("input:       {}", record.input);
    println!("method:      {}", record.method);
    if let Some(exact) = &record.exact {
        println!("exact:       {exact}");
    }
    println!("numeric:     {}", record.numeric);
    println!("error_bound: {}", record.error_bound);
    println!("elapsed_ms:  {:.3}", record.elapsed_ms);
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn run_eval(input: &str, method: Method, tol: f64, from: u64, fast: bool, json: bool) -> ExitCode {
    let start = Instant::now();
    let spec = match parse_with_start(input, from) {
        Ok(spec) => spec,
        Err(e) => return report_parse_error(input, &e),
    };
    let result = if fast && method == Method::Oracle {
        fast_oracle(&spec, tol)
    } else {
        evaluate(&spec, method, tol).map_err(|e| e.to_string())
    };
    match result {
        Ok(res) => {
            print_record(&OutputRecord::new(input, &res, elapsed_ms(start)), json);
            ExitCode::SUCCESS
        }
        Err(e) => eval_error(e),
    }
}

/// Floating-point partial sum up to the first cutoff whose tail bound meets
/// the tolerance, at most 10^6 terms.
fn fast_oracle(spec: &SeriesSpec, tol: f64) -> Result<EvalResult, String> {
    let SeriesSpec::GeneralRational { term, start } = spec else {
        return Err("--fast applies to DSL input only".into());
    };
    let tol_r = Rational::from_f64(tol).ok_or("tolerance must be finite")?;
    let mut cutoff = start + 999;
    let cap = start + 999_999;
    let mut tail = tail_bound(term, cutoff).map_err(|e| e.to_string())?;
    while tail.bound > tol_r && cutoff < cap {
        cutoff = (cutoff * 4).min(cap);
        tail = tail_bound(term, cutoff).map_err(|e| e.to_string())?;
    }
    let (sum, err) = partial_sum_fast(term, *start, cutoff).map_err(|e| e.to_string())?;
    Ok(EvalResult {
        exact: None,
        numeric: sum,
        error_bound: err + tail.bound.to_f64(),
        method: MethodTag::Oracle,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_family(
    family: FamilyArg,
    n: Option<u32>,
    a: Option<Rational>,
    b: Option<Rational>,
    l: Option<u32>,
    x: Option<f64>,
    tol: f64,
    json: bool,
) -> ExitCode {
    let start = Instant::now();
    let missing = |name: &str| {
        eprintln!("error: --{name} is required for this family");
        ExitCode::from(EXIT_PARSE)
    };
    let (spec, method) = match family {
        FamilyArg::Andreoli => match n {
            Some(n) => (SeriesSpec::AndreoliFamily { n }, Method::Closed),
            None => return missing("n"),
        },
        FamilyArg::Arith => match (a, b, n) {
            (Some(a), Some(b), Some(n)) => (SeriesSpec::ArithmeticFamily { a, b, n }, Method::Closed),
            (None, _, _) => return missing("a"),
            (_, None, _) => return missing("b"),
            _ => return missing("n"),
        },
        FamilyArg::Step => match (l, n) {
            (Some(step), Some(n)) => (SeriesSpec::StepFamily { step, n }, Method::Closed),
            (None, _) => return missing("l"),
            _ => return missing("n"),
        },
        FamilyArg::Overn => match (x, l) {
            (Some(x), Some(step)) => (SeriesSpec::OverNFamily { x, step }, Method::Auto),
            (None, _) => return missing("x"),
            _ => return missing("l"),
        },
    };
    match evaluate(&spec, method, tol) {
        Ok(res) => {
            print_record(&OutputRecord::new(spec.to_string(), &res, elapsed_ms(start)), json);
            ExitCode::SUCCESS
        }
        Err(e) => eval_error(e),
    }
}

#[derive(Serialize)]
struct DecompositionRecord {
    input: String,
    leading: Rational,
    terms: Vec<TermRecord>,
}

#[derive(Serialize)]
struct TermRecord {
    shift: Rational,
    order: u32,
    coeff: Rational,
}

fn run_decompose(input: &str, json: bool) -> ExitCode {
    let term = match seriesum::spec_parser::parse_term(input) {
        Ok(t) => t,
        Err(e) => return report_parse_error(input, &e),
    };
    let d = decompose(&term);
    if json {
        let record = DecompositionRecord {
            input: input.to_string(),
            leading: d.leading.clone(),
            terms: d
                .terms
                .iter()
                .map(|t| TermRecord {
                    shift: t.shift.clone(),
                    order: t.order,
                    coeff: t.coeff.clone(),
                })
                .collect(),
        };
        println!("{}", serde_json::to_string(&record).expect("serializable"));
    } else {
        println!("input:   {input}");
        println!("leading: {}", d.leading.to_ratio_string());
        for t in &d.terms {
            println!("({}, {}): {}", t.shift.to_ratio_string(), t.order, t.coeff.to_ratio_string());
        }
    }
    ExitCode::SUCCESS
}

fn run_verify(json: bool) -> ExitCode {
    let start = Instant::now();
    let items: Vec<VerifyItem> = paper_suite();
    let all = items.iter().all(|i| i.pass);
    if json {
        println!("{}", serde_json::to_string(&items).expect("serializable"));
    } else {
        for item in &items {
            println!(
                "{} {:<22} {} (expected: {}; tolerance {})",
                if item.pass { "PASS" } else { "FAIL" },
                item.name,
                item.got,
                item.expected,
                if item.tolerance == 0.0 { "exact".to_string() } else { format!("{:e}", item.tolerance) },
            );
        }
        let passed = items.iter().filter(|i| i.pass).count();
        println!("{passed}/{} passed in {:.1} s", items.len(), start.elapsed().as_secs_f64());
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    }
}
