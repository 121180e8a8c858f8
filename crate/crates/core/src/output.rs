//! Record format shared by the CLI and the bindings.

use serde::{Deserialize, Serialize};

use crate::series_engine::EvalResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub input: String,
    pub method: String,
    /// `"p/q"` with `q > 0`.
    pub exact: Option<String>,
    /// 17 significant digits.
    pub numeric: String,
    pub error_bound: String,
    pub elapsed_ms: f64,
}

impl OutputRecord {
    pub fn new(input: impl Into<String>, result: &EvalResult, elapsed_ms: f64) -> Self {
        OutputRecord {
            input: input.into(),
            method: result.method.to_string(),
            exact: result.exact.as_ref().map(|e| e.to_ratio_string()),
            numeric: format_sig17(result.numeric),
            error_bound: format!("{:.3e}", result.error_bound),
            elapsed_ms,
        }
    }
}

/// `x` with 17 significant digits: positional for moderate magnitudes,
/// scientific otherwise.
pub fn format_sig17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.0000000000000000".to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    // log10 can land one off near powers of ten; the rendered mantissa decides
    let sci = format!("{x:.16e}");
    let exponent = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse::<i32>().ok())
        .unwrap_or(exponent);
    if (-5..=15).contains(&exponent) {
        format!("{x:.prec$}", prec = (16 - exponent) as usize)
    } else {
        sci
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn digits(s: &str) -> usize {
        let mantissa = s.split('e').next().unwrap();
        let d: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
        d.trim_start_matches('0').len()
    }

    #[test]
    fn seventeen_significant_digits() {
        for x in [0.25, 0.355_065_933_151_773_56, 1.0, 1234.5678, -2.5e-3, 1e-9, 3e20, 9.999_999_999_999_999e2] {
            let s = format_sig17(x);
            assert_eq!(digits(&s), 17, "{x} -> {s}");
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_sig17(0.25), "0.25000000000000000");
    }
}
