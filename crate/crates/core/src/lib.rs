//! Exact and certified numeric evaluation of convergent series
//! `Σ_{k>=1} Q(k)/P(k)` with `P` given as a product of linear factors.
//!
//! ```
//! use seriesum::{evaluate, parse, Method};
//!
//! let spec = parse("1/(k*(k+1)*(k+2))").unwrap();
//! let value = evaluate(&spec, Method::Auto, 1e-12).unwrap();
//! assert_eq!(value.exact.unwrap().to_string(), "1/4");
//! ```
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod exact_arith;
pub mod oracle;
pub mod output;
pub mod partial_fractions;
pub mod polynomials;
pub mod quadrature;
pub mod series_engine;
pub mod spec_parser;
pub mod special_functions;
pub mod verify;

pub use exact_arith::Rational;
pub use partial_fractions::{decompose, FactoredRational, LinearFactor, PartialFractionDecomposition};
pub use polynomials::Polynomial;
pub use series_engine::{evaluate, EvalError, EvalResult, Method, MethodTag, SeriesSpec};
pub use spec_parser::{parse, parse_with_start, ParseError, ParseErrorKind};
