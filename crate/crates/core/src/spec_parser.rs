//! Parser for the series DSL, e.g. `1/(k*(k+1)^2)` or `(k+1)/((2*k+1)*(2*k+3)*k)`.
//!
//! The denominator is read as a product of linear factors in `k`; non-monic
//! factors are normalized so that `2*k+1` becomes `2·(k+1/2)`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::exact_arith::Rational;
use crate::partial_fractions::{FactoredError, FactoredRational, LinearFactor};
use crate::polynomials::{Degree, Polynomial};
use crate::series_engine::SeriesSpec;

/// Largest exponent accepted after `^`, and largest total multiplicity of
/// a denominator factor.
pub const MAX_EXPONENT: u32 = 64;
/// Largest degree of any intermediate polynomial.
pub const MAX_DEGREE: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseErrorKind {
    Syntax,
    RepeatedRoot,
    NegativeIntegerPole,
    Divergent,
    Unsupported,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::RepeatedRoot => "repeated root",
            ParseErrorKind::NegativeIntegerPole => "pole in summation range",
            ParseErrorKind::Divergent => "divergent series",
            ParseErrorKind::Unsupported => "unsupported input",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{kind} at offset {byte_offset}: {message}")]
pub struct ParseError {
    pub byte_offset: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl ParseError {
    fn new(byte_offset: usize, kind: ParseErrorKind, message: impl Into<String>) -> Self {
        ParseError {
            byte_offset,
            kind,
            message: message.into(),
        }
    }

    fn syntax(byte_offset: usize, message: impl Into<String>) -> Self {
        Self::new(byte_offset, ParseErrorKind::Syntax, message)
    }
}

/// Parses a series summed from `k = 1`.
pub fn parse(input: &str) -> Result<SeriesSpec, ParseError> {
    parse_with_start(input, 1)
}

/// Parses a series summed from `k = start`.
pub fn parse_with_start(input: &str, start: u64) -> Result<SeriesSpec, ParseError> {
    let (term, spans) = parse_term_spans(input)?;
    if start == 0 {
        return Err(ParseError::new(0, ParseErrorKind::Unsupported, "start index must be >= 1"));
    }
    if let Err(FactoredError::PoleInRange { shift, pole, index }) = term.check_start(start) {
        return Err(ParseError::new(
            spans[index],
            ParseErrorKind::NegativeIntegerPole,
            format!("factor k{} vanishes at k = {pole}, inside the summation range k >= {start}", signed(&shift)),
        ));
    }
    Ok(SeriesSpec::GeneralRational { term, start })
}

/// Parses just the term `Q(k)/P(k)`, without a start index.
pub fn parse_term(input: &str) -> Result<FactoredRational, ParseError> {
    parse_term_spans(input).map(|(t, _)| t)
}

fn signed(r: &Rational) -> String {
    if r.is_negative() {
        format!("{r}")
    } else {
        format!("+{r}")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    K,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(n) => write!(f, "number {n}"),
            Tok::K => f.write_str("`k`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn lex(input: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = input.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' => {
                let begin = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = input[begin..i].parse().expect("ascii digits");
                out.push((Tok::Num(n), begin));
                continue;
            }
            b'k' => {
                if bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_') {
                    return Err(ParseError::syntax(i, "unknown identifier; the summation variable is `k`"));
                }
                Tok::K
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => {
                let ch = input[i..].chars().next().expect("in bounds");
                let msg = if ch.is_alphabetic() {
                    format!("unknown identifier `{ch}`; the summation variable is `k`")
                } else {
                    format!("unexpected character `{ch}`")
                };
                return Err(ParseError::syntax(i, msg));
            }
        };
        out.push((tok, i));
        i += 1;
    }
    out.push((Tok::End, input.len()));
    Ok(out)
}

#[derive(Debug, Clone)]
enum Node {
    Num(BigInt),
    K,
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, u32),
}

#[derive(Debug, Clone)]
struct Ast {
    node: Node,
    offset: usize,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<usize, ParseError> {
        if *self.peek() == want {
            Ok(self.bump().1)
        } else {
            Err(ParseError::syntax(
                self.offset(),
                format!("expected {what}, found {}", self.peek()),
            ))
        }
    }

    /// `sum = term {("+"|"-") term}`
    fn sum(&mut self, allow_div: bool) -> Result<Ast, ParseError> {
        let mut lhs = self.term(allow_div)?;
        loop {
            let offset = lhs.offset;
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term(allow_div)?;
                    lhs = Ast { node: Node::Add(Box::new(lhs), Box::new(rhs)), offset };
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term(allow_div)?;
                    lhs = Ast { node: Node::Sub(Box::new(lhs), Box::new(rhs)), offset };
                }
                _ => return Ok(lhs),
            }
        }
    }

    /// `term = unary {("*"|"/") unary}`; `/` only inside parentheses.
    fn term(&mut self, allow_div: bool) -> Result<Ast, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let offset = lhs.offset;
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Ast { node: Node::Mul(Box::new(lhs), Box::new(rhs)), offset };
                }
                Tok::Slash if allow_div => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Ast { node: Node::Div(Box::new(lhs), Box::new(rhs)), offset };
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Ast, ParseError> {
        match self.peek() {
            Tok::Minus => {
                let (_, offset) = self.bump();
                let inner = self.unary()?;
                Ok(Ast { node: Node::Neg(Box::new(inner)), offset })
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    /// `power = primary ["^" integer]`
    fn power(&mut self) -> Result<Ast, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let offset = self.offset();
        match self.bump().0 {
            Tok::Num(n) => match n.to_u32() {
                Some(e) if e <= MAX_EXPONENT => Ok(Ast {
                    offset: base.offset,
                    node: Node::Pow(Box::new(base), e),
                }),
                _ => Err(ParseError::new(
                    offset,
                    ParseErrorKind::Unsupported,
                    format!("exponent {n} exceeds the limit {MAX_EXPONENT}"),
                )),
            },
            other => Err(ParseError::syntax(
                offset,
                format!("expected a nonnegative integer exponent, found {other}"),
            )),
        }
    }

    fn primary(&mut self) -> Result<Ast, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Ast { node: Node::Num(n), offset })
            }
            Tok::K => {
                self.bump();
                Ok(Ast { node: Node::K, offset })
            }
            Tok::LParen => {
                self.bump();
                let mut inner = self.sum(true)?;
                self.expect(Tok::RParen, "`)`")?;
                inner.offset = offset;
                Ok(inner)
            }
            other => Err(ParseError::syntax(
                offset,
                format!("expected a number, `k` or `(`, found {other}"),
            )),
        }
    }
}

fn to_polynomial(ast: &Ast) -> Result<Polynomial, ParseError> {
    Ok(match &ast.node {
        Node::Num(n) => Polynomial::constant(Rational::from(n.clone())),
        Node::K => Polynomial::var(),
        Node::Neg(a) => -&to_polynomial(a)?,
        Node::Add(a, b) => &to_polynomial(a)? + &to_polynomial(b)?,
        Node::Sub(a, b) => &to_polynomial(a)? - &to_polynomial(b)?,
        Node::Mul(a, b) => &to_polynomial(a)? * &to_polynomial(b)?,
        Node::Div(a, b) => {
            let num = to_polynomial(a)?;
            let den = to_polynomial(b)?;
            match den.degree() {
                Degree::NegInfinity => {
                    return Err(ParseError::new(b.offset, ParseErrorKind::Unsupported, "division by zero"))
                }
                Degree::Finite(0) => num.scale(&den.coeff(0).recip()),
                Degree::Finite(_) => {
                    return Err(ParseError::new(
                        b.offset,
                        ParseErrorKind::Unsupported,
                        "division is only allowed by a constant inside a factor",
                    ))
                }
            }
        }
        Node::Pow(a, e) => {
            let base = to_polynomial(a)?;
            let degree = base.degree().finite().unwrap_or(0) * *e as usize;
            if degree > MAX_DEGREE {
                return Err(ParseError::new(
                    ast.offset,
                    ParseErrorKind::Unsupported,
                    format!("polynomial degree {degree} exceeds the limit {MAX_DEGREE}"),
                ));
            }
            base.pow(*e)
        }
    })
}

struct Factors {
    leading: Rational,
    /// (shift, multiplicity, offset of the factor in the input)
    linear: Vec<(Rational, u32, usize)>,
}

fn factorize(ast: &Ast, mult: u32, out: &mut Factors) -> Result<(), ParseError> {
    match &ast.node {
        Node::Mul(a, b) => {
            factorize(a, mult, out)?;
            factorize(b, mult, out)
        }
        Node::Pow(a, e) => {
            let m = mult.saturating_mul(*e);
            if m > MAX_EXPONENT {
                return Err(ParseError::new(
                    ast.offset,
                    ParseErrorKind::Unsupported,
                    format!("multiplicity {m} exceeds the limit {MAX_EXPONENT}"),
                ));
            }
            factorize(a, m, out)
        }
        Node::Neg(a) => {
            if mult % 2 == 1 {
                out.leading = -&out.leading;
            }
            factorize(a, mult, out)
        }
        _ => {
            let p = to_polynomial(ast)?;
            match p.degree() {
                Degree::NegInfinity => Err(ParseError::new(
                    ast.offset,
                    ParseErrorKind::Unsupported,
                    "denominator factor is identically zero",
                )),
                Degree::Finite(0) => {
                    out.leading *= &p.coeff(0).pow(mult as i32);
                    Ok(())
                }
                Degree::Finite(1) => {
                    if mult == 0 {
                        return Ok(());
                    }
                    let g = p.coeff(1);
                    out.leading *= &g.pow(mult as i32);
                    out.linear.push((p.coeff(0) / g, mult, ast.offset));
                    Ok(())
                }
                Degree::Finite(d) => Err(ParseError::new(
                    ast.offset,
                    ParseErrorKind::Unsupported,
                    format!("factor of degree {d}; write the denominator as a product of linear factors in k"),
                )),
            }
        }
    }
}

fn parse_term_spans(input: &str) -> Result<(FactoredRational, Vec<usize>), ParseError> {
    let toks = lex(input)?;
    let mut p = Parser { toks, pos: 0 };
    let numerator_ast = p.sum(false)?;
    p.expect(Tok::Slash, "`/` between numerator and denominator")?;
    let denominator_ast = p.power()?;
    if *p.peek() != Tok::End {
        return Err(ParseError::syntax(
            p.offset(),
            format!("unexpected {} after the denominator", p.peek()),
        ));
    }

    let numerator = to_polynomial(&numerator_ast)?;
    let mut factors = Factors {
        leading: Rational::one(),
        linear: Vec::new(),
    };
    factorize(&denominator_ast, 1, &mut factors)?;
    if factors.leading.is_zero() {
        return Err(ParseError::new(
            denominator_ast.offset,
            ParseErrorKind::Unsupported,
            "denominator is identically zero",
        ));
    }
    for (i, (shift, _, offset)) in factors.linear.iter().enumerate() {
        if let Some((_, _, first)) = factors.linear[..i].iter().find(|(s, _, _)| s == shift) {
            return Err(ParseError::new(
                *offset,
                ParseErrorKind::RepeatedRoot,
                format!(
                    "factor k{} repeats the factor at offset {first}; combine them with `^`",
                    signed(shift)
                ),
            ));
        }
    }
    let spans: Vec<usize> = factors.linear.iter().map(|f| f.2).collect();
    let linear = factors
        .linear
        .into_iter()
        .map(|(s, m, _)| LinearFactor::new(s, m))
        .collect();
    let term = FactoredRational::new(numerator, factors.leading, linear).map_err(|e| match e {
        FactoredError::Divergent { numerator_degree, denominator_degree } => ParseError::new(
            numerator_ast.offset,
            ParseErrorKind::Divergent,
            format!(
                "numerator degree {numerator_degree} plus 2 exceeds denominator degree {denominator_degree}"
            ),
        ),
        FactoredError::NoFactors => ParseError::new(
            denominator_ast.offset,
            ParseErrorKind::Divergent,
            "denominator has no factor in k",
        ),
        other => ParseError::new(denominator_ast.offset, ParseErrorKind::Unsupported, other.to_string()),
    })?;
    Ok((term, spans))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn term(input: &str) -> FactoredRational {
        parse_term(input).unwrap_or_else(|e| panic!("{input}: {e}"))
    }

    fn shifts(f: &FactoredRational) -> Vec<(Rational, u32)> {
        f.factors().iter().map(|x| (x.shift.clone(), x.multiplicity)).collect()
    }

    #[test]
    fn examples() {
        let f = term("1/(k*(k+1)*(k+2))");
        assert_eq!(f.numerator(), &Polynomial::one());
        assert_eq!(shifts(&f), vec![(r(0, 1), 1), (r(1, 1), 1), (r(2, 1), 1)]);

        let f = term("1/(k*(k+1)^2)");
        assert_eq!(shifts(&f), vec![(r(0, 1), 1), (r(1, 1), 2)]);

        let e = parse("(k+1)/(k*(k+2))").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Divergent);

        let f = term("1/((2*k+1)*(2*k+3))");
        assert_eq!(f.leading(), &r(4, 1));
        assert_eq!(shifts(&f), vec![(r(1, 2), 1), (r(3, 2), 1)]);
    }

    #[test]
    fn error_offsets() {
        let e = parse("1/(k").unwrap_err();
        assert_eq!((e.kind, e.byte_offset), (ParseErrorKind::Syntax, 4));
        let e = parse("1/(k*k)").unwrap_err();
        assert_eq!((e.kind, e.byte_offset), (ParseErrorKind::RepeatedRoot, 5));
        let e = parse("1/(k*(k-3))").unwrap_err();
        assert_eq!((e.kind, e.byte_offset), (ParseErrorKind::NegativeIntegerPole, 5));
        assert!(parse_with_start("1/(k*(k-3))", 4).is_ok());
        let e = parse("1/(k*(k^2+1))").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Unsupported);
        let e = parse("1/(x*(x+1))").unwrap_err();
        assert_eq!((e.kind, e.byte_offset), (ParseErrorKind::Syntax, 3));
        let e = parse("1/(k*(k+1)) + 1").unwrap_err();
        assert_eq!((e.kind, e.byte_offset), (ParseErrorKind::Syntax, 12));
        let e = parse("1/(k*(k+1)/k)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Unsupported);
        let e = parse("1/(k*(k+1)^99)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Unsupported);
    }

    #[test]
    fn constants_and_normalization() {
        let f = term("3/(2*k*(k+1))");
        assert_eq!(f.leading(), &r(2, 1));
        assert_eq!(f.numerator(), &Polynomial::from_i64s(&[3]));
        let f = term("1/((1/2*k+1)*(3*k-1)^2)");
        assert_eq!(f.leading(), &r(9, 2));
        assert_eq!(shifts(&f), vec![(r(2, 1), 1), (r(-1, 3), 2)]);
        let f = term("1/(-(k+1)*(k+2))");
        assert_eq!(f.leading(), &r(-1, 1));
        let f = term(" 1 / k^2 ");
        assert_eq!(shifts(&f), vec![(r(0, 1), 2)]);
        let f = term("1/(k*(k+1))^2");
        assert_eq!(shifts(&f), vec![(r(0, 1), 2), (r(1, 1), 2)]);
    }

    const CORPUS: [&str; 30] = [
        "1/(k*(k+1))",
        "1/(k*(k+1)*(k+2))",
        "1/(k*(k+1)*(k+2)*(k+3)*(k+4))",
        "1/(k*(k+1)^2)",
        "1/(k^2*(k+1)^2)",
        "1/((2*k+1)*(2*k+3))",
        "1/((2*k-1)*(2*k+1))",
        "1/(k*(k+2))",
        "1/(k*(k+2)*(k+4))",
        "1/(k*(k+3)*(k+6)*(k+9))",
        "1/k^2",
        "1/k^3",
        "1/(k+1/2)^2",
        "3/(k*(k+1))",
        "(k+1)/(k^2*(k+2)^2)",
        "(2*k-1)/(k*(k+1)*(k+2))",
        "(k^2+1)/(k^2*(k+1)^2)",
        "1/((3*k+1)*(3*k+2)*(3*k+4))",
        "1/((k+1/3)*(k+2/3))",
        "1/(-(k+1)*(k+2))",
        "-1/(k*(k+1))",
        "(1/2)/(k*(k+1))",
        "(k-1/2)/(k*(k+1)*(k+3))",
        "1/((1/2*k+1)*(k+5))",
        "1/((k+7)*(k+1)*(k+4))",
        "1/(k*(k+1))^2",
        "(k^3-k)/(k^3*(k+1)^2*(k+2))",
        "1/(5*k^2)",
        "7/(2*(k+1/4)*(k+3/4)^3)",
        "(3*k^2-1)/(k^2*(k+1)^3)",
    ];

    #[test]
    fn round_trip_corpus() {
        for input in CORPUS {
            let spec = parse(input).unwrap_or_else(|e| panic!("{input}: {e}"));
            let SeriesSpec::GeneralRational { term, .. } = &spec else { unreachable!() };
            let printed = term.to_string();
            let again = parse(&printed).unwrap_or_else(|e| panic!("{input} -> {printed}: {e}"));
            assert_eq!(spec, again, "{input} -> {printed}");
        }
    }

    #[test]
    fn mutations_never_panic() {
        let alphabet: &[u8] = b"k0123456789+-*/^() x.";
        let mut seed = 0x2545_f491_4f6c_dd1du64;
        let mut next = |m: usize| {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed % m as u64) as usize
        };
        for input in CORPUS {
            for _ in 0..200 {
                let mut bytes = input.as_bytes().to_vec();
                for _ in 0..1 + next(3) {
                    let at = next(bytes.len() + 1);
                    match next(3) {
                        0 if at < bytes.len() => {
                            bytes.remove(at);
                        }
                        1 => bytes.insert(at, alphabet[next(alphabet.len())]),
                        _ if at < bytes.len() => bytes[at] = alphabet[next(alphabet.len())],
                        _ => {}
                    }
                }
                let mutated = String::from_utf8(bytes).expect("ascii");
                if let Err(e) = parse(&mutated) {
                    assert!(e.byte_offset <= mutated.len(), "{mutated}: {e}");
                }
            }
        }
    }

    #[test]
    fn error_display_names_offset() {
        let e = parse("1/(k").unwrap_err();
        assert_eq!(e.to_string(), "syntax error at offset 4: expected `)`, found end of input");
    }
}
