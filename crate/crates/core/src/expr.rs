//! A small expression language for series.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary ("*" unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" INT)?
//! primary := INT ("/" INT)? | "x" INT | "(" expr ")" | NAME "(" args? ")" | NAME
//! args    := arg ("," arg)*
//! arg     := "-"? INT ("/" INT)? | STRING
//! ```
//!
//! `^` binds tighter than unary minus, which binds tighter than `*`; `+`,
//! `-` and `*` associate left. Variables are `x1`…`xn`. The only named
//! primaries are the oracle constructors `geom2`, `geom1`, `expprod`, `poly`.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::composition::CoefficientOracle;
use crate::error::Error as SeriesError;
use crate::series::{Rational, TruncatedSeries};

#[derive(Debug, Clone, PartialEq)]
pub enum OracleSpec {
    Geom2(Rational),
    Geom1 { ratio: Rational, axis: usize },
    ExpProd,
    Poly(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Literal(Rational),
    /// 0-based variable index.
    Variable(usize),
    Neg(Box<Expression>),
    Add(Box<Expression>, Box<Expression>),
    Sub(Box<Expression>, Box<Expression>),
    Mul(Box<Expression>, Box<Expression>),
    Pow(Box<Expression>, u32),
    Oracle(OracleSpec),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("variable x{index} at byte {offset} is out of range for n = {n}")]
    VariableRange { offset: usize, index: usize, n: usize },
    #[error("0^0 at byte {offset} is undefined")]
    ZeroToZero { offset: usize },
    #[error("unknown function {name:?} at byte {offset}")]
    UnknownFunction { offset: usize, name: String },
    #[error("bad arguments to {name} at byte {offset}: {reason}")]
    Arguments {
        offset: usize,
        name: String,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Var(usize),
    Ident(String),
    Str(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(v) => format!("integer {v}"),
            Tok::Var(i) => format!("x{i}"),
            Tok::Ident(s) => format!("name {s:?}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = simple {
            out.push((start, t));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let v = BigInt::from_str(&text[start..i]).expect("digits");
            out.push((start, Tok::Int(v)));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &text[start..i];
            let var = word
                .strip_prefix('x')
                .filter(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
                .and_then(|rest| rest.parse::<usize>().ok());
            match var {
                Some(k) => out.push((start, Tok::Var(k))),
                None => out.push((start, Tok::Ident(word.to_string()))),
            }
        } else if c == b'"' {
            i += 1;
            while i < bytes.len() && bytes[i] != b'"' {
                i += 1;
            }
            if i == bytes.len() {
                return Err(ParseError::Syntax {
                    offset: start,
                    expected: vec!["closing '\"'"],
                    found: "end of input".into(),
                });
            }
            out.push((start, Tok::Str(text[start + 1..i].to_string())));
            i += 1;
        } else {
            let ch = text[start..].chars().next().expect("in bounds");
            return Err(ParseError::Syntax {
                offset: start,
                expected: vec!["number", "variable", "operator", "'('"],
                found: format!("{ch:?}"),
            });
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected,
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok, name: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(vec![name]))
        }
    }

    fn expr(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expression::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expression::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            lhs = Expression::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expression, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expression::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expression, ParseError> {
        let base_offset = self.offset();
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exp = match self.bump() {
            (_, Tok::Int(v)) => v,
            (offset, t) => {
                return Err(ParseError::Syntax {
                    offset,
                    expected: vec!["nonnegative integer exponent"],
                    found: t.describe(),
                })
            }
        };
        let exp = u32::try_from(&exp).map_err(|_| ParseError::Syntax {
            offset: base_offset,
            expected: vec!["exponent below 2^32"],
            found: exp.to_string(),
        })?;
        if exp == 0 && matches!(&base, Expression::Literal(c) if c.is_zero()) {
            return Err(ParseError::ZeroToZero { offset: base_offset });
        }
        if *self.peek() == Tok::Caret {
            return Err(self.unexpected(vec!["operator other than a second '^'"]));
        }
        Ok(Expression::Pow(Box::new(base), exp))
    }

    fn rational_literal(&mut self, num: BigInt, offset: usize) -> Result<Rational, ParseError> {
        if *self.peek() != Tok::Slash {
            return Ok(Rational::from_integer(num));
        }
        self.bump();
        match self.bump() {
            (_, Tok::Int(den)) if !den.is_zero() => Ok(Rational::new(num, den)),
            (_, Tok::Int(_)) => Err(ParseError::Syntax {
                offset,
                expected: vec!["nonzero denominator"],
                found: "0".into(),
            }),
            (off, t) => Err(ParseError::Syntax {
                offset: off,
                expected: vec!["integer denominator"],
                found: t.describe(),
            }),
        }
    }

    fn primary(&mut self) -> Result<Expression, ParseError> {
        if !matches!(self.peek(), Tok::Int(_) | Tok::Var(_) | Tok::LParen | Tok::Ident(_)) {
            return Err(self.unexpected(vec!["number", "variable", "'('", "'-'"]));
        }
        let (offset, tok) = self.bump();
        match tok {
            Tok::Int(v) => Ok(Expression::Literal(self.rational_literal(v, offset)?)),
            Tok::Var(k) => {
                if k == 0 || k > self.n {
                    return Err(ParseError::VariableRange {
                        offset,
                        index: k,
                        n: self.n,
                    });
                }
                Ok(Expression::Variable(k - 1))
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => self.oracle_call(name, offset),
            _ => unreachable!("checked above"),
        }
    }

    fn args(&mut self) -> Result<Vec<(usize, Arg)>, ParseError> {
        let mut out = Vec::new();
        if *self.peek() != Tok::LParen {
            return Ok(out);
        }
        self.bump();
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(out);
        }
        loop {
            let offset = self.offset();
            let negative = if *self.peek() == Tok::Minus {
                self.bump();
                true
            } else {
                false
            };
            let arg = match self.peek().clone() {
                Tok::Int(v) => {
                    self.bump();
                    let r = self.rational_literal(v, offset)?;
                    Arg::Number(if negative { -r } else { r })
                }
                Tok::Str(s) if !negative => {
                    self.bump();
                    Arg::Text(s)
                }
                _ => return Err(self.unexpected(vec!["number", "string"])),
            };
            out.push((offset, arg));
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => {
                    self.bump();
                    return Ok(out);
                }
                _ => return Err(self.unexpected(vec!["','", "')'"])),
            }
        }
    }

    fn oracle_call(&mut self, name: String, offset: usize) -> Result<Expression, ParseError> {
        let args = self.args()?;
        let bad = |reason: &str| ParseError::Arguments {
            offset,
            name: name.clone(),
            reason: reason.to_string(),
        };
        let spec = match (name.as_str(), args.as_slice()) {
            ("geom2", [(_, Arg::Number(c))]) => OracleSpec::Geom2(c.clone()),
            ("geom2", _) => return Err(bad("expected geom2(c)")),
            ("geom1", [(_, Arg::Number(r)), (_, Arg::Number(axis))]) => {
                let axis = positive_index(axis).ok_or_else(|| bad("axis must be a positive integer"))?;
                if axis > self.n {
                    return Err(bad("axis exceeds n"));
                }
                OracleSpec::Geom1 {
                    ratio: r.clone(),
                    axis: axis - 1,
                }
            }
            ("geom1", _) => return Err(bad("expected geom1(r, axis)")),
            ("expprod", []) => OracleSpec::ExpProd,
            ("expprod", _) => return Err(bad("expprod takes no arguments")),
            ("poly", [(_, Arg::Text(path))]) => OracleSpec::Poly(path.clone()),
            ("poly", _) => return Err(bad("expected poly(\"file\")")),
            _ => return Err(ParseError::UnknownFunction { offset, name }),
        };
        Ok(Expression::Oracle(spec))
    }
}

enum Arg {
    Number(Rational),
    Text(String),
}

fn positive_index(r: &Rational) -> Option<usize> {
    if !r.is_integer() {
        return None;
    }
    usize::try_from(r.to_integer()).ok().filter(|&v| v >= 1)
}

/// Parses `text` as an expression in the variables x1…xn.
pub fn parse_expression(text: &str, n: usize) -> Result<Expression, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, n };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected(vec!["operator", "end of input"]));
    }
    Ok(e)
}

/// Parses an oracle given either as `name(args)` or as `name:params`
/// (`geom2:1`, `geom1:1/2,1`, `expprod`, `poly:path.json`).
pub fn parse_oracle_spec(text: &str, n: usize) -> Result<OracleSpec, ParseError> {
    let text = text.trim();
    let call = match text.split_once(':') {
        Some(("poly", path)) => format!("poly(\"{path}\")"),
        Some((name, params)) => format!("{name}({params})"),
        None => text.to_string(),
    };
    match parse_expression(&call, n)? {
        Expression::Oracle(spec) => Ok(spec),
        _ => Err(ParseError::Syntax {
            offset: 0,
            expected: vec!["oracle constructor (geom2, geom1, expprod, poly)"],
            found: format!("{text:?}"),
        }),
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("oracle constructors describe infinite series; use compose-unit or check-comp")]
    OracleInExpression,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

impl Expression {
    pub fn contains_oracle(&self) -> bool {
        match self {
            Expression::Oracle(_) => true,
            Expression::Literal(_) | Expression::Variable(_) => false,
            Expression::Neg(e) | Expression::Pow(e, _) => e.contains_oracle(),
            Expression::Add(a, b) | Expression::Sub(a, b) | Expression::Mul(a, b) => {
                a.contains_oracle() || b.contains_oracle()
            }
        }
    }
}

/// Evaluates an oracle-free expression to an exact series in `n` variables
/// truncated at `order`.
pub fn eval_expression(e: &Expression, n: usize, order: i32) -> Result<TruncatedSeries, EvalError> {
    Ok(match e {
        Expression::Literal(c) => TruncatedSeries::constant(n, order, c.clone()),
        Expression::Variable(i) => {
            if *i >= n {
                return Err(SeriesError::Dimension {
                    expected: n,
                    found: i + 1,
                }
                .into());
            }
            TruncatedSeries::variable(n, order, *i)
        }
        Expression::Neg(a) => eval_expression(a, n, order)?.neg(),
        Expression::Add(a, b) => eval_expression(a, n, order)?.add(&eval_expression(b, n, order)?)?,
        Expression::Sub(a, b) => eval_expression(a, n, order)?.sub(&eval_expression(b, n, order)?)?,
        Expression::Mul(a, b) => eval_expression(a, n, order)?.mul(&eval_expression(b, n, order)?)?,
        Expression::Pow(a, m) => eval_expression(a, n, order)?.pow(*m),
        Expression::Oracle(_) => return Err(EvalError::OracleInExpression),
    })
}

/// Builds the oracle; `load_poly` resolves `poly(path)` to a series.
pub fn build_oracle(
    spec: &OracleSpec,
    n: usize,
    load_poly: impl FnOnce(&str) -> Result<TruncatedSeries, String>,
) -> Result<CoefficientOracle, String> {
    match spec {
        OracleSpec::Geom2(c) => {
            if n != 2 {
                return Err(format!("geom2 is a two-variable series, got n = {n}"));
            }
            Ok(CoefficientOracle::geom2(c.clone()))
        }
        OracleSpec::Geom1 { ratio, axis } => {
            CoefficientOracle::geom1(n, ratio.clone(), *axis).map_err(|e| e.to_string())
        }
        OracleSpec::ExpProd => Ok(CoefficientOracle::expprod(n)),
        OracleSpec::Poly(path) => {
            let s = load_poly(path)?;
            if s.n() != n {
                return Err(format!("poly file has n = {}, expected {n}", s.n()));
            }
            Ok(CoefficientOracle::polynomial(&s))
        }
    }
}
