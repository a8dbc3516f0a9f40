//! Series documents on disk and series as text.
//!
//! A series document is
//!
//! ```json
//! {"n": 2, "order": 3, "terms": [
//!   {"exp": [0, 0], "num": "1", "den": "1"},
//!   {"exp": [1, 1], "num": "-1", "den": "2"}
//! ]}
//! ```
//!
//! with terms in (total degree, lex) order and num/den as decimal strings.
//! [`write_series`] always emits this exact layout, so a canonical file
//! survives a read/write cycle byte for byte.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Deserialize;
use thiserror::Error;

use crate::multiindex::MultiIndex;
use crate::series::{Rational, TruncatedSeries};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed series document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad number {0:?}")]
    Number(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error(transparent)]
    Series(#[from] crate::error::Error),
}

#[derive(Deserialize)]
struct TermDoc {
    exp: Vec<u32>,
    num: String,
    den: String,
}

#[derive(Deserialize)]
struct SeriesDoc {
    n: usize,
    order: i64,
    terms: Vec<TermDoc>,
}

fn parse_int(s: &str) -> Result<BigInt, FormatError> {
    BigInt::from_str(s.trim()).map_err(|_| FormatError::Number(s.to_string()))
}

fn doc_to_series(doc: SeriesDoc) -> Result<TruncatedSeries, FormatError> {
    let mut terms = Vec::with_capacity(doc.terms.len());
    for t in doc.terms {
        let num = parse_int(&t.num)?;
        let den = parse_int(&t.den)?;
        if den.is_zero() {
            return Err(FormatError::ZeroDenominator);
        }
        terms.push((MultiIndex::new(t.exp), Rational::new(num, den)));
    }
    Ok(TruncatedSeries::make(doc.n, doc.order, terms)?)
}

/// Parses a series document; the result is canonical whatever the input order.
pub fn read_series(text: &str) -> Result<TruncatedSeries, FormatError> {
    doc_to_series(serde_json::from_str(text)?)
}

/// Parses a JSON array of series documents.
pub fn read_series_list(text: &str) -> Result<Vec<TruncatedSeries>, FormatError> {
    let docs: Vec<SeriesDoc> = serde_json::from_str(text)?;
    docs.into_iter().map(doc_to_series).collect()
}

fn write_doc(out: &mut String, s: &TruncatedSeries, indent: &str) {
    let _ = write!(out, "{indent}{{\"n\": {}, \"order\": {}, \"terms\": [", s.n(), s.order());
    let mut first = true;
    for (idx, c) in s.terms() {
        out.push_str(if first { "\n" } else { ",\n" });
        first = false;
        let exps: Vec<String> = idx.exponents().iter().map(u32::to_string).collect();
        let _ = write!(
            out,
            "{indent}  {{\"exp\": [{}], \"num\": \"{}\", \"den\": \"{}\"}}",
            exps.join(", "),
            c.numer(),
            c.denom()
        );
    }
    if !first {
        let _ = write!(out, "\n{indent}");
    }
    out.push_str("]}");
}

/// Canonical series document, newline-terminated.
pub fn write_series(s: &TruncatedSeries) -> String {
    let mut out = String::new();
    write_doc(&mut out, s, "");
    out.push('\n');
    out
}

/// JSON array of series documents.
pub fn write_series_list<'a>(list: impl IntoIterator<Item = &'a TruncatedSeries>) -> String {
    let mut out = String::from("[");
    let mut first = true;
    for s in list {
        out.push_str(if first { "\n" } else { ",\n" });
        first = false;
        write_doc(&mut out, s, "  ");
    }
    out.push_str(if first { "]\n" } else { "\n]\n" });
    out
}

/// Square array of series documents (a Jacobian).
pub fn write_series_matrix(rows: &[Vec<TruncatedSeries>]) -> String {
    let mut out = String::from("[");
    for (i, row) in rows.iter().enumerate() {
        out.push_str(if i == 0 { "\n  [" } else { ",\n  [" });
        for (j, s) in row.iter().enumerate() {
            out.push_str(if j == 0 { "\n" } else { ",\n" });
            write_doc(&mut out, s, "    ");
        }
        out.push_str("\n  ]");
    }
    out.push_str("\n]\n");
    out
}

pub fn format_rational(c: &Rational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn format_monomial(idx: &MultiIndex) -> String {
    idx.exponents()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| {
            if e == 1 {
                format!("x{}", i + 1)
            } else {
                format!("x{}^{}", i + 1, e)
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// Series as an expression, e.g. `1 - x1 + 1/2*x1*x2^2`; reparses to itself.
pub fn format_series(s: &TruncatedSeries) -> String {
    let mut out = String::new();
    for (idx, c) in s.terms() {
        let negative = c.is_negative();
        let mag = c.abs();
        let body = if idx.is_zero() {
            format_rational(&mag)
        } else if mag.is_one() {
            format_monomial(idx)
        } else {
            format!("{}*{}", format_rational(&mag), format_monomial(idx))
        };
        match (out.is_empty(), negative) {
            (true, false) => out.push_str(&body),
            (true, true) => {
                out.push('-');
                out.push_str(&body);
            }
            (false, false) => {
                out.push_str(" + ");
                out.push_str(&body);
            }
            (false, true) => {
                out.push_str(" - ");
                out.push_str(&body);
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
