//! lp/v1 text format.
//!
//! One constraint per line: `c1*x1 + c2*x2 ... <= r # tag` (or `>=`).
//! Coefficients are rationals (`3`, `-2/5`, `0.25`) or integer polynomials in
//! `t`, written bare (`t`, `2t^2`) or parenthesized (`(2t^3-3t^2-10t+12)`).
//! A bare variable has coefficient 1. Blank lines and lines starting with `#`
//! are ignored. Variables are numbered in order of first appearance.

use std::fmt;

use num_bigint::{BigInt, Sign};
use num_traits::One;

use super::parametric::{ParamRow, ParamSystem};
use super::poly::{Interval, ParamPoly};
use super::system::LinearSystem;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct LpError {
    pub line: usize,
    pub message: String,
}

/// Rational coefficient or a polynomial in `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Coef {
    Rat(Rational),
    Poly(ParamPoly),
}

impl Coef {
    fn parse(s: &str) -> Result<Coef, String> {
        let s = s.trim();
        if s.contains('t') {
            s.parse::<ParamPoly>().map(Coef::Poly).map_err(|e| e.to_string())
        } else {
            let inner = s.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(s);
            rational::parse_rational(inner).map(Coef::Rat).map_err(|e| e.to_string())
        }
    }

    fn negate(self) -> Coef {
        match self {
            Coef::Rat(r) => Coef::Rat(-r),
            Coef::Poly(p) => Coef::Poly(-&p),
        }
    }
}

/// Parsed lp/v1 document: variable names plus rows with polynomial entries
/// scaled to integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpDocument {
    pub var_names: Vec<String>,
    pub rows: Vec<ParamRow>,
}

impl LpDocument {
    pub fn is_parametric(&self) -> bool {
        self.rows
            .iter()
            .any(|r| r.coeffs.iter().chain(std::iter::once(&r.rhs)).any(|p| !p.is_constant()))
    }

    pub fn to_param_system(&self, interval: Interval) -> Result<ParamSystem, super::LinError> {
        let mut sys = ParamSystem::new(self.var_names.clone(), interval)?;
        for row in &self.rows {
            sys.push(row.clone())?;
        }
        Ok(sys)
    }

    /// The system at parameter value `t` (any value for a constant system).
    pub fn instantiate(&self, t: &Rational) -> LinearSystem {
        let mut sys = LinearSystem::with_names(self.var_names.clone());
        for row in &self.rows {
            sys.push(row.instantiate(t)).expect("row width matches");
        }
        sys
    }
}

pub fn parse_lp(text: &str) -> Result<LpDocument, LpError> {
    let mut names: Vec<String> = Vec::new();
    let mut raw: Vec<(Vec<(usize, Coef)>, Coef, String)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let err = |message: String| LpError { line: i + 1, message };
        let (body, tag) = match line.split_once('#') {
            Some((b, t)) => (b.trim(), t.trim().to_string()),
            None => (line.trim(), String::new()),
        };
        if body.is_empty() {
            continue;
        }
        let (lhs, rhs, flip) = if let Some((l, r)) = body.split_once("<=") {
            (l, r, false)
        } else if let Some((l, r)) = body.split_once(">=") {
            (l, r, true)
        } else {
            return Err(err("expected `<=` or `>=`".into()));
        };
        let mut terms = Vec::new();
        for term in split_terms(lhs) {
            let (coef, var) = parse_term(&term).map_err(&err)?;
            let idx = match names.iter().position(|n| *n == var) {
                Some(idx) => idx,
                None => {
                    names.push(var);
                    names.len() - 1
                }
            };
            terms.push((idx, if flip { coef.negate() } else { coef }));
        }
        let rhs = Coef::parse(rhs).map_err(&err)?;
        raw.push((terms, if flip { rhs.negate() } else { rhs }, tag));
    }
    let rows = raw
        .into_iter()
        .map(|(terms, rhs, tag)| integer_row(names.len(), terms, rhs, tag))
        .collect();
    Ok(LpDocument { var_names: names, rows })
}

/// Splits `a*x + (t-1)*y - z` at top-level signs, keeping each sign.
fn split_terms(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut prev = ' ';
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        let boundary = depth == 0
            && (c == '+' || c == '-')
            && !cur.trim().is_empty()
            && !matches!(prev, '^' | '*' | '+' | '-');
        if boundary {
            out.push(std::mem::take(&mut cur));
        }
        cur.push(c);
        if !c.is_whitespace() {
            prev = c;
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur);
    }
    out
}

fn parse_term(term: &str) -> Result<(Coef, String), String> {
    let compact: String = term.chars().filter(|c| !c.is_whitespace()).collect();
    let (neg, body) = match compact.strip_prefix('-') {
        Some(b) => (true, b.to_string()),
        None => (false, compact.strip_prefix('+').unwrap_or(&compact).to_string()),
    };
    let (coef, var) = match body.rfind('*') {
        Some(pos) => (Coef::parse(&body[..pos])?, body[pos + 1..].to_string()),
        None => (Coef::Rat(Rational::one()), body),
    };
    let valid = var.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && var.chars().all(|c| c.is_alphanumeric() || c == '_')
        && var != "t";
    if !valid {
        return Err(format!("bad variable name {var:?}"));
    }
    Ok((if neg { coef.negate() } else { coef }, var))
}

/// Scales a mixed row so every entry is an integer polynomial.
fn integer_row(n: usize, terms: Vec<(usize, Coef)>, rhs: Coef, tag: String) -> ParamRow {
    let rats: Vec<Rational> = terms
        .iter()
        .map(|(_, c)| c)
        .chain(std::iter::once(&rhs))
        .filter_map(|c| match c {
            Coef::Rat(r) => Some(r.clone()),
            Coef::Poly(_) => None,
        })
        .collect();
    let scale: BigInt = rational::common_denominator(&rats);
    let to_poly = |c: &Coef| match c {
        Coef::Rat(r) => ParamPoly::constant((r * Rational::from_integer(scale.clone())).to_integer()),
        Coef::Poly(p) => p.scale(&scale),
    };
    let mut coeffs = vec![ParamPoly::zero(); n];
    for (v, c) in &terms {
        coeffs[*v] = &coeffs[*v] + &to_poly(c);
    }
    ParamRow {
        coeffs,
        rhs: to_poly(&rhs),
        tag,
    }
}

/// Writes rows in lp/v1 form.
pub fn write_lp(names: &[String], rows: &[ParamRow]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&LpLine { names, row }.to_string());
        out.push('\n');
    }
    out
}

struct LpLine<'a> {
    names: &'a [String],
    row: &'a ParamRow,
}

fn coef_text(p: &ParamPoly) -> String {
    if p.is_constant() {
        p.to_string()
    } else {
        format!("({p})")
    }
}

impl fmt::Display for LpLine<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut lhs = String::new();
        for (c, name) in self.row.coeffs.iter().zip(self.names).filter(|(c, _)| !c.is_zero()) {
            let negative = c.is_constant() && c.coeffs().first().is_some_and(|k| k.sign() == Sign::Minus);
            match (lhs.is_empty(), negative) {
                (true, _) => lhs.push_str(&format!("{}*{name}", coef_text(c))),
                (false, true) => lhs.push_str(&format!(" - {}*{name}", coef_text(&-c))),
                (false, false) => lhs.push_str(&format!(" + {}*{name}", coef_text(c))),
            }
        }
        if lhs.is_empty() {
            lhs.push('0');
        }
        write!(f, "{lhs} <= {}", coef_text(&self.row.rhs))?;
        if !self.row.tag.is_empty() {
            write!(f, " # {}", self.row.tag)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn constant_rows() {
        let doc = parse_lp("x + 2*y <= 3 # a\n# comment\n\n-x >= -1/2\n").unwrap();
        assert_eq!(doc.var_names, vec!["x", "y"]);
        assert!(!doc.is_parametric());
        let sys = doc.instantiate(&int(0));
        assert_eq!(sys.rows()[0].coeffs, vec![int(1), int(2)]);
        assert_eq!(sys.rows()[0].tag, "a");
        // -x >= -1/2 becomes 2x <= 1
        assert_eq!(sys.rows()[1].coeffs, vec![int(2), int(0)]);
        assert_eq!(sys.rows()[1].rhs, int(1));
    }

    #[test]
    fn parametric_rows() {
        let doc = parse_lp("3*w1 - t*w3 <= 0 # s\n(2t^3-3t^2-10t+12)*w9 - w1 <= 0\n").unwrap();
        assert!(doc.is_parametric());
        assert_eq!(doc.var_names, vec!["w1", "w3", "w9"]);
        assert_eq!(doc.rows[0].coeffs[1], "-t".parse().unwrap());
        assert_eq!(doc.rows[1].coeffs[2], "2t^3-3t^2-10t+12".parse().unwrap());
        let sys = doc.instantiate(&ratio(3, 2));
        assert_eq!(sys.rows()[0].coeffs[1], ratio(-3, 2));
    }

    #[test]
    fn round_trip() {
        let text = "3*w1 + (-t)*w3 <= 0 # s\n-1*w1 <= -1\n-1*w1 + -2*w3 - 1*w4 <= 0\n";
        let doc = parse_lp(text).unwrap();
        let again = parse_lp(&write_lp(&doc.var_names, &doc.rows)).unwrap();
        assert_eq!(doc, again);
    }

    #[test]
    fn errors_carry_line() {
        let e = parse_lp("x <= 1\nx < 2\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse_lp("2*3 <= 1").is_err());
        assert!(parse_lp("x <= 1/0").is_err());
    }
}
