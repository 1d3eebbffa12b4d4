//! Text format for systems.
//!
//! ```text
//! vars: x, y            # optional; otherwise first-appearance order
//! 1 - 2*x*y^2 + 3*x^2*y - 4*x^3*y^3
//! (2+1.5i)*x^-1*y + 7; x - y
//! ```
//!
//! One polynomial per line, or several separated by `;`. A term is a product
//! of factors joined by `*`; a factor is a real number, a parenthesised
//! complex number `(a+bi)`, or a variable with an optional integer power.

use std::fmt;

use num_complex::Complex64;

use super::{SparsePolynomial, SparseSystem};
use crate::error::{Error, Result};

/// Parses the text format into a square system.
pub fn parse_system(text: &str) -> Result<SparseSystem> {
    let mut declared: Option<Vec<String>> = None;
    let mut seen: Vec<String> = Vec::new();
    let mut raw: Vec<(usize, Vec<(Vec<(usize, i64)>, Complex64)>)> = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let content = line.split('#').next().unwrap_or("");
        let trimmed = content.trim_start();
        if let Some(rest) = trimmed.strip_prefix("vars:") {
            if declared.is_some() || !raw.is_empty() {
                return Err(Error::Parse {
                    line: lineno,
                    column: 1,
                    message: "variable header must come first and only once".into(),
                });
            }
            let offset = content.len() - rest.len();
            declared = Some(parse_header(rest, lineno, offset)?);
            continue;
        }
        let mut start = 0;
        for piece in content.split(';') {
            if !piece.trim().is_empty() {
                let mut p = Parser {
                    chars: piece.chars().collect(),
                    pos: 0,
                    line: lineno,
                    col0: content[..start].chars().count(),
                    declared: declared.as_deref(),
                    seen: &mut seen,
                };
                let terms = p.polynomial()?;
                raw.push((lineno, terms));
            }
            start += piece.len() + 1;
        }
    }

    let vars = declared.unwrap_or(seen);
    let n = vars.len();
    if raw.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "expected at least one polynomial".into(),
        });
    }
    let mut polys = Vec::with_capacity(raw.len());
    for (i, (lineno, terms)) in raw.into_iter().enumerate() {
        let dense = terms.into_iter().map(|(powers, c)| {
            let mut e = vec![0i64; n];
            for (v, k) in powers {
                e[v] += k;
            }
            (e, c)
        });
        match SparsePolynomial::from_terms(n, dense) {
            Ok(p) => polys.push(p),
            Err(Error::EmptyPolynomial(_)) => {
                return Err(Error::Parse {
                    line: lineno,
                    column: 1,
                    message: format!("polynomial {} cancels to zero", i + 1),
                })
            }
            Err(e) => return Err(e),
        }
    }
    SparseSystem::new(vars, polys)
}

fn parse_header(rest: &str, line: usize, offset: usize) -> Result<Vec<String>> {
    let mut vars = Vec::new();
    let mut col = offset;
    for name in rest.split(',') {
        let t = name.trim();
        let lead = name.len() - name.trim_start().len();
        if !is_identifier(t) {
            return Err(Error::Parse {
                line,
                column: col + lead + 1,
                message: format!("expected variable name, found {t:?}"),
            });
        }
        if vars.iter().any(|v| v == t) {
            return Err(Error::Parse {
                line,
                column: col + lead + 1,
                message: format!("variable {t} declared twice"),
            });
        }
        vars.push(t.to_string());
        col += name.len() + 1;
    }
    Ok(vars)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

type Term = (Vec<(usize, i64)>, Complex64);

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col0: usize,
    declared: Option<&'a [String]>,
    seen: &'a mut Vec<String>,
}

impl Parser<'_> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: self.line,
            column: self.col0 + self.pos + 1,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn found(&mut self) -> String {
        match self.peek() {
            Some(c) => format!("'{c}'"),
            None => "end of input".into(),
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            let found = self.found();
            self.error(format!("expected '{c}', found {found}"))
        }
    }

    fn polynomial(&mut self) -> Result<Vec<Term>> {
        let mut terms = Vec::new();
        let mut sign = match self.peek() {
            Some('-') => {
                self.pos += 1;
                -1.0
            }
            Some('+') => {
                self.pos += 1;
                1.0
            }
            _ => 1.0,
        };
        loop {
            let (powers, c) = self.term()?;
            terms.push((powers, c * sign));
            match self.peek() {
                Some('+') => sign = 1.0,
                Some('-') => sign = -1.0,
                None => break,
                Some(_) => {
                    let found = self.found();
                    return self.error(format!("expected '+', '-', '*' or end of polynomial, found {found}"));
                }
            }
            self.pos += 1;
        }
        Ok(terms)
    }

    fn term(&mut self) -> Result<Term> {
        let mut coeff: Option<Complex64> = None;
        let mut scale = |v: Complex64| coeff = Some(coeff.map_or(v, |c| c * v));
        let mut powers = Vec::new();
        loop {
            match self.peek() {
                Some('(') => scale(self.complex()?),
                Some(c) if c.is_ascii_digit() || c == '.' => scale(Complex64::new(self.real()?, 0.0)),
                Some(c) if c.is_alphabetic() || c == '_' => {
                    let v = self.variable()?;
                    let k = if self.peek() == Some('^') {
                        self.pos += 1;
                        self.integer()?
                    } else {
                        1
                    };
                    powers.push((v, k));
                }
                _ => {
                    let found = self.found();
                    return self.error(format!("expected number, '(' or variable, found {found}"));
                }
            }
            if self.peek() == Some('*') {
                self.pos += 1;
            } else {
                return Ok((powers, coeff.unwrap_or(Complex64::new(1.0, 0.0))));
            }
        }
    }

    fn real(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.chars.get(p.pos).is_some_and(char::is_ascii_digit) {
                p.pos += 1;
            }
        };
        digits(self);
        if self.chars.get(self.pos) == Some(&'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.chars.get(self.pos), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.chars.get(self.pos), Some('+' | '-')) {
                self.pos += 1;
            }
            if self.chars.get(self.pos).is_some_and(char::is_ascii_digit) {
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                self.error(format!("expected number, found {s:?}"))
            }
        }
    }

    fn signed_real(&mut self) -> Result<f64> {
        let sign = match self.peek() {
            Some('-') => {
                self.pos += 1;
                -1.0
            }
            Some('+') => {
                self.pos += 1;
                1.0
            }
            _ => 1.0,
        };
        self.skip_ws();
        Ok(sign * self.real()?)
    }

    /// `( a )`, `( a ± b i )` or `( b i )`.
    fn complex(&mut self) -> Result<Complex64> {
        self.expect('(')?;
        let first = self.signed_real()?;
        if self.peek() == Some('i') {
            self.pos += 1;
            self.expect(')')?;
            return Ok(Complex64::new(0.0, first));
        }
        let value = match self.peek() {
            Some(')') => Complex64::new(first, 0.0),
            Some(s @ ('+' | '-')) => {
                self.pos += 1;
                self.skip_ws();
                let b = self.real()?;
                self.expect('i')?;
                Complex64::new(first, if s == '-' { -b } else { b })
            }
            _ => {
                let found = self.found();
                return self.error(format!("expected '+', '-', 'i' or ')', found {found}"));
            }
        };
        self.expect(')')?;
        Ok(value)
    }

    fn integer(&mut self) -> Result<i64> {
        let paren = self.peek() == Some('(');
        if paren {
            self.pos += 1;
        }
        let neg = match self.peek() {
            Some('-') => {
                self.pos += 1;
                true
            }
            Some('+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(char::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            let found = self.found();
            return self.error(format!("expected integer exponent, found {found}"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        let Ok(v) = s.parse::<i64>() else {
            self.pos = start;
            return self.error("exponent out of range");
        };
        if paren {
            self.expect(')')?;
        }
        Ok(if neg { -v } else { v })
    }

    fn variable(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_alphanumeric() || *c == '_')
        {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        if let Some(decl) = self.declared {
            match decl.iter().position(|v| *v == name) {
                Some(i) => Ok(i),
                None => {
                    self.pos = start;
                    self.error(format!("undeclared variable {name}"))
                }
            }
        } else if let Some(i) = self.seen.iter().position(|v| *v == name) {
            Ok(i)
        } else {
            self.seen.push(name);
            Ok(self.seen.len() - 1)
        }
    }
}

fn write_coefficient(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    let sign = if c.im.is_sign_negative() { '-' } else { '+' };
    write!(f, "({}{}{}i)", c.re, sign, c.im.abs())
}

impl fmt::Display for SparseSystem {
    /// Renders the system in the text format; parsing the output gives back
    /// the same system with bit-identical coefficients.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vars: {}", self.variables.join(", "))?;
        for p in &self.polynomials {
            for (t, (e, c)) in p.terms().enumerate() {
                if t > 0 {
                    write!(f, " + ")?;
                }
                write_coefficient(f, c)?;
                for (v, &k) in self.variables.iter().zip(e) {
                    match k {
                        0 => {}
                        1 => write!(f, "*{v}")?,
                        _ => write!(f, "*{v}^{k}")?,
                    }
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
