//! JSON interchange formats for systems and solution sets.
//!
//! Coefficients and coordinates are `[re, im]` number pairs. `serde_json`
//! renders doubles in shortest round-trip form, so writing and re-reading a
//! file reproduces every value bit for bit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{parse_system, SparsePolynomial, SparseSystem, TorusPoint};
use crate::solver::{SolveReport, TraceNode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub vars: Vec<String>,
    pub polynomials: Vec<PolynomialEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialEntry {
    pub terms: Vec<TermEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermEntry {
    pub coeff: [f64; 2],
    pub exponents: Vec<i64>,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

impl PolynomialEntry {
    pub fn from_polynomial(p: &SparsePolynomial) -> Self {
        PolynomialEntry {
            terms: p
                .terms()
                .map(|(e, c)| TermEntry {
                    coeff: [c.re, c.im],
                    exponents: e.to_vec(),
                })
                .collect(),
        }
    }
}

impl SystemFile {
    pub fn from_system(system: &SparseSystem) -> Self {
        SystemFile {
            vars: system.variables().to_vec(),
            polynomials: system.polynomials().iter().map(PolynomialEntry::from_polynomial).collect(),
        }
    }

    pub fn to_system(&self) -> Result<SparseSystem> {
        let n = self.vars.len();
        let polys = self
            .polynomials
            .iter()
            .enumerate()
            .map(|(i, p)| {
                if let Some(t) = p.terms.iter().find(|t| t.exponents.len() != n) {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: t.exponents.len(),
                    });
                }
                SparsePolynomial::from_terms(
                    n,
                    p.terms.iter().map(|t| (t.exponents.clone(), Complex64::new(t.coeff[0], t.coeff[1]))),
                )
                .map_err(|e| match e {
                    Error::EmptyPolynomial(_) => Error::EmptyPolynomial(i),
                    e => e,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SparseSystem::new(self.vars.clone(), polys)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(json_error)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system files always serialize")
    }
}

/// Reads a system given either as a `SystemFile` document or in the text
/// grammar; JSON is recognised by a leading `{`.
pub fn read_system(text: &str) -> Result<SparseSystem> {
    if text.trim_start().starts_with('{') {
        SystemFile::from_json(text)?.to_system()
    } else {
        parse_system(text)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionEntry {
    pub point: Vec<[f64; 2]>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub solutions: Vec<SolutionEntry>,
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixed_volume: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deficiency: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceNode>,
}

impl SolutionFile {
    pub fn from_report(report: &SolveReport, with_trace: bool) -> Self {
        SolutionFile {
            solutions: report
                .solutions
                .iter()
                .map(|s| SolutionEntry {
                    point: s.point.coords().iter().map(|z| [z.re, z.im]).collect(),
                    residual: s.residual,
                })
                .collect(),
            count: report.solutions.len(),
            mixed_volume: report.mixed_volume,
            deficiency: report.deficiency,
            trace: with_trace.then(|| report.trace.clone()),
        }
    }

    /// Points of the file; entries with a zero coordinate are rejected.
    pub fn points(&self) -> Result<Vec<TorusPoint>> {
        self.solutions
            .iter()
            .map(|s| TorusPoint::new(s.point.iter().map(|p| Complex64::new(p[0], p[1])).collect()))
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SolutionFile = serde_json::from_str(text).map_err(json_error)?;
        if file.count != file.solutions.len() {
            return Err(Error::InvalidInput(format!(
                "count {} does not match {} listed solutions",
                file.count,
                file.solutions.len()
            )));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution files always serialize")
    }
}
