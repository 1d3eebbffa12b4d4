//! Commands behind the `sparse-decompose` binary, usable as a library.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;
use sparse_decompose::decompose::{
    is_lacunary, is_triangular, lacunary_decomposition, triangular_decomposition, BranchOrder,
};
use sparse_decompose::io::{PolynomialEntry, SolutionFile, SystemFile};
use sparse_decompose::mixedvolume::mixed_volume;
use sparse_decompose::polynomial::SparseSystem;
use sparse_decompose::solver::{solve_decomposable_system, SolveOptions};
use sparse_decompose::Error;

pub use sparse_decompose::external::{solve_external, DEFAULT_TIMEOUT};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_INDECOMPOSABLE: i32 = 5;

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Indecomposable,
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Indecomposable => write!(f, "system is neither lacunary nor triangular"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Indecomposable => EXIT_INDECOMPOSABLE,
            CliError::Core(e) => match e {
                Error::Parse { .. }
                | Error::EmptyPolynomial(_)
                | Error::NotSquare { .. }
                | Error::DimensionMismatch { .. }
                | Error::ZeroCoordinate
                | Error::InvalidInput(_) => EXIT_PARSE,
                Error::RankDeficient { .. } | Error::SingularMap | Error::ExponentOverflow => EXIT_DEGENERATE,
                _ => EXIT_SOLVER,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TriangularSummary {
    /// 0-based polynomial indices.
    pub subset: Vec<usize>,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Analysis {
    pub lacunary: bool,
    pub index: u64,
    pub triangular: Option<TriangularSummary>,
    pub decomposable: bool,
    pub mixed_volume: u64,
}

fn to_u64(v: &BigInt) -> CliResult<u64> {
    v.to_u64().ok_or(CliError::Core(Error::ExponentOverflow))
}

pub fn cmd_analyze(system: &SparseSystem) -> CliResult<Analysis> {
    let supports = system.supports();
    let (lacunary, index) = is_lacunary(&supports)?;
    let triangular = if system.n() >= 2 {
        is_triangular(&supports)?.map(|(subset, k)| TriangularSummary { subset, k })
    } else {
        None
    };
    Ok(Analysis {
        lacunary,
        index: to_u64(&index)?,
        decomposable: lacunary || triangular.is_some(),
        triangular,
        mixed_volume: mixed_volume(&supports)?,
    })
}

pub fn cmd_solve(system: &SparseSystem, opts: &SolveOptions, trace: bool) -> CliResult<SolutionFile> {
    let report = solve_decomposable_system(system, opts)?;
    Ok(SolutionFile::from_report(&report, trace))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DecompositionFile {
    Lacunary {
        index: u64,
        /// Rows of `Φ`; column `j` is the exponent vector of output coordinate `j`.
        phi_matrix: Vec<Vec<i64>>,
        /// `G` with `F = G ∘ Φ` (after translating supports to the origin).
        inner: SystemFile,
    },
    Triangular {
        subset: Vec<usize>,
        k: usize,
        change_matrix: Vec<Vec<i64>>,
        /// The square system in the first `k` new variables.
        subsystem: SystemFile,
        /// The other polynomials in all `n` new variables.
        remainder: Vec<PolynomialEntry>,
    },
}

pub fn cmd_decompose(system: &SparseSystem, order: BranchOrder) -> CliResult<DecompositionFile> {
    let analysis = cmd_analyze(system)?;
    let lacunary_first = analysis.lacunary && (order == BranchOrder::LacunaryFirst || analysis.triangular.is_none());
    if lacunary_first {
        let d = lacunary_decomposition(system)?;
        Ok(DecompositionFile::Lacunary {
            index: to_u64(&d.index)?,
            phi_matrix: d.phi.entries().to_vec(),
            inner: SystemFile::from_system(&d.inner),
        })
    } else if analysis.triangular.is_some() {
        let d = triangular_decomposition(system)?;
        Ok(DecompositionFile::Triangular {
            subset: d.subset.clone(),
            k: d.k,
            change_matrix: d.change.entries().to_vec(),
            subsystem: SystemFile::from_system(&d.subsystem),
            remainder: d.remainder.iter().map(PolynomialEntry::from_polynomial).collect(),
        })
    } else {
        Err(CliError::Indecomposable)
    }
}

pub fn analysis_text(a: &Analysis) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "lacunary: {}", a.lacunary);
    let _ = writeln!(s, "index: {}", a.index);
    match &a.triangular {
        Some(t) => {
            let _ = writeln!(s, "triangular: subset {:?}, k = {}", t.subset, t.k);
        }
        None => {
            let _ = writeln!(s, "triangular: none");
        }
    }
    let _ = writeln!(s, "decomposable: {}", a.decomposable);
    let _ = writeln!(s, "mixed volume: {}", a.mixed_volume);
    s
}

pub fn solutions_text(file: &SolutionFile) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} solution(s)", file.count);
    if let Some(mv) = file.mixed_volume {
        let _ = writeln!(s, "mixed volume: {mv}");
    }
    if let Some(d) = file.deficiency {
        let _ = writeln!(s, "deficiency: {d}");
    }
    for sol in &file.solutions {
        let coords: Vec<String> = sol.point.iter().map(|p| format!("{:+.12e}{:+.12e}i", p[0], p[1])).collect();
        let _ = writeln!(s, "({})  residual {:.2e}", coords.join(", "), sol.residual);
    }
    if let Some(t) = &file.trace {
        let _ = writeln!(s, "trace: {}", serde_json::to_string(t).expect("trace serializes"));
    }
    s
}

pub fn decomposition_text(d: &DecompositionFile) -> String {
    let mut s = String::new();
    match d {
        DecompositionFile::Lacunary { index, phi_matrix, inner } => {
            let _ = writeln!(s, "kind: lacunary");
            let _ = writeln!(s, "index: {index}");
            let _ = writeln!(s, "phi: {phi_matrix:?}");
            let _ = write!(s, "inner:\n{}", inner.to_system().map(|g| g.to_string()).unwrap_or_default());
        }
        DecompositionFile::Triangular { subset, k, change_matrix, subsystem, .. } => {
            let _ = writeln!(s, "kind: triangular");
            let _ = writeln!(s, "subset: {subset:?}");
            let _ = writeln!(s, "k: {k}");
            let _ = writeln!(s, "change: {change_matrix:?}");
            let _ = write!(s, "subsystem:\n{}", subsystem.to_system().map(|g| g.to_string()).unwrap_or_default());
        }
    }
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}
