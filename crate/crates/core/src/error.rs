use thiserror::Error;

/// Errors produced anywhere in the decomposition and solving pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("polynomial {0} has no terms")]
    EmptyPolynomial(usize),

    #[error("system is not square: {polynomials} polynomials in {variables} variables")]
    NotSquare {
        polynomials: usize,
        variables: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("monomial map matrix is singular")]
    SingularMap,

    #[error("point has a zero coordinate")]
    ZeroCoordinate,

    #[error("exponent does not fit in a machine integer")]
    ExponentOverflow,

    #[error("support lattice has rank {rank} < {expected}: the family is degenerate")]
    RankDeficient { rank: usize, expected: usize },

    #[error("system is not lacunary")]
    NotLacunary,

    #[error("system is not triangular")]
    NotTriangular,

    #[error("polynomial has degree zero")]
    DegreeZero,

    #[error("singular Jacobian in Newton step")]
    SingularJacobian,

    #[error("Newton iteration did not converge")]
    NoConvergence,

    #[error("start point is not a solution of the start system (residual {0:e})")]
    InvalidStart(f64),

    #[error("eigenvalue iteration did not converge")]
    EigenvalueFailure,

    #[error("base solver failed: {0}")]
    BaseSolverFailure(String),

    #[error("external solver failed: {0}")]
    SubprocessFailure(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
