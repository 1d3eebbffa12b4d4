//! Sparse Laurent polynomial systems on the algebraic torus.
//!
//! Exponent vectors are stored as columns: the `i`-th polynomial's support is
//! returned by [`exponents`] as an `n × |Aᵢ|` [`IntMatrix`] whose columns are
//! its exponent vectors. Monomial maps use the same convention: column `j` of
//! the matrix is the exponent vector of output coordinate `j`.

mod parse;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::IntMatrix;

pub use parse::parse_system;

/// A finite set of exponent vectors in `Zⁿ`, kept in construction order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Support {
    dim: usize,
    exponents: Vec<Vec<i64>>,
}

impl Support {
    /// Builds a support, rejecting empty sets, ragged vectors and duplicates.
    pub fn new(dim: usize, exponents: Vec<Vec<i64>>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::InvalidInput("empty support".into()));
        }
        for e in &exponents {
            if e.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.len(),
                });
            }
        }
        let mut seen = std::collections::HashSet::new();
        for e in &exponents {
            if !seen.insert(e) {
                return Err(Error::InvalidInput(format!("duplicate exponent {e:?}")));
            }
        }
        Ok(Support { dim, exponents })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<i64>] {
        &self.exponents
    }

    pub fn to_matrix(&self) -> IntMatrix {
        IntMatrix::from_columns(self.dim, &self.exponents)
    }

    /// Lexicographically smallest exponent vector.
    pub fn lex_min(&self) -> &[i64] {
        self.exponents.iter().min().expect("nonempty support")
    }

    /// Differences `a - base` for every `a ≠ base`, where `base` is the
    /// lexicographic minimum.
    pub fn differences(&self) -> Vec<Vec<i64>> {
        let base = self.lex_min();
        self.exponents
            .iter()
            .filter(|e| e.as_slice() != base)
            .map(|e| e.iter().zip(base).map(|(a, b)| a - b).collect())
            .collect()
    }
}

/// `∑ c_α x^α` with every coefficient nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePolynomial {
    support: Support,
    coefficients: Vec<Complex64>,
}

impl SparsePolynomial {
    /// Collects terms, summing coefficients of equal exponents and dropping
    /// exact zeros. Fails with `EmptyPolynomial(0)` if nothing survives.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i64>, Complex64)>,
    {
        let mut order: Vec<Vec<i64>> = Vec::new();
        let mut sums: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.len(),
                });
            }
            match sums.get_mut(&e) {
                Some(acc) => *acc += c,
                None => {
                    order.push(e.clone());
                    sums.insert(e, c);
                }
            }
        }
        let mut exponents = Vec::with_capacity(order.len());
        let mut coefficients = Vec::with_capacity(order.len());
        for e in order {
            let c = sums[&e];
            if !c.is_zero() {
                exponents.push(e);
                coefficients.push(c);
            }
        }
        if exponents.is_empty() {
            return Err(Error::EmptyPolynomial(0));
        }
        Ok(SparsePolynomial {
            support: Support { dim, exponents },
            coefficients,
        })
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.support.dim
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i64], Complex64)> + '_ {
        self.support
            .exponents
            .iter()
            .map(Vec::as_slice)
            .zip(self.coefficients.iter().copied())
    }

    /// Same exponents, new coefficients (zeros are dropped).
    pub fn with_coefficients(&self, coefficients: &[Complex64]) -> Result<Self> {
        assert_eq!(coefficients.len(), self.len());
        Self::from_terms(
            self.dim(),
            self.support.exponents.iter().cloned().zip(coefficients.iter().copied()),
        )
    }

    /// Value at a point with nonzero coordinates.
    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        self.terms().map(|(e, c)| c * monomial(x, e)).sum()
    }

    /// `∑ |c_α| |x^α|`, the natural scale for judging the size of a residual.
    pub fn magnitude(&self, x: &[Complex64]) -> f64 {
        self.terms().map(|(e, c)| c.norm() * monomial(x, e).norm()).sum()
    }

    /// Sum of absolute values of coefficients.
    pub fn l1_norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm()).sum()
    }
}

/// `x^e` for a Laurent exponent `e`.
pub(crate) fn monomial(x: &[Complex64], e: &[i64]) -> Complex64 {
    let mut v = Complex64::new(1.0, 0.0);
    for (xi, &k) in x.iter().zip(e) {
        if k != 0 {
            v *= xi.powi(k as i32);
        }
    }
    v
}

/// A square system `F = (f₁, …, f_n)` of Laurent polynomials in `n` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSystem {
    variables: Vec<String>,
    polynomials: Vec<SparsePolynomial>,
}

impl SparseSystem {
    pub fn new(variables: Vec<String>, polynomials: Vec<SparsePolynomial>) -> Result<Self> {
        let n = variables.len();
        if polynomials.len() != n {
            return Err(Error::NotSquare {
                polynomials: polynomials.len(),
                variables: n,
            });
        }
        if n == 0 {
            return Err(Error::InvalidInput("system has no variables".into()));
        }
        for (i, p) in polynomials.iter().enumerate() {
            if p.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.dim(),
                });
            }
            if p.is_empty() {
                return Err(Error::EmptyPolynomial(i));
            }
        }
        Ok(SparseSystem {
            variables,
            polynomials,
        })
    }

    /// System with default variable names `x1, …, xn`.
    pub fn with_default_names(polynomials: Vec<SparsePolynomial>) -> Result<Self> {
        let n = polynomials.first().map_or(0, SparsePolynomial::dim);
        Self::new(default_names("x", n), polynomials)
    }

    /// Builds a system from supports (as lists of exponent vectors) and
    /// coefficient lists, the two-argument form of the input.
    pub fn from_supports(supports: &[Vec<Vec<i64>>], coefficients: &[Vec<Complex64>]) -> Result<Self> {
        if supports.len() != coefficients.len() {
            return Err(Error::InvalidInput(
                "supports and coefficients differ in length".into(),
            ));
        }
        let n = supports.len();
        let polys = supports
            .iter()
            .zip(coefficients)
            .enumerate()
            .map(|(i, (s, c))| {
                if s.len() != c.len() {
                    return Err(Error::InvalidInput(format!(
                        "polynomial {i}: {} exponents but {} coefficients",
                        s.len(),
                        c.len()
                    )));
                }
                SparsePolynomial::from_terms(n, s.iter().cloned().zip(c.iter().copied()))
                    .map_err(|e| reindex_empty(e, i))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::with_default_names(polys)
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn polynomials(&self) -> &[SparsePolynomial] {
        &self.polynomials
    }

    pub fn supports(&self) -> Vec<Support> {
        self.polynomials.iter().map(|p| p.support.clone()).collect()
    }

    pub fn coefficients(&self) -> Vec<Vec<Complex64>> {
        self.polynomials.iter().map(|p| p.coefficients.clone()).collect()
    }

    /// Same supports, new coefficients.
    pub fn with_coefficients(&self, coefficients: &[Vec<Complex64>]) -> Result<Self> {
        let polys = self
            .polynomials
            .iter()
            .zip(coefficients)
            .enumerate()
            .map(|(i, (p, c))| p.with_coefficients(c).map_err(|e| reindex_empty(e, i)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.variables.clone(), polys)
    }

    /// Largest `|α|₁` over all exponents of all polynomials.
    pub fn max_abs_degree(&self) -> i64 {
        self.polynomials
            .iter()
            .flat_map(|p| p.support.exponents.iter())
            .map(|e| e.iter().map(|v| v.abs()).sum::<i64>())
            .max()
            .unwrap_or(0)
    }

    pub(crate) fn eval_unchecked(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.polynomials.iter().map(|p| p.eval(x)).collect()
    }

    /// Values, Jacobian and per-system magnitude `∑ᵢ ∑ |c||x^α|`.
    ///
    /// Derivatives use `c αᵢ x^{α−eᵢ}` directly, so this is valid at points
    /// with zero coordinates as long as the exponents are nonnegative there.
    pub(crate) fn eval_with_jacobian(&self, x: &[Complex64]) -> (DVector<Complex64>, DMatrix<Complex64>, f64) {
        let n = self.n();
        let mut f = DVector::zeros(n);
        let mut jac = DMatrix::zeros(n, n);
        let mut scale = 0.0;
        let mut powers = vec![Complex64::zero(); n];
        for (i, p) in self.polynomials.iter().enumerate() {
            for (e, c) in p.terms() {
                for k in 0..n {
                    powers[k] = if e[k] == 0 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        x[k].powi(e[k] as i32)
                    };
                }
                let term = c * powers.iter().product::<Complex64>();
                f[i] += term;
                scale += term.norm();
                for k in 0..n {
                    if e[k] == 0 {
                        continue;
                    }
                    let mut d = c * e[k] as f64 * x[k].powi((e[k] - 1) as i32);
                    for (l, pw) in powers.iter().enumerate() {
                        if l != k {
                            d *= pw;
                        }
                    }
                    jac[(i, k)] += d;
                }
            }
        }
        (f, jac, scale)
    }

    /// `∑ᵢ ∑ |c||x^α|` over all terms.
    pub fn magnitude(&self, x: &[Complex64]) -> f64 {
        self.polynomials.iter().map(|p| p.magnitude(x)).sum()
    }

    /// Euclidean norm of `F(x)`.
    pub fn residual(&self, x: &[Complex64]) -> f64 {
        self.eval_unchecked(x).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn renamed(mut self, variables: Vec<String>) -> Self {
        assert_eq!(variables.len(), self.n());
        self.variables = variables;
        self
    }
}

fn reindex_empty(e: Error, i: usize) -> Error {
    match e {
        Error::EmptyPolynomial(_) => Error::EmptyPolynomial(i),
        other => other,
    }
}

pub(crate) fn default_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// The multiplicative map `x ↦ (x^{M[:,1]}, …, x^{M[:,n]})` for an integer
/// matrix `M` with nonzero determinant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialMap {
    matrix: IntMatrix,
    det: BigInt,
    entries: Vec<Vec<i64>>,
}

impl MonomialMap {
    pub fn new(matrix: IntMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(Error::InvalidInput("monomial map must be square".into()));
        }
        let det = matrix.det();
        if det.is_zero() {
            return Err(Error::SingularMap);
        }
        let entries = matrix.to_i64_rows().ok_or(Error::ExponentOverflow)?;
        Ok(MonomialMap {
            matrix,
            det,
            entries,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(IntMatrix::identity(n)).expect("identity is invertible")
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn det(&self) -> &BigInt {
        &self.det
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Number of preimages of a generic point, `|det M|`.
    pub fn degree(&self) -> BigInt {
        num_traits::Signed::abs(&self.det)
    }

    pub fn is_unimodular(&self) -> bool {
        self.degree() == BigInt::from(1)
    }

    /// `M · e` with overflow checking.
    pub fn apply_to_exponent(&self, e: &[i64]) -> Result<Vec<i64>> {
        let n = self.dim();
        if e.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: e.len(),
            });
        }
        (0..n)
            .map(|i| {
                let mut acc: i64 = 0;
                for (m, v) in self.entries[i].iter().zip(e) {
                    acc = m
                        .checked_mul(*v)
                        .and_then(|p| acc.checked_add(p))
                        .ok_or(Error::ExponentOverflow)?;
                }
                Ok(acc)
            })
            .collect()
    }

    /// Rows of `M` as machine integers.
    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }
}

/// A point of `(C^×)ⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPoint(pub Vec<Complex64>);

impl TorusPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.iter().any(|c| c.is_zero()) {
            return Err(Error::ZeroCoordinate);
        }
        Ok(TorusPoint(coords))
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn min_modulus(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Exponent matrices of each polynomial, columns in construction order.
pub fn exponents(system: &SparseSystem) -> Vec<IntMatrix> {
    system
        .polynomials
        .iter()
        .map(|p| p.support.to_matrix())
        .collect()
}

/// Multiplies each polynomial by `x^{-a}`, where `a` is its lexicographically
/// smallest exponent, so that every support contains the origin.
///
/// Torus zeros are unchanged. Returns the shifts `a`.
pub fn translate_to_origin(system: &SparseSystem) -> (SparseSystem, Vec<Vec<i64>>) {
    let mut shifts = Vec::with_capacity(system.n());
    let polys = system
        .polynomials
        .iter()
        .map(|p| {
            let base = p.support.lex_min().to_vec();
            let exps = p
                .support
                .exponents
                .iter()
                .map(|e| e.iter().zip(&base).map(|(a, b)| a - b).collect())
                .collect();
            shifts.push(base);
            SparsePolynomial {
                support: Support {
                    dim: p.dim(),
                    exponents: exps,
                },
                coefficients: p.coefficients.clone(),
            }
        })
        .collect();
    (
        SparseSystem {
            variables: system.variables.clone(),
            polynomials: polys,
        },
        shifts,
    )
}

/// The system `H` with `H(y) = F(map_point(M, y))`: every exponent `a` of `F`
/// becomes `M·a`, coefficients unchanged.
pub fn apply_monomial_substitution(system: &SparseSystem, map: &MonomialMap) -> Result<SparseSystem> {
    if map.dim() != system.n() {
        return Err(Error::DimensionMismatch {
            expected: system.n(),
            found: map.dim(),
        });
    }
    let polys = system
        .polynomials
        .iter()
        .map(|p| {
            let exps = p
                .support
                .exponents
                .iter()
                .map(|e| map.apply_to_exponent(e))
                .collect::<Result<Vec<_>>>()?;
            Ok(SparsePolynomial {
                support: Support {
                    dim: p.dim(),
                    exponents: exps,
                },
                coefficients: p.coefficients.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseSystem {
        variables: system.variables.clone(),
        polynomials: polys,
    })
}

/// `y_j = ∏ᵢ xᵢ^{M[i][j]}`.
pub fn map_point(map: &MonomialMap, x: &TorusPoint) -> TorusPoint {
    TorusPoint(map_coords(map, &x.0))
}

pub(crate) fn map_coords(map: &MonomialMap, x: &[Complex64]) -> Vec<Complex64> {
    let n = map.dim();
    assert_eq!(x.len(), n, "point dimension does not match map");
    (0..n)
        .map(|j| {
            let mut v = Complex64::new(1.0, 0.0);
            for (i, xi) in x.iter().enumerate() {
                let k = map.entries[i][j];
                if k != 0 {
                    v *= pow_i64(*xi, k);
                }
            }
            v
        })
        .collect()
}

pub(crate) fn pow_i64(x: Complex64, k: i64) -> Complex64 {
    match k.to_i32() {
        Some(k) => x.powi(k),
        None => x.powf(k as f64),
    }
}

/// `F(x)`; every coordinate of `x` must be nonzero.
pub fn evaluate(system: &SparseSystem, x: &TorusPoint) -> Result<Vec<Complex64>> {
    if x.dim() != system.n() {
        return Err(Error::DimensionMismatch {
            expected: system.n(),
            found: x.dim(),
        });
    }
    if x.0.iter().any(|c| c.norm() == 0.0) {
        return Err(Error::ZeroCoordinate);
    }
    Ok(system.eval_unchecked(&x.0))
}
