//! Exact integer matrix algebra.
//!
//! Everything here works over arbitrary-precision integers. The main entry
//! point is [`smith_normal_form`], which produces unimodular `U`, `V` and a
//! diagonal `D` with `D = U·A·V` and `d₁ | d₂ | … | d_r`. Rank and sublattice
//! index are read off the diagonal.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows of machine integers.
    ///
    /// Panics if the rows have different lengths.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = BigInt::from(v);
            }
        }
        m
    }

    /// Builds an `n × columns.len()` matrix whose columns are the given vectors.
    pub fn from_columns<R: AsRef<[i64]>>(n: usize, columns: &[R]) -> Self {
        let mut m = Self::zeros(n, columns.len());
        for (j, col) in columns.iter().enumerate() {
            let col = col.as_ref();
            assert_eq!(col.len(), n, "column has wrong length");
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = BigInt::from(v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub(crate) fn from_bigint_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        IntMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub(crate) fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    /// Submatrix of the given row and column ranges.
    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let mut m = Self::zeros(rows.len(), cols.len());
        for (a, i) in rows.clone().enumerate() {
            for (b, j) in cols.clone().enumerate() {
                m[(a, b)] = self[(i, j)].clone();
            }
        }
        m
    }

    /// Columns `cols` placed side by side.
    pub fn hstack(blocks: &[&IntMatrix]) -> Self {
        let rows = blocks.first().map_or(0, |b| b.rows);
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            assert_eq!(b.rows, rows);
            for i in 0..rows {
                for j in 0..b.cols {
                    m[(i, offset + j)] = b[(i, j)].clone();
                }
            }
            offset += b.cols;
        }
        m
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(BigInt::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m: Vec<Vec<BigInt>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                    Some(p) => {
                        m.swap(k, p);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    m[i][j] = v / &prev;
                }
            }
            prev = m[k][k].clone();
        }
        sign * &m[n - 1][n - 1]
    }

    /// Entry converted to `i64`, if it fits.
    pub fn get_i64(&self, i: usize, j: usize) -> Option<i64> {
        self[(i, j)].to_i64()
    }

    /// Whole matrix as machine integers, if every entry fits.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.to_i64()).collect())
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// `row[target] += q · row[source]`
    fn add_row_multiple(&mut self, target: usize, source: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = &self[(source, j)] * q;
            self[(target, j)] += v;
        }
    }

    /// `col[target] += q · col[source]`
    fn add_col_multiple(&mut self, target: usize, source: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = &self[(i, source)] * q;
            self[(i, target)] += v;
        }
    }

    /// Replaces rows `(a, b)` by `t · (row a, row b)ᵀ` for a 2×2 matrix `t`.
    fn combine_rows(&mut self, a: usize, b: usize, t: &[[BigInt; 2]; 2]) {
        for j in 0..self.cols {
            let x = self[(a, j)].clone();
            let y = self[(b, j)].clone();
            self[(a, j)] = &t[0][0] * &x + &t[0][1] * &y;
            self[(b, j)] = &t[1][0] * &x + &t[1][1] * &y;
        }
    }

    /// Replaces columns `(a, b)` by `(col a, col b) · t` for a 2×2 matrix `t`.
    fn combine_cols(&mut self, a: usize, b: usize, t: &[[BigInt; 2]; 2]) {
        for i in 0..self.rows {
            let x = self[(i, a)].clone();
            let y = self[(i, b)].clone();
            self[(i, a)] = &x * &t[0][0] + &y * &t[1][0];
            self[(i, b)] = &x * &t[0][1] + &y * &t[1][1];
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{}x{}", self.rows, self.cols)?;
        f.debug_list()
            .entries((0..self.rows).map(|i| self.row(i).iter().map(ToString::to_string).collect::<Vec<_>>()))
            .finish()
    }
}

/// Result of [`smith_normal_form`]: `d = u · a · v` with `u`, `v` unimodular.
///
/// The inverses of `u` and `v` are tracked alongside so callers never have to
/// invert a unimodular matrix themselves.
#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    pub u_inv: IntMatrix,
    pub v_inv: IntMatrix,
}

impl SmithDecomposition {
    /// Nonzero diagonal entries `d₁ | d₂ | … | d_r`.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols()))
            .map(|i| self.d[(i, i)].clone())
            .take_while(|x| !x.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

/// Smith normal form `D = U·A·V` with nonnegative diagonal and `dᵢ | dᵢ₊₁`.
///
/// Pivots are the smallest nonzero absolute value in the remaining submatrix
/// (first in row-major order on ties), so the output is deterministic.
pub fn smith_normal_form(a: &IntMatrix) -> SmithDecomposition {
    let (m, n) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut u_inv = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);
    let mut v_inv = IntMatrix::identity(n);

    let mut rank = 0;
    for t in 0..m.min(n) {
        loop {
            let Some((pi, pj)) = smallest_nonzero(&d, t) else {
                break;
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            u_inv.swap_cols(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);
            v_inv.swap_rows(t, pj);

            let pivot = d[(t, t)].clone();
            let mut clean = true;
            for i in t + 1..m {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = d[(i, t)].div_floor(&pivot);
                let neg = -&q;
                d.add_row_multiple(i, t, &neg);
                u.add_row_multiple(i, t, &neg);
                u_inv.add_col_multiple(t, i, &q);
                clean &= d[(i, t)].is_zero();
            }
            for j in t + 1..n {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = d[(t, j)].div_floor(&pivot);
                let neg = -&q;
                d.add_col_multiple(j, t, &neg);
                v.add_col_multiple(j, t, &neg);
                v_inv.add_row_multiple(t, j, &q);
                clean &= d[(t, j)].is_zero();
            }
            if clean {
                rank = t + 1;
                break;
            }
        }
        if rank <= t {
            break;
        }
        if d[(t, t)].is_negative() {
            for j in 0..n {
                d[(t, j)] = -&d[(t, j)];
            }
            for j in 0..m {
                u[(t, j)] = -&u[(t, j)];
                u_inv[(j, t)] = -&u_inv[(j, t)];
            }
        }
    }

    // gcd fix-up: replace (dᵢ, dⱼ) by (gcd, lcm) until the chain divides.
    for i in 0..rank {
        for j in i + 1..rank {
            let a = d[(i, i)].clone();
            let b = d[(j, j)].clone();
            if b.is_multiple_of(&a) {
                continue;
            }
            let e = a.extended_gcd(&b);
            let (g, s, t) = (e.gcd, e.x, e.y);
            let ag = &a / &g;
            let bg = &b / &g;
            let left = [[s.clone(), t.clone()], [-&bg, ag.clone()]];
            let left_inv = [[ag.clone(), -&t], [bg.clone(), s.clone()]];
            let right = [[BigInt::one(), -(&t * &bg)], [BigInt::one(), &s * &ag]];
            let right_inv = [[&s * &ag, &t * &bg], [BigInt::from(-1), BigInt::one()]];
            d.combine_rows(i, j, &left);
            u.combine_rows(i, j, &left);
            u_inv.combine_cols(i, j, &left_inv);
            d.combine_cols(i, j, &right);
            v.combine_cols(i, j, &right);
            v_inv.combine_rows(i, j, &right_inv);
        }
    }

    SmithDecomposition { u, d, v, u_inv, v_inv }
}

fn smallest_nonzero(d: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, BigInt)> = None;
    for i in t..d.rows() {
        for j in t..d.cols() {
            let x = &d[(i, j)];
            if x.is_zero() {
                continue;
            }
            let ax = x.abs();
            if best.as_ref().is_none_or(|(_, _, b)| ax < *b) {
                best = Some((i, j, ax));
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

/// Unimodular row operations bringing `rows` to Hermite form: echelon shape,
/// positive pivots, entries above each pivot reduced into `[0, pivot)`.
///
/// Returns the `(column, pivot value)` of each pivot row, in order.
pub(crate) fn row_hermite_reduce(rows: &mut [Vec<BigInt>]) -> Vec<(usize, BigInt)> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut p = 0;
    for col in 0..c {
        if p == r {
            break;
        }
        loop {
            let best = (p..r)
                .filter(|&i| !rows[i][col].is_zero())
                .min_by(|&a, &b| rows[a][col].abs().cmp(&rows[b][col].abs()));
            let Some(best) = best else { break };
            rows.swap(p, best);
            let mut done = true;
            for i in p + 1..r {
                if rows[i][col].is_zero() {
                    continue;
                }
                let q = rows[i][col].div_floor(&rows[p][col]);
                subtract_row_multiple(rows, i, p, &q);
                done &= rows[i][col].is_zero();
            }
            if done {
                break;
            }
        }
        if rows[p][col].is_zero() {
            continue;
        }
        if rows[p][col].is_negative() {
            for v in rows[p].iter_mut() {
                *v = -&*v;
            }
        }
        for i in 0..p {
            let q = rows[i][col].div_floor(&rows[p][col]);
            if !q.is_zero() {
                subtract_row_multiple(rows, i, p, &q);
            }
        }
        pivots.push((col, rows[p][col].clone()));
        p += 1;
    }
    pivots
}

/// `rows[target] -= q · rows[source]`
pub(crate) fn subtract_row_multiple(rows: &mut [Vec<BigInt>], target: usize, source: usize, q: &BigInt) {
    let src = rows[source].clone();
    for (t, s) in rows[target].iter_mut().zip(&src) {
        *t -= q * s;
    }
}

/// Rank over the rationals of the column span.
pub fn lattice_rank(generators: &IntMatrix) -> usize {
    if generators.rows() == 0 || generators.cols() == 0 {
        return 0;
    }
    smith_normal_form(generators).rank()
}

/// Index `|Zⁿ / L|` of the lattice spanned by the columns, or `None` when the
/// columns do not span a full-rank sublattice.
pub fn lattice_index(generators: &IntMatrix) -> Option<BigInt> {
    let n = generators.rows();
    if n == 0 {
        return Some(BigInt::one());
    }
    if generators.cols() == 0 {
        return None;
    }
    let snf = smith_normal_form(generators);
    let factors = snf.invariant_factors();
    (factors.len() == n).then(|| factors.iter().product())
}
