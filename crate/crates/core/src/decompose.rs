//! Detection and construction of lacunary and triangular decompositions.
//!
//! A square system is *lacunary* when the differences of its support vectors
//! generate a proper full-rank sublattice of `Zⁿ`; it then factors as
//! `F = G ∘ Φ` through a monomial map `Φ` of degree equal to the lattice
//! index. It is *triangular* when some proper subset `I` of the polynomials
//! has support differences spanning a lattice of rank `|I|`; after a
//! unimodular change of variables those polynomials involve only the first
//! `|I|` variables.

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{lattice_rank, row_hermite_reduce, smith_normal_form, IntMatrix};
use crate::polynomial::{
    apply_monomial_substitution, default_names, map_coords, translate_to_origin, MonomialMap, SparsePolynomial,
    SparseSystem, Support, TorusPoint,
};

/// `F = G ∘ Φ`.
#[derive(Clone, Debug)]
pub struct LacunaryDecomposition {
    pub phi: MonomialMap,
    /// The system `G`; its supports are `Φ⁻¹` applied to the translated
    /// supports of `F`.
    pub inner: SparseSystem,
    /// `|det Φ|`, the index of the support lattice.
    pub index: BigInt,
}

/// After the unimodular change `change`, the polynomials indexed by `subset`
/// involve only the first `k` variables.
#[derive(Clone, Debug)]
pub struct TriangularDecomposition {
    /// Indices (0-based) of the polynomials forming the square subsystem.
    pub subset: Vec<usize>,
    pub k: usize,
    /// `H(y) = F(map_point(change, y))` is block triangular.
    pub change: MonomialMap,
    /// `(H_i)_{i ∈ subset}` restricted to the first `k` variables.
    pub subsystem: SparseSystem,
    /// `(H_i)_{i ∉ subset}` in all `n` variables, in original order.
    pub remainder: Vec<SparsePolynomial>,
}

impl TriangularDecomposition {
    /// Maps a solution `y` of the changed system back to the original
    /// coordinates.
    pub fn lift(&self, y: &[num_complex::Complex64]) -> Vec<num_complex::Complex64> {
        map_coords(&self.change, y)
    }

    /// The residual system obtained by fixing the first `k` changed
    /// coordinates to `z`. Returns `None` if some remainder polynomial
    /// vanishes identically; the flag reports whether any term was
    /// annihilated by the substitution.
    pub fn residual_instance(&self, z: &[num_complex::Complex64]) -> Option<(SparseSystem, bool)> {
        let n = self.change.dim();
        let k = self.k;
        let mut annihilated = false;
        let mut polys = Vec::with_capacity(n - k);
        for p in &self.remainder {
            let mut groups: Vec<(Vec<i64>, num_complex::Complex64, f64)> = Vec::new();
            for (e, c) in p.terms() {
                let head = crate::polynomial::monomial(z, &e[..k]);
                let v = c * head;
                let tail = e[k..].to_vec();
                match groups.iter_mut().find(|g| g.0 == tail) {
                    Some(g) => {
                        g.1 += v;
                        g.2 += v.norm();
                    }
                    None => groups.push((tail, v, v.norm())),
                }
            }
            let before = groups.len();
            let terms: Vec<_> = groups
                .into_iter()
                .filter(|(_, v, mag)| v.norm() > 1e-12 * mag)
                .map(|(e, v, _)| (e, v))
                .collect();
            annihilated |= terms.len() < before;
            match SparsePolynomial::from_terms(n - k, terms) {
                Ok(q) => polys.push(q),
                Err(_) => return None,
            }
        }
        SparseSystem::new(default_names("w", n - k), polys)
            .ok()
            .map(|s| (s, annihilated))
    }
}

#[derive(Clone, Debug)]
pub enum Decomposition {
    Lacunary(LacunaryDecomposition),
    Triangular(TriangularDecomposition),
    Indecomposable,
}

/// Which decomposition to try first when a system admits both.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchOrder {
    #[default]
    LacunaryFirst,
    TriangularFirst,
}

fn check_square(supports: &[Support]) -> Result<usize> {
    let n = supports.len();
    if n == 0 {
        return Err(Error::InvalidInput("no supports".into()));
    }
    for s in supports {
        if s.dim() != n {
            return Err(Error::NotSquare {
                polynomials: n,
                variables: s.dim(),
            });
        }
    }
    Ok(n)
}

/// All differences `a − aᵢ` of the selected supports as columns of one matrix.
pub fn difference_matrix(supports: &[Support], subset: &[usize]) -> IntMatrix {
    let n = supports[0].dim();
    let cols: Vec<Vec<i64>> = subset.iter().flat_map(|&i| supports[i].differences()).collect();
    IntMatrix::from_columns(n, &cols)
}

fn full_rank_check(supports: &[Support], n: usize) -> Result<IntMatrix> {
    let all: Vec<usize> = (0..n).collect();
    let m = difference_matrix(supports, &all);
    let rank = lattice_rank(&m);
    if rank < n {
        return Err(Error::RankDeficient { rank, expected: n });
    }
    Ok(m)
}

/// Whether the support differences generate a proper sublattice of `Zⁿ`,
/// together with its index (1 when not lacunary).
pub fn is_lacunary(supports: &[Support]) -> Result<(bool, BigInt)> {
    let n = check_square(supports)?;
    let m = full_rank_check(supports, n)?;
    let index: BigInt = smith_normal_form(&m).invariant_factors().iter().product();
    Ok((index > BigInt::one(), index))
}

/// The first proper subset `I` (by size, then lexicographically) whose support
/// differences span a lattice of rank `|I|`, with that rank.
pub fn is_triangular(supports: &[Support]) -> Result<Option<(Vec<usize>, usize)>> {
    let n = check_square(supports)?;
    full_rank_check(supports, n)?;
    for size in 1..n {
        for subset in (0..n).combinations(size) {
            let rank = lattice_rank(&difference_matrix(supports, &subset));
            if rank < size {
                // fewer independent directions than equations: no solutions generically
                return Err(Error::RankDeficient { rank, expected: size });
            }
            if rank == size {
                return Ok(Some((subset, size)));
            }
        }
    }
    Ok(None)
}

pub fn is_decomposable(supports: &[Support]) -> Result<bool> {
    Ok(is_lacunary(supports)?.0 || is_triangular(supports)?.is_some())
}

/// Builds `Φ` and `G` with `F = G ∘ Φ` (after translating each support to
/// contain the origin).
pub fn lacunary_decomposition(system: &SparseSystem) -> Result<LacunaryDecomposition> {
    let supports = system.supports();
    let (lacunary, _) = is_lacunary(&supports)?;
    if !lacunary {
        return Err(Error::NotLacunary);
    }
    let n = system.n();
    let (translated, _) = translate_to_origin(system);
    let snf = smith_normal_form(&difference_matrix(&supports, &(0..n).collect::<Vec<_>>()));
    let factors = snf.invariant_factors();

    // Columns of U⁻¹·diag(d) form a basis of the support lattice; replace it
    // by the Hermite basis (lower triangular, reduced) to keep exponents small.
    let mut basis_rows: Vec<Vec<BigInt>> = (0..n)
        .map(|j| (0..n).map(|i| &snf.u_inv[(i, j)] * &factors[j]).collect())
        .collect();
    row_hermite_reduce(&mut basis_rows);
    let phi = MonomialMap::new(IntMatrix::from_bigint_rows(basis_rows).transpose())?;

    // exponents of G solve Φ·b = a by forward substitution
    let lower = phi.matrix().clone();
    let polys = translated
        .polynomials()
        .iter()
        .map(|p| {
            let terms = p
                .terms()
                .map(|(e, c)| {
                    let mut b: Vec<BigInt> = Vec::with_capacity(n);
                    for i in 0..n {
                        let mut rhs = BigInt::from(e[i]);
                        for (j, bj) in b.iter().enumerate() {
                            rhs -= &lower[(i, j)] * bj;
                        }
                        let (q, r) = rhs.div_rem(&lower[(i, i)]);
                        debug_assert!(r.is_zero(), "support vector outside the lattice");
                        b.push(q);
                    }
                    let b = b
                        .iter()
                        .map(|v| v.to_i64().ok_or(Error::ExponentOverflow))
                        .collect::<Result<Vec<i64>>>()?;
                    Ok((b, c))
                })
                .collect::<Result<Vec<_>>>()?;
            SparsePolynomial::from_terms(n, terms)
        })
        .collect::<Result<Vec<_>>>()?;
    let inner = SparseSystem::new(default_names("z", n), polys)?;
    Ok(LacunaryDecomposition {
        index: factors.iter().product(),
        phi,
        inner,
    })
}

/// Builds the unimodular change and the block-triangular split.
pub fn triangular_decomposition(system: &SparseSystem) -> Result<TriangularDecomposition> {
    let supports = system.supports();
    let (subset, k) = is_triangular(&supports)?.ok_or(Error::NotTriangular)?;
    let n = system.n();
    let snf = smith_normal_form(&difference_matrix(&supports, &subset));
    // U maps the rank-k lattice of the subset onto the first k coordinates.
    let change = MonomialMap::new(reduce_block_change(&snf.u, k))?;
    let (translated, _) = translate_to_origin(system);
    let changed = apply_monomial_substitution(&translated, &change)?;

    let mut sub = Vec::with_capacity(k);
    let mut remainder = Vec::with_capacity(n - k);
    for (i, p) in changed.polynomials().iter().enumerate() {
        if subset.contains(&i) {
            let terms = p.terms().map(|(e, c)| {
                debug_assert!(e[k..].iter().all(|&v| v == 0));
                (e[..k].to_vec(), c)
            });
            sub.push(SparsePolynomial::from_terms(k, terms)?);
        } else {
            remainder.push(p.clone());
        }
    }
    Ok(TriangularDecomposition {
        subset,
        k,
        change,
        subsystem: SparseSystem::new(default_names("z", k), sub)?,
        remainder,
    })
}

/// Shrinks the entries of a unimodular `U` whose last `n − k` rows annihilate
/// a lattice, using only operations that preserve that property: unimodular
/// mixing within each block and adding bottom rows to top rows.
fn reduce_block_change(u: &IntMatrix, k: usize) -> IntMatrix {
    let rows = u.to_rows();
    let (top, bottom) = rows.split_at(k);
    let mut top = top.to_vec();
    let mut bottom = bottom.to_vec();
    let pivots = row_hermite_reduce(&mut bottom);
    row_hermite_reduce(&mut top);
    for row in top.iter_mut() {
        for (b, (col, p)) in bottom.iter().zip(&pivots) {
            let q = row[*col].div_floor(p);
            if !q.is_zero() {
                for (t, v) in row.iter_mut().zip(b) {
                    *t -= &q * v;
                }
            }
        }
    }
    top.extend(bottom);
    IntMatrix::from_bigint_rows(top)
}

/// One decomposition step, or `Indecomposable`.
pub fn decompose(system: &SparseSystem, order: BranchOrder) -> Result<Decomposition> {
    let supports = system.supports();
    let (lacunary, _) = is_lacunary(&supports)?;
    let triangular = if system.n() >= 2 {
        is_triangular(&supports)?.is_some()
    } else {
        false
    };
    let lac = |s| lacunary_decomposition(s).map(Decomposition::Lacunary);
    let tri = |s| triangular_decomposition(s).map(Decomposition::Triangular);
    match (order, lacunary, triangular) {
        (BranchOrder::LacunaryFirst, true, _) | (BranchOrder::TriangularFirst, true, false) => lac(system),
        (_, _, true) => tri(system),
        _ => Ok(Decomposition::Indecomposable),
    }
}

/// `Φ⁻¹(z)`: all `|det Φ|` points `x` with `map_point(Φ, x) = z`.
///
/// With `Φ = U⁻¹·D·V⁻¹` from the Smith form, the fibre is obtained by moving
/// `z` through `V`, taking every `dᵢ`-th root of each coordinate (principal
/// root times the `dᵢ`-th roots of unity, by increasing angle) and moving the
/// result through `U`.
pub fn preimages(phi: &MonomialMap, z: &TorusPoint) -> Result<Vec<TorusPoint>> {
    Ok(FiberMap::new(phi)?.fiber(z.coords()).into_iter().map(TorusPoint).collect())
}

/// Precomputed Smith data for repeated fibre computations of one map.
pub(crate) struct FiberMap {
    u: MonomialMap,
    v: MonomialMap,
    factors: Vec<u64>,
}

impl FiberMap {
    pub(crate) fn new(phi: &MonomialMap) -> Result<Self> {
        let snf = smith_normal_form(phi.matrix());
        let factors = snf
            .invariant_factors()
            .iter()
            .map(|d| d.to_u64().ok_or(Error::ExponentOverflow))
            .collect::<Result<Vec<_>>>()?;
        if factors.len() != phi.dim() {
            return Err(Error::SingularMap);
        }
        Ok(FiberMap {
            u: MonomialMap::new(snf.u)?,
            v: MonomialMap::new(snf.v)?,
            factors,
        })
    }

    pub(crate) fn fiber(&self, z: &[num_complex::Complex64]) -> Vec<Vec<num_complex::Complex64>> {
        use num_complex::Complex64;
        let w = map_coords(&self.v, z);
        let roots: Vec<Vec<Complex64>> = w
            .iter()
            .zip(&self.factors)
            .map(|(&wi, &d)| {
                let (r, theta) = wi.to_polar();
                let r = r.powf(1.0 / d as f64);
                (0..d)
                    .map(|k| {
                        Complex64::from_polar(
                            r,
                            (theta + 2.0 * std::f64::consts::PI * k as f64) / d as f64,
                        )
                    })
                    .collect()
            })
            .collect();
        roots
            .iter()
            .map(|r| r.iter().copied())
            .multi_cartesian_product()
            .map(|u| map_coords(&self.u, &u))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::{evaluate, map_point, parse_system};
    use num_complex::Complex64 as C;
    use num_traits::Signed;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn example2() -> SparseSystem {
        parse_system("vars: x, y\n1 - 2*x*y^2 + 3*x^2*y - 4*x^3*y^3\n2 + 3*y^3 + 5*x*y^2 + 7*x^4*y^2").unwrap()
    }

    fn example3() -> SparseSystem {
        parse_system("vars: x, y\ny^2 - 2*x + 3*x^2*y\n2 + 3*x^2*y + 5*x^4*y^2").unwrap()
    }

    fn three_variable() -> SparseSystem {
        parse_system("vars: x, y, z\n2 + x*y*z - x^2*y\n4 - y^2*z + 2*x*z^2 - 3*x^2*z\n1 - y*z^2 - 3*x*y*z").unwrap()
    }

    fn simplex(n: usize) -> Vec<Support> {
        let mut e = vec![vec![0; n]];
        for i in 0..n {
            let mut v = vec![0; n];
            v[i] = 1;
            e.push(v);
        }
        vec![Support::new(n, e).unwrap(); n]
    }

    fn random_torus(rng: &mut ChaCha8Rng, n: usize) -> Vec<C> {
        (0..n)
            .map(|_| C::from_polar(rng.random_range(0.6..1.6), rng.random_range(0.0..6.28)))
            .collect()
    }

    fn assert_composition(f: &SparseSystem, dec: &LacunaryDecomposition, seed: u64) {
        let (ft, _) = translate_to_origin(f);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let x = TorusPoint(random_torus(&mut rng, f.n()));
            let a = evaluate(&ft, &x).unwrap();
            let b = evaluate(&dec.inner, &map_point(&dec.phi, &x)).unwrap();
            for ((p, q), poly) in a.iter().zip(&b).zip(ft.polynomials()) {
                let scale = poly.magnitude(&x.0);
                assert!((p - q).norm() < 1e-10 * (1.0 + p.norm().max(1e-4 * scale)), "{p} vs {q}, scale {scale}");
            }
        }
    }

    #[test]
    fn lacunary_example_is_detected_with_index_three() {
        let s = example2();
        // oracle: every difference vector satisfies a + b ≡ 0 (mod 3)
        for sup in s.supports() {
            for d in sup.differences() {
                assert_eq!((d[0] + d[1]).rem_euclid(3), 0);
            }
        }
        assert_eq!(is_lacunary(&s.supports()).unwrap(), (true, BigInt::from(3)));
        let dec = lacunary_decomposition(&s).unwrap();
        assert_eq!(dec.phi.degree(), BigInt::from(3));
        assert_eq!(dec.index, BigInt::from(3));
        assert_composition(&s, &dec, 1);
    }

    #[test]
    fn even_exponents_have_index_four() {
        let s = parse_system("x^2 - 4; y^2 - 9").unwrap();
        assert_eq!(is_lacunary(&s.supports()).unwrap(), (true, BigInt::from(4)));
        let dec = lacunary_decomposition(&s).unwrap();
        assert_eq!(dec.phi.degree(), BigInt::from(4));
        // G is linear in each new variable
        for p in dec.inner.polynomials() {
            for e in p.support().exponents() {
                assert!(e.iter().map(|v| v.abs()).sum::<i64>() <= 1);
            }
        }
        assert_composition(&s, &dec, 2);
    }

    #[test]
    fn simplex_is_indecomposable() {
        for n in 1..=4 {
            let sup = simplex(n);
            assert_eq!(is_lacunary(&sup).unwrap(), (false, BigInt::one()));
            if n >= 2 {
                assert_eq!(is_triangular(&sup).unwrap(), None);
            }
            assert!(!is_decomposable(&sup).unwrap());
        }
        let s = parse_system("1 + x + y; 2 + 3*x - y").unwrap();
        assert!(matches!(lacunary_decomposition(&s), Err(Error::NotLacunary)));
        assert!(matches!(triangular_decomposition(&s), Err(Error::NotTriangular)));
    }

    #[test]
    fn triangular_example() {
        let s = example3();
        assert_eq!(is_triangular(&s.supports()).unwrap(), Some((vec![1], 1)));
        let dec = triangular_decomposition(&s).unwrap();
        assert_eq!(dec.k, 1);
        let mut e: Vec<i64> = dec.subsystem.polynomials()[0]
            .support()
            .exponents()
            .iter()
            .map(|v| v[0])
            .collect();
        let m = *e.iter().min().unwrap();
        e.iter_mut().for_each(|v| *v -= m);
        e.sort();
        assert_eq!(e, vec![0, 1, 2]);
        assert!(dec.change.is_unimodular());
    }

    #[test]
    fn three_variable_system_is_both() {
        let s = three_variable();
        let sup = s.supports();
        assert_eq!(is_lacunary(&sup).unwrap(), (true, BigInt::from(3)));
        assert_eq!(is_triangular(&sup).unwrap(), Some((vec![0, 2], 2)));
        assert!(is_decomposable(&sup).unwrap());
        let dec = triangular_decomposition(&s).unwrap();
        assert_eq!((dec.k, dec.subset.clone()), (2, vec![0, 2]));
        assert_eq!(dec.remainder.len(), 1);
        assert_composition(&s, &lacunary_decomposition(&s).unwrap(), 3);
    }

    #[test]
    fn already_triangular_system() {
        let s = parse_system("vars: x, y\nx^2 - 3*x + 1\nx*y + y^2 - 2").unwrap();
        let dec = triangular_decomposition(&s).unwrap();
        assert_eq!(dec.subset, vec![0]);
        assert!(dec.change.is_unimodular());
        // translate the changed system back and evaluate at random points
        let (t, _) = translate_to_origin(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let y = random_torus(&mut rng, 2);
            let x = dec.lift(&y);
            let fx = t.polynomials()[0].eval(&x);
            let hy = dec.subsystem.polynomials()[0].eval(&y[..1]);
            assert!((fx - hy).norm() < 1e-10 * (1.0 + fx.norm()));
        }
    }

    #[test]
    fn rank_deficient_family_is_an_error() {
        let s = parse_system("1 + x*y; 2 + x*y").unwrap();
        assert!(matches!(is_lacunary(&s.supports()), Err(Error::RankDeficient { rank: 1, .. })));
        let s = parse_system("1 + x; 2 + x^2; y + z").unwrap();
        assert!(matches!(is_triangular(&s.supports()), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn residual_instance_substitutes_and_flags_annihilation() {
        let s = parse_system("vars: x, y\nx^2 - 3*x + 1\nx*y + y - 2").unwrap();
        let dec = triangular_decomposition(&s).unwrap();
        let z = vec![C::new(2.0, 0.0)];
        let (r, annihilated) = dec.residual_instance(&z).unwrap();
        assert_eq!(r.n(), 1);
        assert!(!annihilated);
        // x = -1 kills the y-terms
        let (r, annihilated) = dec.residual_instance(&[C::new(-1.0, 0.0)]).unwrap_or_else(|| {
            panic!("constant term survives")
        });
        assert!(annihilated);
        assert_eq!(r.polynomials()[0].len(), 1);
    }

    #[test]
    fn preimage_examples() {
        let z = TorusPoint(vec![C::new(4.0, 0.0), C::new(9.0, 0.0)]);
        assert_eq!(preimages(&MonomialMap::identity(2), &z).unwrap().len(), 1);
        let sq = MonomialMap::new(IntMatrix::from_rows(&[[2, 0], [0, 2]])).unwrap();
        let pts = preimages(&sq, &z).unwrap();
        assert_eq!(pts.len(), 4);
        for expected in [(2.0, 3.0), (2.0, -3.0), (-2.0, 3.0), (-2.0, -3.0)] {
            assert!(pts.iter().any(|p| (p.0[0] - expected.0).norm() < 1e-12 && (p.0[1] - expected.1).norm() < 1e-12));
        }
        let phi = MonomialMap::new(IntMatrix::from_columns(2, &[[3, 0], [-1, 1]])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = TorusPoint(random_torus(&mut rng, 2));
        let pts = preimages(&phi, &z).unwrap();
        assert_eq!(pts.len(), 3);
        for p in &pts {
            let back = map_point(&phi, p);
            for (a, b) in back.0.iter().zip(&z.0) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    /// Random `n×n` matrix with entries in `[-3, 3]` and nonzero determinant.
    fn random_map(rng: &mut ChaCha8Rng, n: usize, unimodular: bool) -> MonomialMap {
        loop {
            let rows: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-3..=3)).collect()).collect();
            let m = IntMatrix::from_rows(&rows);
            let det = m.det();
            if det.is_zero() || (unimodular && det.abs() != BigInt::one()) || (!unimodular && det.abs() == BigInt::one()) {
                continue;
            }
            return MonomialMap::new(m).unwrap();
        }
    }

    fn random_system(rng: &mut ChaCha8Rng, n: usize, terms: usize, max: i64) -> SparseSystem {
        loop {
            let polys: Vec<_> = (0..n)
                .map(|_| {
                    let mut t = vec![(vec![0; n], C::new(rng.random_range(0.5..2.0), 0.0))];
                    for _ in 0..terms {
                        let e: Vec<i64> = (0..n).map(|_| rng.random_range(-max..=max)).collect();
                        t.push((e, C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))));
                    }
                    SparsePolynomial::from_terms(n, t).unwrap()
                })
                .collect();
            let s = SparseSystem::with_default_names(polys).unwrap();
            if is_lacunary(&s.supports()).is_ok() {
                return s;
            }
        }
    }

    #[test]
    fn constructed_lacunary_systems_are_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..40 {
            let n = rng.random_range(2..=3);
            let g = random_system(&mut rng, n, 3, 2);
            let phi = random_map(&mut rng, n, false);
            let f = apply_monomial_substitution(&g, &phi).unwrap();
            let (lac, index) = is_lacunary(&f.supports()).unwrap();
            assert!(lac, "trial {trial}");
            assert!(index.is_multiple_of(&phi.degree()));
            let dec = lacunary_decomposition(&f).unwrap();
            assert_composition(&f, &dec, trial);
        }
    }

    #[test]
    fn constructed_triangular_systems_are_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let n = rng.random_range(2..=4);
            let k = rng.random_range(1..n);
            let polys: Vec<_> = (0..n)
                .map(|i| {
                    let vars = if i < k { k } else { n };
                    let mut t = vec![(vec![0; n], C::new(1.0, 0.0))];
                    for _ in 0..(vars + 1) {
                        let mut e = vec![0; n];
                        for v in e.iter_mut().take(vars) {
                            *v = rng.random_range(-2..=2);
                        }
                        t.push((e, C::new(rng.random_range(-1.0..1.0), 0.5)));
                    }
                    SparsePolynomial::from_terms(n, t).unwrap()
                })
                .collect();
            let s = SparseSystem::with_default_names(polys).unwrap();
            let Ok(found) = is_triangular(&s.supports()) else {
                continue;
            };
            assert!(found.is_some());
            let m = random_map(&mut rng, n, true);
            let changed = apply_monomial_substitution(&s, &m).unwrap();
            let again = is_triangular(&changed.supports()).unwrap();
            assert_eq!(again.map(|x| x.1), found.map(|x| x.1));
            let dec = triangular_decomposition(&changed).unwrap();
            for p in dec.subsystem.polynomials() {
                assert_eq!(p.dim(), dec.k);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn detection_is_translation_invariant(shift in proptest::collection::vec(-4i64..=4, 3), which in 0usize..3) {
            let s = three_variable();
            let polys: Vec<_> = s.polynomials().iter().enumerate().map(|(i, p)| {
                if i != which { return p.clone(); }
                SparsePolynomial::from_terms(3, p.terms().map(|(e, c)| {
                    (e.iter().zip(&shift).map(|(a, b)| a + b).collect(), c)
                })).unwrap()
            }).collect();
            let t = SparseSystem::with_default_names(polys).unwrap();
            prop_assert_eq!(is_lacunary(&t.supports()).unwrap(), is_lacunary(&s.supports()).unwrap());
            prop_assert_eq!(is_triangular(&t.supports()).unwrap(), is_triangular(&s.supports()).unwrap());
        }

        #[test]
        fn detection_is_unimodular_invariant(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_map(&mut rng, 3, true);
            let s = three_variable();
            let t = apply_monomial_substitution(&s, &m).unwrap();
            prop_assert_eq!(is_lacunary(&t.supports()).unwrap(), is_lacunary(&s.supports()).unwrap());
            let a = is_triangular(&t.supports()).unwrap().map(|x| x.1);
            let b = is_triangular(&s.supports()).unwrap().map(|x| x.1);
            prop_assert_eq!(a, b);
        }
    }
}
