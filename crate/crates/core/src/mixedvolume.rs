//! Exact convex hulls, volumes and the normalized mixed volume of lattice
//! polytopes.
//!
//! The mixed volume of the hulls of `A₁, …, A_n` bounds the number of
//! isolated torus solutions of a system with those supports, with equality
//! for generic coefficients. It is computed here by inclusion–exclusion over
//! Minkowski sums,
//!
//! ```text
//! MV(P₁, …, P_n) = Σ_{∅ ≠ S ⊆ [n]} (−1)^{n−|S|} vol(Σ_{i∈S} P_i),
//! ```
//!
//! with every volume obtained exactly from a placing triangulation over
//! integer coordinates. This costs `2ⁿ − 1` hull computations and is meant for
//! small `n`.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::polynomial::Support;

/// Convex hull of a finite lattice point set, stored by its vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vec<i64>>,
}

impl Polytope {
    /// Hull of arbitrary points of `Zⁿ`; interior and non-extreme boundary
    /// points are discarded. Vertices come out sorted.
    pub fn from_points(dim: usize, points: &[Vec<i64>]) -> Self {
        let hull = Hull::compute(dim, points);
        Polytope {
            dim,
            vertices: hull.vertices,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<i64>] {
        &self.vertices
    }

    /// Dimension of the affine hull.
    pub fn affine_dim(&self) -> usize {
        affine_frame(&self.vertices).0
    }

    pub fn translate(&self, by: &[i64]) -> Self {
        Polytope {
            dim: self.dim,
            vertices: self
                .vertices
                .iter()
                .map(|v| v.iter().zip(by).map(|(a, b)| a + b).collect())
                .collect(),
        }
    }
}

/// Extreme points of `conv(support)`.
pub fn convex_hull(support: &Support) -> Polytope {
    Polytope::from_points(support.dim(), support.exponents())
}

/// Vertices of `P + Q`.
pub fn minkowski_sum(p: &Polytope, q: &Polytope) -> Polytope {
    assert_eq!(p.dim, q.dim);
    let pts = minkowski_points(&p.vertices, &q.vertices);
    Polytope::from_points(p.dim, &pts)
}

/// `n!·vol(P)`, an integer for lattice polytopes; zero when `P` is not full
/// dimensional.
pub fn normalized_volume(p: &Polytope) -> BigInt {
    Hull::compute(p.dim, &p.vertices).normalized_volume
}

/// Exact Euclidean volume; zero for lower-dimensional polytopes.
pub fn euclidean_volume(p: &Polytope) -> BigRational {
    BigRational::new(normalized_volume(p), factorial(p.dim))
}

fn factorial(n: usize) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

/// Normalized mixed volume of the supports' convex hulls, so that
/// `MV(Δ, …, Δ) = 1` for the unit simplex `Δ`.
pub fn mixed_volume(supports: &[Support]) -> Result<u64> {
    let n = supports.len();
    if n == 0 {
        return Err(Error::InvalidInput("no supports".into()));
    }
    if let Some(s) = supports.iter().find(|s| s.dim() != n) {
        return Err(Error::NotSquare {
            polynomials: n,
            variables: s.dim(),
        });
    }
    if n > 20 {
        return Err(Error::InvalidInput(format!("mixed volume by inclusion-exclusion needs n <= 20, got {n}")));
    }
    let hulls: Vec<Vec<Vec<i64>>> = supports.iter().map(|s| convex_hull(s).vertices).collect();

    // sums[mask] = vertices of Σ_{i ∈ mask} P_i, built from mask minus its lowest bit
    let count = 1usize << n;
    let mut sums: Vec<Vec<Vec<i64>>> = Vec::with_capacity(count);
    sums.push(vec![vec![0; n]]);
    let mut total = BigInt::zero();
    for mask in 1..count {
        let i = mask.trailing_zeros() as usize;
        let prev = &sums[mask & (mask - 1)];
        let hull = Hull::compute(n, &minkowski_points(prev, &hulls[i]));
        let sign = if (n - mask.count_ones() as usize) % 2 == 0 { 1 } else { -1 };
        total += hull.normalized_volume * sign;
        sums.push(hull.vertices);
    }
    let (q, r) = num_integer::Integer::div_rem(&total, &factorial(n));
    debug_assert!(r.is_zero(), "mixed volume is not an integer");
    q.to_u64().ok_or(Error::InvalidInput("mixed volume out of range".into()))
}

fn minkowski_points(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let set: BTreeSet<Vec<i64>> = a
        .iter()
        .flat_map(|p| b.iter().map(move |q| p.iter().zip(q).map(|(x, y)| x + y).collect()))
        .collect();
    set.into_iter().collect()
}

struct Hull {
    vertices: Vec<Vec<i64>>,
    normalized_volume: BigInt,
}

impl Hull {
    fn compute(dim: usize, points: &[Vec<i64>]) -> Hull {
        let distinct: Vec<Vec<i64>> = points.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        if distinct.len() <= 1 {
            return Hull {
                vertices: distinct,
                normalized_volume: BigInt::zero(),
            };
        }
        let (k, coords) = affine_frame(&distinct);
        let projected: Vec<Vec<i128>> = distinct
            .iter()
            .map(|p| coords.iter().map(|&c| p[c] as i128).collect())
            .collect();
        let (is_vertex, volume) = if k == 1 {
            let lo = (0..projected.len()).min_by_key(|&i| projected[i][0]).unwrap();
            let hi = (0..projected.len()).max_by_key(|&i| projected[i][0]).unwrap();
            let mask = (0..projected.len()).map(|i| i == lo || i == hi).collect();
            (mask, projected[hi][0] - projected[lo][0])
        } else {
            let t = Triangulation::build(&projected, k);
            (t.vertex_mask(&projected, k), t.volume)
        };
        let vertices = distinct
            .into_iter()
            .zip(is_vertex)
            .filter_map(|(p, v)| v.then_some(p))
            .collect();
        Hull {
            vertices,
            normalized_volume: if k == dim { BigInt::from(volume) } else { BigInt::zero() },
        }
    }
}

/// Affine dimension `k` of the points and `k` coordinates on which the
/// projection is injective on their affine hull.
fn affine_frame(points: &[Vec<i64>]) -> (usize, Vec<usize>) {
    let Some(first) = points.first() else {
        return (0, Vec::new());
    };
    let dim = first.len();
    let diffs: Vec<Vec<i128>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(first).map(|(a, b)| (a - b) as i128).collect())
        .collect();
    let k = rank(&diffs);
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut current = 0;
    for c in 0..dim {
        if chosen.len() == k {
            break;
        }
        let mut trial = chosen.clone();
        trial.push(c);
        let projected: Vec<Vec<i128>> = diffs.iter().map(|d| trial.iter().map(|&j| d[j]).collect()).collect();
        let r = rank(&projected);
        if r > current {
            current = r;
            chosen = trial;
        }
    }
    (k, chosen)
}

/// Exact rank of integer row vectors by fraction-free elimination with gcd
/// normalization.
fn rank(rows: &[Vec<i128>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows.iter().filter(|r| r.iter().any(|&v| v != 0)).cloned().collect();
    let Some(cols) = m.first().map(Vec::len) else {
        return 0;
    };
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            if m[i][c] == 0 {
                continue;
            }
            let (a, b) = (m[r][c], m[i][c]);
            let pivot = m[r].clone();
            for (x, y) in m[i].iter_mut().zip(&pivot) {
                *x = *x * a - *y * b;
            }
            let g = m[i].iter().fold(0i128, |g, &v| gcd(g, v));
            if g > 1 {
                m[i].iter_mut().for_each(|v| *v /= g);
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact determinant (Bareiss).
fn det(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&i| m[i][k] != 0) {
                Some(p) => {
                    m.swap(k, p);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// `det[f₁ − f₀, …, f_{k−1} − f₀, q − f₀]` for a facet of `k` points in `Rᵏ`.
fn orientation(points: &[Vec<i128>], facet: &[usize], q: &[i128]) -> i128 {
    let f0 = &points[facet[0]];
    let mut rows: Vec<Vec<i128>> = facet[1..]
        .iter()
        .map(|&i| points[i].iter().zip(f0).map(|(a, b)| a - b).collect())
        .collect();
    rows.push(q.iter().zip(f0).map(|(a, b)| a - b).collect());
    det(rows)
}

/// Placing triangulation of a full-dimensional point set in `Rᵏ`.
struct Triangulation {
    /// boundary facet (sorted vertex indices) → sign of the orientation of the
    /// opposite vertex of its unique simplex
    boundary: HashMap<Vec<usize>, i128>,
    volume: i128,
}

impl Triangulation {
    fn build(points: &[Vec<i128>], k: usize) -> Triangulation {
        // initial simplex: greedily grow an affinely independent set
        let mut simplex = vec![0usize];
        for i in 1..points.len() {
            if simplex.len() == k + 1 {
                break;
            }
            let mut rows: Vec<Vec<i128>> = simplex[1..]
                .iter()
                .chain(std::iter::once(&i))
                .map(|&j| points[j].iter().zip(&points[0]).map(|(a, b)| a - b).collect())
                .collect();
            rows.retain(|r| r.iter().any(|&v| v != 0));
            if rank(&rows) == simplex.len() {
                simplex.push(i);
            }
        }
        debug_assert_eq!(simplex.len(), k + 1);

        let mut t = Triangulation {
            boundary: HashMap::new(),
            volume: 0,
        };
        t.volume += simplex_volume(points, &simplex);
        for (pos, &opp) in simplex.iter().enumerate() {
            let mut facet = simplex.clone();
            facet.remove(pos);
            let s = orientation(points, &facet, &points[opp]).signum();
            t.boundary.insert(facet, s);
        }

        let in_simplex: BTreeSet<usize> = simplex.iter().copied().collect();
        for p in 0..points.len() {
            if in_simplex.contains(&p) {
                continue;
            }
            let visible: Vec<Vec<usize>> = t
                .boundary
                .iter()
                .filter(|(f, &s)| {
                    let o = orientation(points, f, &points[p]).signum();
                    o != 0 && o != s
                })
                .map(|(f, _)| f.clone())
                .collect();
            let mut fresh: HashMap<Vec<usize>, i128> = HashMap::new();
            for f in visible {
                t.boundary.remove(&f);
                let mut cell = f.clone();
                cell.push(p);
                t.volume += simplex_volume(points, &cell);
                for (pos, &opp) in f.iter().enumerate() {
                    let mut nf = f.clone();
                    nf.remove(pos);
                    nf.push(p);
                    nf.sort_unstable();
                    if fresh.remove(&nf).is_none() {
                        let s = orientation(points, &nf, &points[opp]).signum();
                        fresh.insert(nf, s);
                    }
                }
            }
            t.boundary.extend(fresh);
        }
        t
    }

    /// A point is a vertex iff the facet normals tight at it have rank `k`.
    fn vertex_mask(&self, points: &[Vec<i128>], k: usize) -> Vec<bool> {
        let mut planes: BTreeSet<(Vec<i128>, i128)> = BTreeSet::new();
        for (facet, &s) in &self.boundary {
            let f0 = &points[facet[0]];
            let rows: Vec<Vec<i128>> = facet[1..]
                .iter()
                .map(|&i| points[i].iter().zip(f0).map(|(a, b)| a - b).collect())
                .collect();
            // normal by cofactor expansion along a symbolic last row
            let mut normal: Vec<i128> = (0..k)
                .map(|j| {
                    let minor: Vec<Vec<i128>> = rows
                        .iter()
                        .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect())
                        .collect();
                    let sign = if (k - 1 + j) % 2 == 0 { 1 } else { -1 };
                    sign * det(minor)
                })
                .collect();
            // orientation(q) = normal·(q − f0): interior side has sign s, so flip to point outward
            if s > 0 {
                normal.iter_mut().for_each(|v| *v = -*v);
            }
            let g = normal.iter().fold(0, |g, &v| gcd(g, v));
            normal.iter_mut().for_each(|v| *v /= g);
            let offset: i128 = normal.iter().zip(f0).map(|(a, b)| a * b).sum();
            planes.insert((normal, offset));
        }
        points
            .iter()
            .map(|p| {
                let tight: Vec<Vec<i128>> = planes
                    .iter()
                    .filter(|(nrm, off)| nrm.iter().zip(p).map(|(a, b)| a * b).sum::<i128>() == *off)
                    .map(|(nrm, _)| nrm.clone())
                    .collect();
                rank(&tight) == k
            })
            .collect()
    }
}

fn simplex_volume(points: &[Vec<i128>], cell: &[usize]) -> i128 {
    let p0 = &points[cell[0]];
    let rows = cell[1..]
        .iter()
        .map(|&i| points[i].iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    det(rows).abs()
}
