//! Roots of univariate polynomials from companion matrix eigenvalues.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

type C = Complex64;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITERS: usize = 10_000;
const POLISH_ITERS: usize = 8;
const ABERTH_ITERS: usize = 500;

/// All `d` roots of `c₀ + c₁x + … + c_d x^d`, repeated by multiplicity.
///
/// Roots are eigenvalues of the companion matrix of the monic normalization,
/// each polished by a few guarded Newton steps. Trailing zero coefficients
/// are rejected (`c_d` must be nonzero); leading zero coefficients give
/// roots at zero.
pub fn univariate_roots(coefficients: &[C]) -> Result<Vec<C>> {
    let d = coefficients.len().saturating_sub(1);
    if d == 0 {
        return Err(Error::DegreeZero);
    }
    let lead = coefficients[d];
    if lead.is_zero() || !coefficients.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        return Err(Error::InvalidInput("leading coefficient must be nonzero and finite".into()));
    }
    let monic: Vec<C> = coefficients.iter().map(|c| c / lead).collect();
    let mut roots = companion_eigenvalues(&monic).unwrap_or_else(|| aberth(&monic));
    for r in &mut roots {
        *r = polish(coefficients, *r);
    }
    Ok(roots)
}

/// `p(x)` and `p'(x)` by Horner's rule.
pub(crate) fn horner(coefficients: &[C], x: C) -> (C, C) {
    let mut p = C::zero();
    let mut dp = C::zero();
    for c in coefficients.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn companion_eigenvalues(monic: &[C]) -> Option<Vec<C>> {
    let d = monic.len() - 1;
    if d == 1 {
        return Some(vec![-monic[0]]);
    }
    let mut m = DMatrix::<C>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = C::new(1.0, 0.0);
    }
    for i in 0..d {
        m[(i, d - 1)] = -monic[i];
    }
    let schur = Schur::try_new(m, SCHUR_EPS, SCHUR_MAX_ITERS)?;
    let eig = schur.eigenvalues()?;
    let roots: Vec<C> = eig.iter().copied().collect();
    roots.iter().all(|r| r.re.is_finite() && r.im.is_finite()).then_some(roots)
}

/// Aberth–Ehrlich simultaneous iteration, used when the QR iteration fails.
fn aberth(monic: &[C]) -> Vec<C> {
    let d = monic.len() - 1;
    // Cauchy-type bound on the root moduli
    let radius = 1.0 + monic[..d].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let r0 = radius.min(2.0).max(0.5);
    let mut z: Vec<C> = (0..d)
        .map(|k| C::from_polar(r0, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / d as f64))
        .collect();
    for _ in 0..ABERTH_ITERS {
        let mut moved = 0.0f64;
        for k in 0..d {
            let (p, dp) = horner(monic, z[k]);
            if p.is_zero() {
                continue;
            }
            let ratio = p / dp;
            let s: C = (0..d).filter(|&j| j != k).map(|j| C::new(1.0, 0.0) / (z[k] - z[j])).sum();
            let w = ratio / (C::new(1.0, 0.0) - ratio * s);
            if w.re.is_finite() && w.im.is_finite() {
                z[k] -= w;
                moved = moved.max(w.norm() / (1.0 + z[k].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Newton steps accepted only while they strictly reduce `|p|`, so a root
/// never wanders off to a neighbour.
fn polish(coefficients: &[C], mut r: C) -> C {
    let (mut p, mut dp) = horner(coefficients, r);
    for _ in 0..POLISH_ITERS {
        if p.is_zero() || dp.is_zero() {
            break;
        }
        let next = r - p / dp;
        let (np, ndp) = horner(coefficients, next);
        if !(np.norm() < p.norm()) {
            break;
        }
        (r, p, dp) = (next, np, ndp);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    fn within_bound(coefficients: &[C], r: C) -> bool {
        let d = coefficients.len() - 1;
        let cmax = coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
        horner(coefficients, r).0.norm() <= 1e-8 * cmax * r.norm().max(1.0).powi(d as i32)
    }

    fn sorted(mut v: Vec<C>) -> Vec<C> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn cube_roots_of_unity() {
        let roots = univariate_roots(&[c(-1.0), c(0.0), c(0.0), c(1.0)]).unwrap();
        assert_eq!(roots.len(), 3);
        for k in 0..3 {
            let w = C::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 3.0);
            assert!(roots.iter().any(|r| (r - w).norm() < 1e-10));
        }
    }

    #[test]
    fn quadratic() {
        let roots = sorted(univariate_roots(&[c(6.0), c(-5.0), c(1.0)]).unwrap());
        assert!((roots[0] - c(2.0)).norm() < 1e-10);
        assert!((roots[1] - c(3.0)).norm() < 1e-10);
    }

    #[test]
    fn degree_zero_is_rejected() {
        assert_eq!(univariate_roots(&[c(3.0)]), Err(Error::DegreeZero));
        assert_eq!(univariate_roots(&[]), Err(Error::DegreeZero));
    }

    #[test]
    fn zero_roots_from_vanishing_low_coefficients() {
        let roots = univariate_roots(&[c(0.0), c(0.0), c(-4.0), c(1.0)]).unwrap();
        assert_eq!(roots.iter().filter(|r| r.norm() < 1e-8).count(), 2);
        assert!(roots.iter().any(|r| (r - c(4.0)).norm() < 1e-10));
    }

    #[test]
    fn random_degree_twelve_meets_residual_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let coeffs: Vec<C> = (0..=12)
                .map(|_| C::from_polar(rng.random_range(0.0..1.0f64).sqrt(), rng.random_range(0.0..std::f64::consts::TAU)))
                .collect();
            let roots = univariate_roots(&coeffs).unwrap();
            assert_eq!(roots.len(), 12);
            assert!(roots.iter().all(|&r| within_bound(&coeffs, r)));
        }
    }

    #[test]
    fn cyclotomic_and_high_degree() {
        for d in [2usize, 5, 8, 17, 30, 64] {
            let mut coeffs = vec![c(0.0); d + 1];
            coeffs[0] = c(-1.0);
            coeffs[d] = c(1.0);
            let roots = univariate_roots(&coeffs).unwrap();
            assert_eq!(roots.len(), d);
            assert!(roots.iter().all(|&r| within_bound(&coeffs, r)), "degree {d}");
            assert!(roots.iter().all(|r| (r.norm() - 1.0).abs() < 1e-10));
        }
    }

    #[test]
    fn multiple_roots_are_counted_by_proximity() {
        // (x − 1)³ (x + 2)
        let coeffs = [c(-2.0), c(5.0), c(-3.0), c(-1.0), c(1.0)];
        let roots = univariate_roots(&coeffs).unwrap();
        assert_eq!(roots.iter().filter(|r| (*r - c(1.0)).norm() < 1e-4).count(), 3);
        assert!(roots.iter().all(|&r| within_bound(&coeffs, r)));
    }

    #[test]
    fn aberth_fallback_agrees() {
        let monic = [c(6.0), c(-5.0), c(1.0)];
        let roots = sorted(aberth(&monic).into_iter().map(|r| polish(&monic, r)).collect());
        assert!((roots[0] - c(2.0)).norm() < 1e-10);
        assert!((roots[1] - c(3.0)).norm() < 1e-10);
    }
}
