use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::polynomial::{SparseSystem, TorusPoint};

type C = Complex64;

/// Residual test used throughout: `‖F(x)‖ ≤ tol·(1 + ∑|c||x^α|)`.
///
/// Scaling by the term magnitudes makes the test meaningful for systems whose
/// solutions or coefficients are far from unit size.
pub(crate) fn residual_ok(residual: f64, scale: f64, tol: f64) -> bool {
    residual <= tol * (1.0 + scale)
}

pub(crate) fn norm(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Newton's method on `F` from `x` until the scaled residual is at most
/// `tol`, followed by one more step kept only if it lowers the residual.
///
/// Fails with `SingularJacobian` when a step cannot be solved and with
/// `NoConvergence` when `max_iters` is exhausted or a coordinate vanishes.
pub fn newton_refine(system: &SparseSystem, x: &[C], tol: f64, max_iters: usize) -> Result<TorusPoint> {
    if x.len() != system.n() {
        return Err(Error::DimensionMismatch {
            expected: system.n(),
            found: x.len(),
        });
    }
    let mut x = DVector::from_column_slice(x);
    let mut converged = false;
    for _ in 0..=max_iters {
        let (f, jac, scale) = system.eval_with_jacobian(x.as_slice());
        let r = f.norm();
        if !r.is_finite() {
            return Err(Error::NoConvergence);
        }
        if residual_ok(r, scale, tol) {
            converged = true;
            let polished = jac.lu().solve(&f).map(|dx| &x - dx);
            if let Some(p) = polished {
                if system.residual(p.as_slice()) < r && p.iter().all(|z| z.norm() > 0.0) {
                    x = p;
                }
            }
            break;
        }
        let dx = jac.lu().solve(&f).ok_or(Error::SingularJacobian)?;
        x -= dx;
    }
    if !converged {
        return Err(Error::NoConvergence);
    }
    TorusPoint::new(x.iter().copied().collect()).map_err(|_| Error::NoConvergence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    fn squares() -> SparseSystem {
        SparseSystem::from_supports(
            &[vec![vec![2, 0], vec![0, 0]], vec![vec![0, 2], vec![0, 0]]],
            &[vec![c(1.0), c(-4.0)], vec![c(1.0), c(-9.0)]],
        )
        .unwrap()
    }

    #[test]
    fn exact_solution_is_unchanged() {
        let p = newton_refine(&squares(), &[c(2.0), c(3.0)], 1e-10, 20).unwrap();
        assert_eq!(p.coords(), &[c(2.0), c(3.0)]);
    }

    #[test]
    fn converges_from_nearby_start() {
        let p = newton_refine(&squares(), &[c(2.1), c(2.9)], 1e-10, 20).unwrap();
        assert!((p.coords()[0] - c(2.0)).norm() < 1e-12);
        assert!((p.coords()[1] - c(3.0)).norm() < 1e-12);
    }

    #[test]
    fn singular_jacobian_is_reported() {
        assert_eq!(newton_refine(&squares(), &[c(0.0), c(1.0)], 1e-10, 20), Err(Error::SingularJacobian));
    }

    #[test]
    fn iteration_budget_is_respected() {
        assert_eq!(newton_refine(&squares(), &[c(50.0), c(70.0)], 1e-10, 2), Err(Error::NoConvergence));
    }

    #[test]
    fn perturbed_solution_of_random_system_is_recovered() {
        // build a system through a known torus point: f_i = Σ c x^α − Σ c p^α
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let p: Vec<C> = (0..2).map(|_| C::from_polar(rng.random_range(0.5..2.0), rng.random_range(0.0..6.28))).collect();
            let supports = vec![vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![0, 0]]; 2];
            let coeffs: Vec<Vec<C>> = supports
                .iter()
                .map(|s| {
                    let mut cs: Vec<C> = (0..s.len() - 1).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
                    let v: C = s[..s.len() - 1]
                        .iter()
                        .zip(&cs)
                        .map(|(e, c)| c * p[0].powi(e[0] as i32) * p[1].powi(e[1] as i32))
                        .sum();
                    cs.push(-v);
                    cs
                })
                .collect();
            let sys = SparseSystem::from_supports(&supports, &coeffs).unwrap();
            let start: Vec<C> = p.iter().map(|z| z + C::new(1e-3, -1e-3)).collect();
            let q = newton_refine(&sys, &start, 1e-10, 20).unwrap();
            assert!(residual_ok(sys.residual(q.coords()), sys.magnitude(q.coords()), 1e-10));
            assert!(norm(&[q.coords()[0] - p[0], q.coords()[1] - p[1]]) < 1e-8);
        }
    }
}
