use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::SparseSystem;

use super::newton::residual_ok;

type C = Complex64;

/// Relative size of the last corrector update that counts as converged.
const CORRECTOR_TOL: f64 = 1e-9;
/// A first corrector update larger than this (relative) is treated as a
/// possible jump to another path and rejected.
const MAX_FIRST_CORRECTION: f64 = 1e-2;
const FINAL_NEWTON_ITERS: usize = 12;

/// Step control and tolerances for `track_path`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerConfig {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub newton_tol: f64,
    pub max_corrector_iters: usize,
    pub divergence_bound: f64,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            initial_step: 0.1,
            min_step: 1e-7,
            max_step: 0.25,
            newton_tol: 1e-10,
            max_corrector_iters: 3,
            divergence_bound: 1e8,
            max_steps: 10_000,
            seed: 42,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.min_step
            && self.min_step <= self.initial_step
            && self.initial_step <= self.max_step
            && self.max_step < 1.0
            && self.newton_tol > 0.0
            && self.divergence_bound > 0.0
            && self.max_corrector_iters > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid tracker configuration {self:?}")))
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        TrackerConfig { seed, ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathStatus {
    Converged,
    Diverged,
    Truncated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    pub status: PathStatus,
    /// Meaningful only when `status` is `Converged`.
    pub endpoint: Vec<C>,
    pub steps_taken: usize,
}

/// A family `H(x, t)`, `t ∈ [0, 1]`, of square systems.
pub trait Homotopy: Sync {
    fn dim(&self) -> usize;

    /// `H`, `∂H/∂x`, `∂H/∂t` and a magnitude for scaling residuals.
    fn evaluate(&self, x: &[C], t: f64) -> (DVector<C>, DMatrix<C>, DVector<C>, f64);
}

/// `H(x, t) = (1 − t)·γ·G(x) + t·F(x)`.
///
/// With `G` a start system this is the gamma trick; with `G` and `F` on the
/// same supports it is the straight coefficient segment of a parameter
/// homotopy, deformed by `γ`.
#[derive(Clone, Debug)]
pub struct StraightLineHomotopy {
    pub start: SparseSystem,
    pub target: SparseSystem,
    pub gamma: C,
}

impl StraightLineHomotopy {
    pub fn new(start: SparseSystem, target: SparseSystem, gamma: C) -> Result<Self> {
        if start.n() != target.n() {
            return Err(Error::DimensionMismatch {
                expected: target.n(),
                found: start.n(),
            });
        }
        Ok(StraightLineHomotopy { start, target, gamma })
    }
}

impl Homotopy for StraightLineHomotopy {
    fn dim(&self) -> usize {
        self.target.n()
    }

    fn evaluate(&self, x: &[C], t: f64) -> (DVector<C>, DMatrix<C>, DVector<C>, f64) {
        let (g, jg, sg) = self.start.eval_with_jacobian(x);
        let (f, jf, sf) = self.target.eval_with_jacobian(x);
        let a = self.gamma * (1.0 - t);
        let h = &g * a + &f * C::new(t, 0.0);
        let hx = &jg * a + &jf * C::new(t, 0.0);
        let ht = &f - &g * self.gamma;
        (h, hx, ht, (1.0 - t) * self.gamma.norm() * sg + t * sf)
    }
}

fn is_finite(v: &DVector<C>) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `dx/dt = −(∂H/∂x)⁻¹ ∂H/∂t`.
fn tangent<H: Homotopy + ?Sized>(h: &H, x: &DVector<C>, t: f64) -> Option<DVector<C>> {
    let (_, hx, ht, _) = h.evaluate(x.as_slice(), t);
    let v = -hx.lu().solve(&ht)?;
    is_finite(&v).then_some(v)
}

fn rk4<H: Homotopy + ?Sized>(h: &H, x: &DVector<C>, t: f64, dt: f64) -> Option<DVector<C>> {
    let s = C::new(dt, 0.0);
    let half = C::new(dt / 2.0, 0.0);
    let k1 = tangent(h, x, t)?;
    let k2 = tangent(h, &(x + &k1 * half), t + dt / 2.0)?;
    let k3 = tangent(h, &(x + &k2 * half), t + dt / 2.0)?;
    let k4 = tangent(h, &(x + &k3 * s), t + dt)?;
    Some(x + (k1 + k2 * C::new(2.0, 0.0) + k3 * C::new(2.0, 0.0) + k4) * (s / 6.0))
}

fn correct<H: Homotopy + ?Sized>(h: &H, mut x: DVector<C>, t: f64, max_iters: usize) -> Option<DVector<C>> {
    let mut previous = f64::INFINITY;
    for k in 0..max_iters {
        let (f, hx, _, _) = h.evaluate(x.as_slice(), t);
        let dx = hx.lu().solve(&f)?;
        x -= &dx;
        if !is_finite(&x) {
            return None;
        }
        let size = dx.norm() / (1.0 + x.norm());
        if k == 0 && size > MAX_FIRST_CORRECTION {
            return None;
        }
        if size <= CORRECTOR_TOL {
            return Some(x);
        }
        if k > 0 && size > 0.25 * previous {
            return None;
        }
        previous = size;
    }
    None
}

/// Adaptive predictor–corrector tracking of one solution path of `H` from
/// `t = 0` to `t = 1`: a fourth-order Runge–Kutta predictor on the Davidenko
/// equation, Newton correction, step halving on failure and 1.5× growth
/// after four consecutive successes.
pub fn track_path<H: Homotopy + ?Sized>(h: &H, start: &[C], cfg: &TrackerConfig) -> Result<PathResult> {
    let mut x = DVector::from_column_slice(start);
    let (h0, _, _, scale0) = h.evaluate(start, 0.0);
    if !residual_ok(h0.norm(), scale0, cfg.newton_tol) {
        return Err(Error::InvalidStart(h0.norm()));
    }
    let finish = |status, endpoint: &DVector<C>, steps| {
        Ok(PathResult {
            status,
            endpoint: endpoint.iter().copied().collect(),
            steps_taken: steps,
        })
    };

    let mut t = 0.0f64;
    let mut step = cfg.initial_step;
    let mut successes = 0;
    let mut steps = 0;
    while t < 1.0 {
        if steps >= cfg.max_steps {
            return finish(PathStatus::Truncated, &x, steps);
        }
        steps += 1;
        let dt = if 1.0 - t <= step * (1.0 + 1e-12) { 1.0 - t } else { step };
        let advanced = rk4(h, &x, t, dt).and_then(|p| correct(h, p, t + dt, cfg.max_corrector_iters));
        match advanced {
            Some(next) => {
                x = next;
                t = if dt == 1.0 - t { 1.0 } else { t + dt };
                if x.iter().any(|z| z.norm() > cfg.divergence_bound) {
                    return finish(PathStatus::Diverged, &x, steps);
                }
                successes += 1;
                if successes >= 4 {
                    step = (step * 1.5).min(cfg.max_step);
                    successes = 0;
                }
            }
            None => {
                step /= 2.0;
                successes = 0;
                if step < cfg.min_step {
                    return finish(PathStatus::Diverged, &x, steps);
                }
            }
        }
    }

    for _ in 0..FINAL_NEWTON_ITERS {
        let (f, hx, _, scale) = h.evaluate(x.as_slice(), 1.0);
        if residual_ok(f.norm(), scale, cfg.newton_tol) {
            return finish(PathStatus::Converged, &x, steps);
        }
        match hx.lu().solve(&f) {
            Some(dx) if is_finite(&dx) => x -= dx,
            _ => break,
        }
    }
    finish(PathStatus::Diverged, &x, steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    fn univariate(coeffs: &[f64]) -> SparseSystem {
        let support: Vec<Vec<i64>> = (0..coeffs.len() as i64).map(|k| vec![k]).collect();
        SparseSystem::from_supports(&[support], &[coeffs.iter().map(|&v| c(v)).collect()]).unwrap()
    }

    #[test]
    fn constant_homotopy_stays_put() {
        let f = univariate(&[-4.0, 0.0, 1.0]);
        let h = StraightLineHomotopy::new(f.clone(), f, c(1.0)).unwrap();
        let r = track_path(&h, &[c(2.0)], &TrackerConfig::default()).unwrap();
        assert_eq!(r.status, PathStatus::Converged);
        assert!((r.endpoint[0] - c(2.0)).norm() < 1e-12);
    }

    #[test]
    fn square_root_path() {
        let g = univariate(&[-1.0, 0.0, 1.0]);
        let f = univariate(&[-4.0, 0.0, 1.0]);
        let h = StraightLineHomotopy::new(g, f, c(1.0)).unwrap();
        let r = track_path(&h, &[c(1.0)], &TrackerConfig::default()).unwrap();
        assert_eq!(r.status, PathStatus::Converged);
        assert!((r.endpoint[0] - c(2.0)).norm() < 1e-8);
    }

    #[test]
    fn bad_start_is_rejected() {
        let g = univariate(&[-1.0, 0.0, 1.0]);
        let h = StraightLineHomotopy::new(g.clone(), g, c(1.0)).unwrap();
        assert!(matches!(track_path(&h, &[c(1.5)], &TrackerConfig::default()), Err(Error::InvalidStart(_))));
    }

    #[test]
    fn path_to_infinity_diverges() {
        // start x − 1, target 0·x + 1 written as (1e-30)x + 1 has its root escaping
        let g = univariate(&[-1.0, 1.0]);
        let f = SparseSystem::from_supports(&[vec![vec![0]]], &[vec![c(1.0)]]).unwrap();
        let h = StraightLineHomotopy::new(g, f, C::from_polar(1.0, 0.7)).unwrap();
        let r = track_path(&h, &[c(1.0)], &TrackerConfig::default()).unwrap();
        assert_eq!(r.status, PathStatus::Diverged);
    }

    #[test]
    fn step_budget_truncates() {
        let g = univariate(&[-1.0, 0.0, 1.0]);
        let f = univariate(&[-4.0, 0.0, 1.0]);
        let h = StraightLineHomotopy::new(g, f, c(1.0)).unwrap();
        let cfg = TrackerConfig {
            max_steps: 2,
            ..TrackerConfig::default()
        };
        assert_eq!(track_path(&h, &[c(1.0)], &cfg).unwrap().status, PathStatus::Truncated);
    }

    #[test]
    fn config_validation() {
        assert!(TrackerConfig::default().validate().is_ok());
        let bad = TrackerConfig {
            max_step: 1.5,
            ..TrackerConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
