use itertools::Itertools;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::polynomial::{SparseSystem, TorusPoint};

use super::newton::{newton_refine, norm};
use super::tracker::{track_path, PathStatus, StraightLineHomotopy, TrackerConfig};

type C = Complex64;

/// Start systems larger than this are refused rather than tracked.
const MAX_PATHS: u64 = 1 << 22;
const POLISH_ITERS: usize = 20;

/// Random point on the unit circle drawn from `seed`.
pub fn random_gamma(seed: u64) -> C {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    C::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Independent child seed for a labelled sub-task (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Drops near-duplicates: `y` is dropped after an earlier `x` with
/// `‖x − y‖ ≤ 1e−8·(1 + ‖x‖)`.
pub fn dedup_points(points: Vec<TorusPoint>) -> Vec<TorusPoint> {
    let mut kept: Vec<TorusPoint> = Vec::with_capacity(points.len());
    for p in points {
        let duplicate = kept.iter().any(|q| {
            let diff: Vec<C> = q.coords().iter().zip(p.coords()).map(|(a, b)| a - b).collect();
            norm(&diff) <= 1e-8 * (1.0 + norm(q.coords()))
        });
        if !duplicate {
            kept.push(p);
        }
    }
    kept
}

fn quantize(v: f64) -> i128 {
    (v / 1e-10).round() as i128
}

/// Lexicographic order on (re, im) of each coordinate after rounding to
/// multiples of `1e−10`, so that the order does not depend on the last bits.
pub fn canonical_sort(points: &mut [TorusPoint]) {
    points.sort_by_cached_key(|p| p.coords().iter().flat_map(|z| [quantize(z.re), quantize(z.im)]).collect::<Vec<_>>());
}

/// Keeps torus points (every `|xᵢ| > tolerance`), Newton-polishes them on
/// `system`, then deduplicates and sorts.
fn finalize(system: &SparseSystem, endpoints: Vec<Vec<C>>, cfg: &TrackerConfig, tolerance: f64) -> Vec<TorusPoint> {
    let polished: Vec<TorusPoint> = endpoints
        .into_par_iter()
        .filter(|x| x.iter().all(|z| z.norm() > tolerance))
        .filter_map(|x| newton_refine(system, &x, cfg.newton_tol, POLISH_ITERS).ok())
        .filter(|p| p.min_modulus() > tolerance)
        .collect();
    let mut points = dedup_points(polished);
    canonical_sort(&mut points);
    points
}

/// Multiplies each polynomial by a monomial so that every exponent is
/// nonnegative and each variable has minimum exponent zero.
fn shift_to_orthant(system: &SparseSystem) -> Result<SparseSystem> {
    let n = system.n();
    let supports: Vec<Vec<Vec<i64>>> = system
        .supports()
        .iter()
        .map(|s| {
            let low: Vec<i64> = (0..n).map(|k| s.exponents().iter().map(|e| e[k]).min().unwrap_or(0)).collect();
            s.exponents().iter().map(|e| e.iter().zip(&low).map(|(a, b)| a - b).collect()).collect()
        })
        .collect();
    SparseSystem::from_supports(&supports, &system.coefficients()).map(|s| s.renamed(system.variables().to_vec()))
}

/// Torus solutions of `system` by a total-degree homotopy.
///
/// Supports are first shifted into the nonnegative orthant; the start system
/// is `xᵢ^{dᵢ} − 1` with `dᵢ` the total degree of the shifted `fᵢ`, and all
/// `∏ dᵢ` paths of `(1 − t)·γ·G + t·F` are tracked with `γ` drawn from
/// `cfg.seed`. Endpoints with a coordinate of modulus at most `tolerance`
/// are discarded.
pub fn solve_base_system(system: &SparseSystem, cfg: &TrackerConfig, tolerance: f64) -> Result<Vec<TorusPoint>> {
    cfg.validate()?;
    let n = system.n();
    let shifted = shift_to_orthant(system)?;
    let degrees: Vec<u64> = shifted
        .polynomials()
        .iter()
        .map(|p| p.support().exponents().iter().map(|e| e.iter().sum::<i64>() as u64).max().unwrap_or(0))
        .collect();
    if degrees.contains(&0) {
        // a nonzero constant equation
        return Ok(Vec::new());
    }
    let paths = degrees.iter().try_fold(1u64, |acc, &d| acc.checked_mul(d)).filter(|&p| p <= MAX_PATHS);
    let Some(paths) = paths else {
        return Err(Error::BaseSolverFailure(format!("total degree {degrees:?} needs too many paths")));
    };

    let start_supports: Vec<Vec<Vec<i64>>> = (0..n)
        .map(|i| {
            let mut e = vec![0; n];
            e[i] = degrees[i] as i64;
            vec![e, vec![0; n]]
        })
        .collect();
    let start_coeffs = vec![vec![C::new(1.0, 0.0), C::new(-1.0, 0.0)]; n];
    let start = SparseSystem::from_supports(&start_supports, &start_coeffs)?;
    let homotopy = StraightLineHomotopy::new(start, shifted, random_gamma(cfg.seed))?;

    let starts: Vec<Vec<C>> = degrees
        .iter()
        .map(|&d| (0..d).map(move |k| C::from_polar(1.0, std::f64::consts::TAU * k as f64 / d as f64)))
        .multi_cartesian_product()
        .collect();
    debug_assert_eq!(starts.len() as u64, paths);

    let results: Vec<_> = starts.par_iter().map(|s| track_path(&homotopy, s, cfg)).collect();
    if results.iter().all(|r| r.is_err()) {
        return Err(Error::BaseSolverFailure("every path failed to start".into()));
    }
    let endpoints = results
        .into_iter()
        .filter_map(|r| r.ok())
        .filter(|r| r.status == PathStatus::Converged)
        .map(|r| r.endpoint)
        .collect();
    Ok(finalize(system, endpoints, cfg, tolerance))
}

/// Moves known solutions of `start` to solutions of the system with the same
/// supports and coefficients `target_coefficients` along
/// `(1 − t)·γ·start + t·target`.
pub fn parameter_homotopy(
    start: &SparseSystem,
    start_solutions: &[TorusPoint],
    target_coefficients: &[Vec<C>],
    cfg: &TrackerConfig,
    tolerance: f64,
) -> Result<Vec<TorusPoint>> {
    cfg.validate()?;
    let target = start.with_coefficients(target_coefficients)?;
    if start_solutions.is_empty() {
        return Ok(Vec::new());
    }
    let homotopy = StraightLineHomotopy::new(start.clone(), target.clone(), random_gamma(cfg.seed))?;
    let results: Vec<_> = start_solutions
        .par_iter()
        .map(|s| {
            // sharpen the start so it meets the tracker's precondition
            let x = newton_refine(start, s.coords(), cfg.newton_tol, POLISH_ITERS)
                .map(|p| p.0)
                .unwrap_or_else(|_| s.coords().to_vec());
            track_path(&homotopy, &x, cfg)
        })
        .collect();
    if let Some(Err(e)) = results.iter().find(|r| r.is_err()).filter(|_| results.iter().all(|r| r.is_err())) {
        return Err(e.clone());
    }
    let endpoints = results
        .into_iter()
        .filter_map(|r| r.ok())
        .filter(|r| r.status == PathStatus::Converged)
        .map(|r| r.endpoint)
        .collect();
    Ok(finalize(&target, endpoints, cfg, tolerance))
}
