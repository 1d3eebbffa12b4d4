//! Recursive solver for sparse systems over the torus.
//!
//! A system is translated so each support contains the origin, then:
//!
//! * in one variable its roots come from a companion matrix;
//! * if lacunary, `F = G ∘ Φ` and the solutions are the fibres of `Φ` over
//!   the solutions of `G`;
//! * if triangular, the square subsystem is solved first; for each of its
//!   solutions `z` the remaining polynomials form a residual system in the
//!   other variables, one instance is solved and the rest are reached from
//!   it by a parameter homotopy;
//! * otherwise a base solver (built-in homotopy or an external command) is
//!   called.
//!
//! Each level polishes its points by Newton's method on its own system,
//! drops points with a coordinate of modulus at most `tolerance`, and
//! removes duplicates.

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decompose::{decompose, BranchOrder, Decomposition, FiberMap};
use crate::error::{Error, Result};
use crate::external::{solve_external, DEFAULT_TIMEOUT};
use crate::mixedvolume::mixed_volume;
use crate::numeric::{
    canonical_sort, derive_seed, newton_refine, parameter_homotopy, residual_ok, solve_base_system, univariate_roots,
    TrackerConfig,
};
use crate::polynomial::{translate_to_origin, SparseSystem, TorusPoint};

pub use crate::decompose::preimages;

type C = Complex64;

/// Scaled residual every reported solution must meet.
pub const SOLUTION_TOL: f64 = 1e-8;
const POLISH_ITERS: usize = 20;

// seed tags for sub-tasks
const TAG_INNER: u64 = 1;
const TAG_SUBSYSTEM: u64 = 2;
const TAG_RESIDUAL: u64 = 3;
const TAG_HOMOTOPY: u64 = 4;
const TAG_GENERIC: u64 = 5;
const TAG_STAGE_RETRY: u64 = 0x100;
const TAG_VERIFY_RETRY: u64 = 0x200;
const TAG_SCRATCH: u64 = 0x10000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    Direct,
    /// Solve a random instance on the same supports, then move its
    /// solutions to the given coefficients by a parameter homotopy.
    FromGeneric,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseSolver {
    #[default]
    Builtin,
    /// Shell command speaking the JSON file formats on stdin/stdout.
    External(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Points with a coordinate of modulus at most this are not torus points.
    pub tolerance: f64,
    pub verify: bool,
    pub strategy: Strategy,
    pub base_solver: BaseSolver,
    pub tracker: TrackerConfig,
    pub max_verify_retries: usize,
    pub branch_order: BranchOrder,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tolerance: 1e-5,
            verify: false,
            strategy: Strategy::Direct,
            base_solver: BaseSolver::Builtin,
            tracker: TrackerConfig::default(),
            max_verify_retries: 3,
            branch_order: BranchOrder::LacunaryFirst,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        self.tracker.validate()
    }

    pub fn seed(&self) -> u64 {
        self.tracker.seed
    }
}

/// The steps the recursion took, with the number of points each produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "kebab-case")]
pub enum TraceNode {
    Univariate {
        degree: usize,
        found: usize,
    },
    Lacunary {
        index: u64,
        found: usize,
        inner: Box<TraceNode>,
    },
    Triangular {
        k: usize,
        subset: Vec<usize>,
        found: usize,
        subsystem: Box<TraceNode>,
        residual: Vec<TraceNode>,
    },
    ParameterHomotopy {
        n: usize,
        instances: usize,
        found: usize,
    },
    Base {
        n: usize,
        solver: String,
        attempts: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mixed_volume: Option<u64>,
        found: usize,
    },
    FromGeneric {
        found: usize,
        generic: Box<TraceNode>,
    },
}

impl TraceNode {
    pub fn found(&self) -> usize {
        match self {
            TraceNode::Univariate { found, .. }
            | TraceNode::Lacunary { found, .. }
            | TraceNode::Triangular { found, .. }
            | TraceNode::ParameterHomotopy { found, .. }
            | TraceNode::Base { found, .. }
            | TraceNode::FromGeneric { found, .. } => *found,
        }
    }

    pub fn children(&self) -> Vec<&TraceNode> {
        match self {
            TraceNode::Lacunary { inner, .. } => vec![inner],
            TraceNode::Triangular { subsystem, residual, .. } => {
                std::iter::once(subsystem.as_ref()).chain(residual.iter()).collect()
            }
            TraceNode::FromGeneric { generic, .. } => vec![generic],
            _ => Vec::new(),
        }
    }

    /// Pre-order walk of the tree.
    pub fn nodes(&self) -> Vec<&TraceNode> {
        let mut out = vec![self];
        for c in self.children() {
            out.extend(c.nodes());
        }
        out
    }

    fn set_found(&mut self, n: usize) {
        match self {
            TraceNode::Univariate { found, .. }
            | TraceNode::Lacunary { found, .. }
            | TraceNode::Triangular { found, .. }
            | TraceNode::ParameterHomotopy { found, .. }
            | TraceNode::Base { found, .. }
            | TraceNode::FromGeneric { found, .. } => *found = n,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorusSolution {
    pub point: TorusPoint,
    /// `‖F(x)‖₂`.
    pub residual: f64,
    /// Number of computed points merged into this one.
    pub multiplicity_hint: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub solutions: Vec<TorusSolution>,
    pub mixed_volume: Option<u64>,
    /// `MV − found` when verification ran.
    pub deficiency: Option<u64>,
    pub trace: TraceNode,
    /// Whole-solve reruns made by verification.
    pub retries: usize,
}

impl SolveReport {
    pub fn points(&self) -> Vec<TorusPoint> {
        self.solutions.iter().map(|s| s.point.clone()).collect()
    }
}

/// Solves `system` over the torus, recursing on decompositions.
pub fn solve_decomposable_system(system: &SparseSystem, opts: &SolveOptions) -> Result<SolveReport> {
    opts.validate()?;
    let (points, trace) = match opts.strategy {
        Strategy::Direct => solve_rec(system, opts, opts.seed())?,
        Strategy::FromGeneric => from_generic(system, opts, opts.seed())?,
    };
    let report = SolveReport {
        solutions: finish(system, points),
        mixed_volume: None,
        deficiency: None,
        trace,
        retries: 0,
    };
    if opts.verify {
        verify_count(system, report, opts)
    } else {
        Ok(report)
    }
}

/// Solves `system` by first solving a random instance on the same supports.
pub fn solve_from_generic(system: &SparseSystem, opts: &SolveOptions) -> Result<SolveReport> {
    solve_decomposable_system(
        system,
        &SolveOptions {
            strategy: Strategy::FromGeneric,
            ..opts.clone()
        },
    )
}

/// Compares the number of solutions with the mixed volume and, while it is
/// short, reruns the solve with fresh seeds and merges what is found.
pub fn verify_count(system: &SparseSystem, mut report: SolveReport, opts: &SolveOptions) -> Result<SolveReport> {
    let mv = mixed_volume(&system.supports())?;
    let verifying = SolveOptions {
        verify: true,
        ..opts.clone()
    };
    let mut points = report.points();
    while (points.len() as u64) < mv && report.retries < opts.max_verify_retries {
        report.retries += 1;
        let seed = derive_seed(opts.seed(), TAG_VERIFY_RETRY + report.retries as u64);
        let rerun = match opts.strategy {
            Strategy::Direct => solve_rec(system, &verifying, seed),
            Strategy::FromGeneric => from_generic(system, &verifying, seed),
        };
        // a failed rerun leaves the earlier points standing
        if let Ok((more, _)) = rerun {
            points.extend(more);
            points = finish(system, points).into_iter().map(|s| s.point).collect();
        }
    }
    report.solutions = finish(system, points);
    report.mixed_volume = Some(mv);
    report.deficiency = Some(mv.saturating_sub(report.solutions.len() as u64));
    Ok(report)
}

fn from_generic(system: &SparseSystem, opts: &SolveOptions, seed: u64) -> Result<(Vec<TorusPoint>, TraceNode)> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, TAG_GENERIC));
    let random: Vec<Vec<C>> = system
        .polynomials()
        .iter()
        .map(|p| (0..p.len()).map(|_| C::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))).collect())
        .collect();
    let generic = system.with_coefficients(&random)?;
    let (start, trace) = solve_rec(&generic, opts, derive_seed(seed, TAG_INNER))?;
    let cfg = opts.tracker.with_seed(derive_seed(seed, TAG_HOMOTOPY));
    let points = parameter_homotopy(&generic, &start, &system.coefficients(), &cfg, opts.tolerance)?;
    let points = settle(system, points, opts);
    Ok((
        points.clone(),
        TraceNode::FromGeneric {
            found: points.len(),
            generic: Box::new(trace),
        },
    ))
}

fn solve_rec(system: &SparseSystem, opts: &SolveOptions, seed: u64) -> Result<(Vec<TorusPoint>, TraceNode)> {
    let (translated, _) = translate_to_origin(system);
    let (points, mut trace) = if translated.n() == 1 {
        univariate(&translated, opts)?
    } else {
        match decompose(&translated, opts.branch_order)? {
            Decomposition::Lacunary(d) => {
                let (zs, inner) = solve_rec(&d.inner, opts, derive_seed(seed, TAG_INNER))?;
                let fibres = FiberMap::new(&d.phi)?;
                let points: Vec<TorusPoint> = zs.par_iter().flat_map_iter(|z| fibres.fiber(z.coords())).map(TorusPoint).collect();
                let node = TraceNode::Lacunary {
                    index: d.index.to_u64().unwrap_or(u64::MAX),
                    found: 0,
                    inner: Box::new(inner),
                };
                (points, node)
            }
            Decomposition::Triangular(d) => {
                let (zs, sub) = solve_rec(&d.subsystem, opts, derive_seed(seed, TAG_SUBSYSTEM))?;
                let (ws, residual) = solve_residuals(&d, &zs, opts, seed)?;
                let points = zs
                    .iter()
                    .zip(ws)
                    .flat_map(|(z, ws)| {
                        ws.into_iter().map(|w| {
                            let y: Vec<C> = z.coords().iter().chain(w.coords()).copied().collect();
                            TorusPoint(d.lift(&y))
                        })
                    })
                    .collect();
                let node = TraceNode::Triangular {
                    k: d.k,
                    subset: d.subset.clone(),
                    found: 0,
                    subsystem: Box::new(sub),
                    residual,
                };
                (points, node)
            }
            Decomposition::Indecomposable => base_stage(&translated, opts, seed)?,
        }
    };
    let points = settle(system, points, opts);
    trace.set_found(points.len());
    Ok((points, trace))
}

/// Solutions `w` of the residual instance for each `z`, plus trace nodes.
fn solve_residuals(
    d: &crate::decompose::TriangularDecomposition,
    zs: &[TorusPoint],
    opts: &SolveOptions,
    seed: u64,
) -> Result<(Vec<Vec<TorusPoint>>, Vec<TraceNode>)> {
    let instances: Vec<Option<(SparseSystem, bool)>> = zs.iter().map(|z| d.residual_instance(z.coords())).collect();
    let mut results: Vec<Vec<TorusPoint>> = vec![Vec::new(); zs.len()];
    let mut nodes = Vec::new();

    let reference = instances.iter().position(|i| matches!(i, Some((_, false))));
    let mut scratch: Vec<usize> = Vec::new();
    let mut transported: Vec<usize> = Vec::new();
    if let Some(r) = reference {
        let (ref_sys, _) = instances[r].as_ref().expect("reference instance");
        let (ws, node) = solve_rec(ref_sys, opts, derive_seed(seed, TAG_RESIDUAL))?;
        nodes.push(node);
        let ref_supports = ref_sys.supports();
        for (j, inst) in instances.iter().enumerate() {
            match inst {
                _ if j == r => {}
                Some((s, false)) if s.supports() == ref_supports => transported.push(j),
                Some(_) => scratch.push(j),
                None => {}
            }
        }
        let cfg = opts.tracker.with_seed(derive_seed(seed, TAG_HOMOTOPY));
        let moved: Vec<Result<Vec<TorusPoint>>> = transported
            .par_iter()
            .map(|&j| {
                let (s, _) = instances[j].as_ref().expect("transported instance");
                parameter_homotopy(ref_sys, &ws, &s.coefficients(), &cfg, opts.tolerance).map(|p| settle(s, p, opts))
            })
            .collect();
        let mut found = 0;
        for (&j, m) in transported.iter().zip(moved) {
            let m = m?;
            found += m.len();
            results[j] = m;
        }
        if !transported.is_empty() {
            nodes.push(TraceNode::ParameterHomotopy {
                n: ref_sys.n(),
                instances: transported.len(),
                found,
            });
        }
        results[r] = ws;
    } else {
        scratch = (0..instances.len()).filter(|&j| instances[j].is_some()).collect();
    }

    for j in scratch {
        let (s, _) = instances[j].as_ref().expect("scratch instance");
        match solve_rec(s, opts, derive_seed(seed, TAG_SCRATCH + j as u64)) {
            Ok((ws, node)) => {
                results[j] = ws;
                nodes.push(node);
            }
            // a degenerate instance has no isolated solutions
            Err(Error::RankDeficient { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((results, nodes))
}

fn univariate(system: &SparseSystem, opts: &SolveOptions) -> Result<(Vec<TorusPoint>, TraceNode)> {
    let p = &system.polynomials()[0];
    let degree = p.support().exponents().iter().map(|e| e[0]).max().unwrap_or(0) as usize;
    let points = if degree == 0 {
        Vec::new()
    } else {
        let mut coeffs = vec![C::new(0.0, 0.0); degree + 1];
        for (e, c) in p.terms() {
            coeffs[e[0] as usize] += c;
        }
        univariate_roots(&coeffs)?
            .into_iter()
            .filter(|r| r.norm() > opts.tolerance)
            .map(|r| TorusPoint(vec![r]))
            .collect()
    };
    Ok((points, TraceNode::Univariate { degree, found: 0 }))
}

fn base_stage(system: &SparseSystem, opts: &SolveOptions, seed: u64) -> Result<(Vec<TorusPoint>, TraceNode)> {
    match &opts.base_solver {
        BaseSolver::Builtin => {
            let mut points = solve_base_system(system, &opts.tracker.with_seed(seed), opts.tolerance)?;
            let mut attempts = 1;
            let mut mv = None;
            if opts.verify {
                let target = mixed_volume(&system.supports())?;
                mv = Some(target);
                while (points.len() as u64) < target && attempts <= opts.max_verify_retries {
                    let cfg = opts.tracker.with_seed(derive_seed(seed, TAG_STAGE_RETRY + attempts as u64));
                    points.extend(solve_base_system(system, &cfg, opts.tolerance)?);
                    points = settle(system, points, opts);
                    attempts += 1;
                }
            }
            let node = TraceNode::Base {
                n: system.n(),
                solver: "builtin".into(),
                attempts,
                mixed_volume: mv,
                found: 0,
            };
            Ok((points, node))
        }
        BaseSolver::External(command) => {
            let points = solve_external(command, system, opts.tolerance, DEFAULT_TIMEOUT)?;
            let node = TraceNode::Base {
                n: system.n(),
                solver: format!("extern:{command}"),
                attempts: 1,
                mixed_volume: None,
                found: 0,
            };
            Ok((points, node))
        }
    }
}

/// Polish on `system`, drop non-torus and non-solutions, merge duplicates.
fn settle(system: &SparseSystem, points: Vec<TorusPoint>, opts: &SolveOptions) -> Vec<TorusPoint> {
    let polished: Vec<TorusPoint> = points
        .into_par_iter()
        .filter_map(|p| polish(system, p, opts.tracker.newton_tol))
        .filter(|p| p.min_modulus() > opts.tolerance)
        .collect();
    cluster(polished).into_iter().map(|(p, _)| p).collect()
}

fn polish(system: &SparseSystem, p: TorusPoint, tol: f64) -> Option<TorusPoint> {
    let accept = |q: &TorusPoint| residual_ok(system.residual(q.coords()), system.magnitude(q.coords()), SOLUTION_TOL);
    match newton_refine(system, p.coords(), tol, POLISH_ITERS) {
        Ok(q) if accept(&q) => Some(q),
        _ => accept(&p).then_some(p),
    }
}

/// Greedy clustering under `‖x − y‖ ≤ 1e−8·(1 + ‖x‖)`, sorted canonically.
fn cluster(points: Vec<TorusPoint>) -> Vec<(TorusPoint, usize)> {
    let norm = |v: &[C]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut groups: Vec<(TorusPoint, usize)> = Vec::new();
    for p in points {
        let hit = groups.iter_mut().find(|(q, _)| {
            let diff: Vec<C> = q.coords().iter().zip(p.coords()).map(|(a, b)| a - b).collect();
            norm(&diff) <= 1e-8 * (1.0 + norm(q.coords()))
        });
        match hit {
            Some(g) => g.1 += 1,
            None => groups.push((p, 1)),
        }
    }
    let mut keys: Vec<TorusPoint> = groups.iter().map(|g| g.0.clone()).collect();
    canonical_sort(&mut keys);
    keys.into_iter()
        .map(|k| groups.iter().find(|g| g.0 == k).cloned().expect("sorted key comes from groups"))
        .collect()
}

fn finish(system: &SparseSystem, points: Vec<TorusPoint>) -> Vec<TorusSolution> {
    cluster(points)
        .into_iter()
        .map(|(point, multiplicity_hint)| TorusSolution {
            residual: system.residual(point.coords()),
            point,
            multiplicity_hint,
        })
        .collect()
}
