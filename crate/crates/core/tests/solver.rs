use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_decompose::decompose::BranchOrder;
use sparse_decompose::mixedvolume::mixed_volume;
use sparse_decompose::numeric::{solve_base_system, TrackerConfig};
use sparse_decompose::polynomial::{parse_system, SparseSystem, TorusPoint};
use sparse_decompose::solver::{solve_decomposable_system, solve_from_generic, SolveOptions, TraceNode};

fn fixture(name: &str) -> SparseSystem {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    parse_system(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn mv(system: &SparseSystem) -> u64 {
    mixed_volume(&system.supports()).unwrap()
}

fn randomize(system: &SparseSystem, rng: &mut ChaCha8Rng) -> SparseSystem {
    let coeffs: Vec<Vec<C>> = system
        .polynomials()
        .iter()
        .map(|p| (0..p.len()).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
        .collect();
    system.with_coefficients(&coeffs).unwrap()
}

/// `‖F(x)‖ ≤ 1e−8·(1 + maxᵢ‖fᵢ‖₁·max(1, ‖x‖∞)^maxdeg)`.
fn assert_solutions(system: &SparseSystem, points: &[TorusPoint]) {
    let l1 = system.polynomials().iter().map(|p| p.l1_norm()).fold(0.0, f64::max);
    let deg = system.max_abs_degree() as i32;
    for p in points {
        let inf = p.coords().iter().map(|z| z.norm()).fold(1.0, f64::max);
        let bound = 1e-8 * (1.0 + l1 * inf.powi(deg));
        let r = system.residual(p.coords());
        assert!(r <= bound, "residual {r} exceeds {bound} at {p:?}");
        assert!(p.min_modulus() > 1e-5);
    }
}

fn same_sets(a: &[TorusPoint], b: &[TorusPoint], tol: f64) -> bool {
    let close = |p: &TorusPoint, q: &TorusPoint| p.coords().iter().zip(q.coords()).all(|(x, y)| (x - y).norm() <= tol * (1.0 + x.norm()));
    a.len() == b.len() && a.iter().all(|p| b.iter().any(|q| close(p, q))) && b.iter().all(|q| a.iter().any(|p| close(p, q)))
}

#[test]
fn squares() {
    let f = fixture("squares.txt");
    let report = solve_decomposable_system(&f, &SolveOptions::default()).unwrap();
    assert_eq!(report.solutions.len(), 4);
    assert!(matches!(report.trace, TraceNode::Lacunary { index: 4, .. }));
    let expected = [(-2.0, -3.0), (-2.0, 3.0), (2.0, -3.0), (2.0, 3.0)];
    for (s, (a, b)) in report.solutions.iter().zip(expected) {
        assert!((s.point.coords()[0] - C::new(a, 0.0)).norm() < 1e-10);
        assert!((s.point.coords()[1] - C::new(b, 0.0)).norm() < 1e-10);
        assert_eq!(s.multiplicity_hint, 1);
    }
}

#[test]
fn triangular_fixture() {
    let f = fixture("triangular.txt");
    let report = solve_decomposable_system(&f, &SolveOptions::default()).unwrap();
    assert!(report.trace.nodes().iter().any(|n| matches!(n, TraceNode::Triangular { k: 1, .. })));
    assert_eq!(report.solutions.len() as u64, mv(&f));
    assert_solutions(&f, &report.points());
}

#[test]
fn lacunary_fixture() {
    let f = fixture("lacunary.txt");
    let report = solve_decomposable_system(&f, &SolveOptions::default()).unwrap();
    assert!(matches!(report.trace, TraceNode::Lacunary { index: 3, .. }));
    assert_eq!(report.solutions.len() as u64, mv(&f));
    assert_solutions(&f, &report.points());
}

#[test]
fn three_variable_system() {
    let f = fixture("three_variable.txt");
    let report = solve_decomposable_system(&f, &SolveOptions::default()).unwrap();
    assert_eq!(report.solutions.len() as u64, mv(&f));
    assert_solutions(&f, &report.points());
    let root = &report.trace;
    assert!(matches!(root, TraceNode::Lacunary { index: 3, .. } | TraceNode::Triangular { k: 2, .. }));
    let raw = solve_base_system(&f, &TrackerConfig::default(), 1e-5).unwrap();
    assert!(same_sets(&report.points(), &raw, 1e-6));
}

#[test]
fn branch_order_does_not_matter() {
    let f = fixture("three_variable.txt");
    let lac = solve_decomposable_system(&f, &SolveOptions::default()).unwrap();
    let tri = solve_decomposable_system(
        &f,
        &SolveOptions {
            branch_order: BranchOrder::TriangularFirst,
            ..SolveOptions::default()
        },
    )
    .unwrap();
    assert!(matches!(tri.trace, TraceNode::Triangular { k: 2, .. }));
    assert!(same_sets(&lac.points(), &tri.points(), 1e-6));
}

#[test]
fn agrees_with_base_solver_on_decomposable_fixtures() {
    for name in ["squares.txt", "lacunary.txt", "triangular.txt"] {
        let f = fixture(name);
        let report = solve_decomposable_system(&f, &SolveOptions::default()).unwrap();
        let raw = solve_base_system(&f, &TrackerConfig::default(), 1e-5).unwrap();
        assert!(same_sets(&report.points(), &raw, 1e-6), "{name}");
    }
}

#[test]
fn generic_counts_never_exceed_mixed_volume() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for name in ["lacunary.txt", "triangular.txt", "three_variable.txt"] {
        let f = fixture(name);
        let bound = mv(&f);
        let mut hits = 0;
        for trial in 0..5 {
            let g = randomize(&f, &mut rng);
            let opts = SolveOptions {
                tracker: TrackerConfig::default().with_seed(trial),
                ..SolveOptions::default()
            };
            let report = solve_decomposable_system(&g, &opts).unwrap();
            assert!(report.solutions.len() as u64 <= bound);
            assert_solutions(&g, &report.points());
            hits += (report.solutions.len() as u64 == bound) as usize;
        }
        assert!(hits >= 4, "{name}: {hits}/5");
    }
}

#[test]
fn laurent_input() {
    // x + 1/x = 3, y = 2x
    let f = parse_system("vars: x, y\nx + x^-1 - 3\ny - 2*x").unwrap();
    let report = solve_decomposable_system(&f, &SolveOptions::default()).unwrap();
    assert_eq!(report.solutions.len(), 2);
    assert_solutions(&f, &report.points());
}

#[test]
fn no_torus_solutions() {
    // parallel lines
    let f = parse_system("vars: x, y\nx + y - 1\nx + y - 2").unwrap();
    let report = solve_decomposable_system(&f, &SolveOptions::default()).unwrap();
    assert!(report.solutions.is_empty());
}

#[test]
fn degenerate_family_is_an_error() {
    let f = parse_system("vars: x, y\nx*y\nx + y - 1").unwrap();
    assert!(matches!(
        solve_decomposable_system(&f, &SolveOptions::default()),
        Err(sparse_decompose::Error::RankDeficient { .. })
    ));
}

#[test]
fn deterministic_reports() {
    let f = fixture("three_variable.txt");
    let a = solve_decomposable_system(&f, &SolveOptions::default()).unwrap();
    let b = solve_decomposable_system(&f, &SolveOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn from_generic_strategy() {
    let f = fixture("squares.txt");
    let direct = solve_decomposable_system(&f, &SolveOptions::default()).unwrap();
    let generic = solve_from_generic(&f, &SolveOptions::default()).unwrap();
    assert!(matches!(generic.trace, TraceNode::FromGeneric { .. }));
    assert!(same_sets(&direct.points(), &generic.points(), 1e-8));

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = randomize(&fixture("lacunary.txt"), &mut rng);
    let direct = solve_decomposable_system(&g, &SolveOptions::default()).unwrap();
    let generic = solve_from_generic(&g, &SolveOptions::default()).unwrap();
    assert_eq!(generic.solutions.len() as u64, mv(&g));
    assert!(same_sets(&direct.points(), &generic.points(), 1e-6));
}

#[test]
fn verification() {
    let opts = SolveOptions {
        verify: true,
        ..SolveOptions::default()
    };
    let f = fixture("three_variable.txt");
    let report = solve_decomposable_system(&f, &opts).unwrap();
    assert_eq!(report.deficiency, Some(0));
    assert_eq!(report.mixed_volume, Some(mv(&f)));
    assert_eq!(report.retries, 0);

    let crippled = SolveOptions {
        verify: true,
        tracker: TrackerConfig {
            max_steps: 1,
            ..TrackerConfig::default()
        },
        ..SolveOptions::default()
    };
    let f = fixture("simplex.txt");
    let report = solve_decomposable_system(&f, &crippled).unwrap();
    assert_eq!(report.deficiency, Some(1));
    assert!(report.solutions.is_empty());
    assert_eq!(report.retries, 3);
}

#[test]
fn invalid_options_are_rejected() {
    let f = fixture("squares.txt");
    let opts = SolveOptions {
        tolerance: 0.0,
        ..SolveOptions::default()
    };
    assert!(solve_decomposable_system(&f, &opts).is_err());
}
