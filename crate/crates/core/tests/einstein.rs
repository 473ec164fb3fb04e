use berger_core::algebra::Metric;
use berger_core::einstein::*;
use berger_core::families::alpha_lc;
use berger_core::nomizu::Nomizu;
use berger_core::tolerance::TAU_SOL;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: [f64; 6] = [-3.0, -1.5, -1.0, -0.5, 0.5, 2.0];

fn random_coords(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(-3.0..3.0)).collect()
}

#[test]
fn defect_vanishes_exactly_on_the_equation() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for n in 1..=5 {
        for eps in EPS {
            let solver = EinsteinSolver::closed_form(n, eps).unwrap();
            let eq = einstein_equation(n, eps).unwrap();
            let mut draws = on_shell_samples(n, eps, 100, &mut rng).unwrap();
            while draws.len() < 200 {
                draws.push(random_coords(solver.dim(), &mut rng));
            }
            for x in draws {
                let d = solver.defect(&x);
                let on = eq.holds(eps, &x, 1e-6);
                assert_eq!(d <= TAU_SOL, on, "n={n} eps={eps} x={x:?} defect={d:e}");
            }
        }
    }
}

#[test]
fn scalar_closed_form_matches_contraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for n in 1..=5 {
        let nz = Nomizu::new(n);
        for eps in EPS {
            let g = Metric::new(n, eps).unwrap();
            let solver = EinsteinSolver::closed_form(n, eps).unwrap();
            for _ in 0..20 {
                let x = random_coords(solver.dim(), &mut rng);
                let contracted = nz.scalar(&nz.ricci_of(&solver.alpha(&x)), &g);
                let closed = scalar_curvature_closed(n, eps, &x).unwrap();
                assert!((contracted - closed).abs() <= 1e-9 * (1.0 + closed.abs()), "n={n} eps={eps} {contracted} {closed}");
            }
            for x in on_shell_samples(n, eps, 20, &mut rng).unwrap() {
                let contracted = nz.scalar(&nz.ricci_of(&solver.alpha(&x)), &g);
                let formula = scalar_curvature_formula(n, eps, &x).unwrap();
                assert!((contracted - formula).abs() <= 1e-9 * (1.0 + formula.abs()), "n={n} eps={eps} {contracted} {formula}");
            }
        }
    }
}

#[test]
fn numeric_solutions_n4_lorentzian() {
    let pts = solve_numeric(4, 1.0, 8, 0).unwrap();
    assert_eq!(pts.len(), 2);
    let expected = (10.0_f64 / 3.0).sqrt();
    for p in &pts {
        assert!((p[0].abs() - expected).abs() <= 1e-8, "{p:?}");
    }
    assert!(pts[0][0] < 0.0 && pts[1][0] > 0.0);
}

#[test]
fn numeric_solutions_satisfy_equation() {
    for n in 1..=5 {
        for eps in [-2.0, -1.0, -0.5, 1.0] {
            let eq = einstein_equation(n, eps).unwrap();
            let pts = solve_numeric(n, eps, 10, 7).unwrap();
            assert_eq!(pts.is_empty(), classify(n, eps).unwrap().is_empty(), "n={n} eps={eps}");
            for p in pts {
                assert!(eq.holds(eps, &p, 1e-6), "n={n} eps={eps} {p:?}");
            }
        }
    }
}

#[test]
fn solver_on_aligned_generic_space_agrees() {
    use berger_core::equivariance::skew_torsion_space;
    use berger_core::families::skew_directions;
    for (n, eps) in [(2, 1.0), (3, -2.0), (4, 1.0)] {
        let space = skew_torsion_space(n, eps)
            .unwrap()
            .aligned(skew_directions(n, eps), 1e-9)
            .unwrap();
        let solver = EinsteinSolver::from_space(&space, eps).unwrap();
        let eq = einstein_equation(n, eps).unwrap();
        let pts = solve_numeric_with(&solver, 6, 3, TAU_SOL).unwrap();
        assert!(!pts.is_empty());
        for p in pts {
            assert!(eq.holds(eps, &p, 1e-6), "n={n} eps={eps} {p:?}");
        }
    }
}

#[test]
fn n1_line_and_empty_cases() {
    let pts = solve_numeric(1, -1.0, 5, 0).unwrap();
    assert_eq!(pts.len(), 5);
    let solver = EinsteinSolver::closed_form(1, -1.0).unwrap();
    for s in [-7.0, 0.0, 2.5] {
        assert!(solver.defect(&[s]) <= TAU_SOL);
    }
    for eps in [-2.0, -0.5, 1.0] {
        let solver = EinsteinSolver::closed_form(1, eps).unwrap();
        let (m, _) = solver.min_defect_on_line(-10.0, 10.0, 400);
        assert!(m > 1e-3, "eps={eps} min={m}");
        assert!(solve_numeric(1, eps, 5, 0).unwrap().is_empty());
    }
}

#[test]
fn empty_cells_have_no_numeric_points() {
    assert!(solve_numeric(2, -0.5, 5, 0).unwrap().is_empty());
    assert!(solve_numeric(4, -0.5, 5, 0).unwrap().is_empty());
}

#[test]
fn variety_samples_are_consistent() {
    let v = einstein_variety(3, -1.0, 6, 0, TAU_SOL).unwrap();
    assert_eq!(v.kind, VarietyClass::Cone);
    assert!(!v.sample_points.is_empty());
    for p in &v.sample_points {
        assert!(v.equation.holds(-1.0, p, 10.0 * TAU_SOL));
    }
}

#[test]
fn ricci_flat_samples_have_vanishing_symmetric_ricci() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for n in 1..=5 {
        let locus = ricci_flat_locus(n).unwrap();
        for (eps, x) in locus.samples(10, &mut rng) {
            let solver = EinsteinSolver::closed_form(n, eps).unwrap();
            let ric = solver.nomizu().ricci_of(&solver.alpha(&x));
            assert!(ric.sym().norm() <= TAU_SOL, "n={n} eps={eps} {x:?} {}", ric.sym().norm());
            if n != 2 {
                assert!(ric.norm() <= TAU_SOL, "n={n} eps={eps} {x:?}");
            }
        }
    }
}

#[test]
fn n2_ricci_flat_full_ricci_is_antisymmetric_and_linear_in_p() {
    let solver = EinsteinSolver::closed_form(2, -1.5).unwrap();
    let nz = solver.nomizu();
    let ric = |x: &[f64]| nz.ricci_of(&solver.alpha(x));
    let pole = ric(&[1.0, 0.0, 0.0]);
    assert!(pole.norm() <= TAU_SOL);
    let a = ric(&[0.6, 0.8, 0.0]);
    assert!(a.sym().norm() <= TAU_SOL);
    let b = ric(&[0.6, 0.4, 0.0]);
    assert!(a.norm() > 1.0);
    assert!(a.antisym().max_abs_diff(&b.antisym().scale(2.0)) <= 1e-9);
}

#[test]
fn flat_connections() {
    let r = flat_connection_check(3, -1.0).unwrap();
    assert!(r.flat_found(TAU_SOL), "{r:?}");
    for (n, eps) in [(4, -1.0), (3, 2.0), (5, -1.0)] {
        let r = flat_connection_check(n, eps).unwrap();
        assert!(r.circle_max_curvature.is_none());
        assert!(r.min_curvature_norm > 0.1, "{r:?}");
    }
    assert!(flat_connection_check(2, -1.0).is_err());
}

#[test]
fn lc_is_a_member_of_the_skew_family() {
    for n in 1..=4 {
        let solver = EinsteinSolver::closed_form(n, -1.0).unwrap();
        let zeros = vec![0.0; solver.dim()];
        assert!(solver.alpha(&zeros).max_abs_diff(&alpha_lc(n, -1.0).unwrap()) == 0.0);
        // round sphere is Einstein
        assert!(solver.defect(&zeros) <= TAU_SOL);
    }
}
