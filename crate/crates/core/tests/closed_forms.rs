use berger_core::algebra::Metric;
use berger_core::families::*;
use berger_core::nomizu::Nomizu;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: [f64; 5] = [-3.0, -1.0, -0.5, 1.0, 2.0];

fn draw(n: usize, eps: f64, rng: &mut ChaCha8Rng) -> FamilyParams {
    FamilyParams::skew(
        n,
        eps,
        rng.random_range(-2.0..2.0),
        [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
    )
}

#[test]
fn torsion_matches_generic_for_metric_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in 1..=5 {
        let nz = Nomizu::new(n);
        for eps in EPS {
            for _ in 0..20 {
                let mut p = FamilyParams::metric(
                    Regime::for_n(n),
                    Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
                    rng.random_range(-2.0..2.0),
                );
                if n <= 3 {
                    let pp = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                    let p2 = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                    p = p.with_p(pp, if n == 2 { p2 } else { Complex64::new(0.0, 0.0) });
                }
                let alpha = alpha_family(n, eps, &p).unwrap();
                let diff = nz.torsion(&alpha).max_abs_diff(&closed_torsion(n, eps, &p).unwrap());
                assert!(diff < 1e-9, "n={n} eps={eps} diff={diff:e}");
            }
        }
    }
}

#[test]
fn curvature_and_ricci_match_generic() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for n in [1, 3, 4, 5] {
        let nz = Nomizu::new(n);
        for eps in EPS {
            for _ in 0..20 {
                let p = draw(n, eps, &mut rng);
                let alpha = alpha_family(n, eps, &p).unwrap();
                let r = nz.curvature(&alpha);
                let dr = r.max_abs_diff(&closed_curvature(n, eps, &p).unwrap());
                assert!(dr < 1e-9, "curvature n={n} eps={eps} diff={dr:e}");
                let dric = nz.ricci(&r).max_abs_diff(&closed_ricci(n, eps, &p).unwrap());
                assert!(dric < 1e-9, "ricci n={n} eps={eps} diff={dric:e}");
            }
        }
    }
}

#[test]
fn s5_symmetric_ricci_and_s_tensor() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let nz = Nomizu::new(2);
    let mut worst_antisym = 0.0f64;
    for eps in EPS {
        let g = Metric::new(2, eps).unwrap();
        for _ in 0..20 {
            let p = draw(2, eps, &mut rng);
            let alpha = alpha_family(2, eps, &p).unwrap();
            let ric = nz.ricci_of(&alpha);
            let d = ric.sym().max_abs_diff(&closed_sym_ricci(2, eps, &p).unwrap());
            assert!(d < 1e-9, "eps={eps} diff={d:e}");
            let ds = nz.s_tensor(&alpha, &g).max_abs_diff(&closed_s_tensor_s5(eps, &p).unwrap());
            assert!(ds < 1e-9, "S eps={eps} diff={ds:e}");
            worst_antisym = worst_antisym.max(ric.antisym().max_abs());
        }
    }
    println!("largest antisymmetric Ricci entry on S5: {worst_antisym:e}");
}
