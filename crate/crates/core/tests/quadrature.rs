use std::f64::consts::{E, PI};

use lpgeom::bodies::{hull, ConvexBody};
use lpgeom::quadrature::*;
use lpgeom::rng;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn unit_triangle() -> Vec<Vec<f64>> {
    vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]
}

fn simpson(g: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = g(a) + g(b);
    for i in 1..m {
        s += g(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `∫ e^{w0 x + w1 y}` over the unit triangle: the inner integral in closed
/// form, the outer one by composite Simpson.
fn tensor_triangle(w0: f64, w1: f64) -> f64 {
    let inner = |x: f64| {
        let l = 1.0 - x;
        if (w1 * l).abs() < 1e-300 {
            l
        } else {
            (w1 * l).exp_m1() / w1
        }
    };
    simpson(|x| (w0 * x).exp() * inner(x), 0.0, 1.0, 4000)
}

#[test]
fn special_values() {
    assert!((ball_volume(2) - PI).abs() < 1e-15);
    assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    assert!((euler_beta(1.0, 3.0) - 1.0 / 3.0).abs() < 1e-14);
    assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
    assert_eq!(factorial(4), 24.0);
}

#[test]
fn triangulations() {
    let t = triangulate(&hull(&unit_triangle()).unwrap()).unwrap();
    assert_eq!(t.simplices.len(), 1);
    let sq = triangulate(&ConvexBody::cube(2, 1.0).unwrap()).unwrap();
    assert_eq!(sq.simplices.len(), 4);
    for s in &sq.scales {
        assert!((s / 2.0 - 1.0).abs() < 1e-14);
    }
    assert!((sq.total_volume - 4.0).abs() < 1e-14);
}

#[test]
fn exp_over_simplices() {
    let tri = unit_triangle();
    assert!((integrate_exp_simplex(&tri, &[0.0, 0.0]) - 0.5).abs() < 1e-15);
    assert!((integrate_exp_simplex(&[vec![0.0], vec![1.0]], &[1.0]) - (E - 1.0)).abs() < 1e-14);

    let oracle = tensor_triangle(1.0, 1.0);
    let v = integrate_exp_simplex(&tri, &[1.0, 1.0]);
    assert!((v - oracle).abs() <= 1e-10 * oracle, "{v} vs {oracle}");
    let oracle = tensor_triangle(2.0, -0.7);
    let v = integrate_exp_simplex(&tri, &[2.0, -0.7]);
    assert!((v - oracle).abs() <= 1e-10 * oracle);
}

#[test]
fn exp_over_simplex_is_stable_at_collisions() {
    let tri = unit_triangle();
    let w = [1.0, 1.0];
    let base = integrate_exp_simplex(&tri, &w);
    for d in [[1e-8, 0.0], [0.0, 1e-8], [-1e-8, 1e-8]] {
        let mut moved = tri.clone();
        moved[2][0] += d[0];
        moved[2][1] += d[1];
        let v = integrate_exp_simplex(&moved, &w);
        assert!((v - base).abs() <= 1e-6 * base);
    }
}

#[test]
fn exp_over_bodies() {
    let sq = ConvexBody::cube(2, 1.0).unwrap();
    assert!((integrate_exp_body(&sq, &[0.0, 0.0]).unwrap().value - 4.0).abs() < 1e-12);
    let want = 2.0 * (E - 1.0 / E);
    assert!((integrate_exp_body(&sq, &[1.0, 0.0]).unwrap().value - want).abs() < 1e-12 * want);

    let disk = ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap();
    assert!((integrate_exp_body(&disk, &[0.0, 0.0]).unwrap().value - PI).abs() < 1e-10);
}

#[test]
fn deterministic_and_mc_agree() {
    for seed in [1, 2, 3] {
        let k = ConvexBody::random_poly(2, 8, seed, false).unwrap();
        let w = rng::unit_vector(&mut rng::stream(seed, 4, 0), 2);
        let det = integrate_exp_body(&k, &w).unwrap();
        let mc = integrate_exp_body_mc(&k, &w, 200_000, &mut rng::stream(seed, 5, 0)).unwrap();
        assert!((det.value - mc.value).abs() <= 3.0 * (mc.error + det.error));
    }
    let ball = ConvexBody::ball(vec![0.0; 3], 1.0).unwrap();
    let w = [0.5, -0.2, 0.1];
    let det = integrate_exp_body(&ball, &w).unwrap();
    let mc = integrate_exp_body_mc(&ball, &w, 200_000, &mut rng::stream(9, 5, 0)).unwrap();
    assert!((det.value - mc.value).abs() <= 3.0 * (mc.error + det.error));
}

#[test]
fn radial_integrals() {
    let e = integrate_radial(|r| (-r).exp(), 1, 1.0, 1e-12).unwrap();
    assert!((e.value - 1.0).abs() < 1e-10);
    let e = integrate_radial(|r| (-2.0 * r).exp(), 3, 1.0, 1e-12).unwrap();
    assert!((e.value - 0.25).abs() < 1e-10);
    // e^{-|ry|} for the unit interval at p = inf and y = 1
    let e = integrate_radial(|r| (-r.abs()).exp(), 1, 0.5, 1e-12).unwrap();
    assert!((e.value - 1.0).abs() < 1e-10);
    assert!(integrate_radial(|_| 1.0, 1, 0.0, 1e-9).is_err());
}

#[test]
fn sphere_grids() {
    let g = sphere_grid(2, 360).unwrap();
    assert!((g.integrate(|_| 1.0) - 2.0 * PI).abs() < 1e-12);
    let g = sphere_grid(3, 16).unwrap();
    assert!((g.integrate(|u| u[2] * u[2]) - 4.0 * PI / 3.0).abs() < 1e-6);
    assert!(sphere_grid(4, 8).is_err());

    let sq = ConvexBody::cube(2, 1.0).unwrap();
    let g = sphere_grid(2, 16384).unwrap();
    let vol = 0.5 * g.integrate(|u| sq.gauge(u).unwrap().powi(-2));
    assert!((vol - 4.0).abs() < 1e-6);
}

#[test]
fn monte_carlo_integrals() {
    let mut s = rng::stream(1, 0, 0);
    let e = mc_integral(|_| true, &[0.0, 0.0], &[1.0, 1.0], |_| 1.0, 1000, &mut s).unwrap();
    assert!((e.value - 1.0).abs() <= e.error.max(1e-15));

    let mut s = rng::stream(1, 0, 0);
    let e = mc_integral(
        |x| x[0] * x[0] + x[1] * x[1] <= 1.0,
        &[-1.0, -1.0],
        &[1.0, 1.0],
        |_| 1.0,
        1_000_000,
        &mut s,
    )
    .unwrap();
    assert!((e.value - PI).abs() <= 3.0 * e.error);

    let mut s = rng::stream(1, 0, 0);
    assert!(mc_integral(|_| false, &[0.0], &[1.0], |_| 1.0, 100, &mut s).is_err());
}

#[test]
fn monte_carlo_is_reproducible() {
    let k = ConvexBody::random_poly(3, 10, 4, false).unwrap();
    let w = [0.3, 0.1, -0.2];
    let a = integrate_exp_body_mc(&k, &w, 10_000, &mut rng::stream(7, 1, 2)).unwrap();
    let b = integrate_exp_body_mc(&k, &w, 10_000, &mut rng::stream(7, 1, 2)).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.error.to_bits(), b.error.to_bits());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, rng_seed: RngSeed::Fixed(48), ..ProptestConfig::default() })]

    #[test]
    fn radial_error_is_honest(a in 0.1f64..3.0, b in 0.0f64..2.0, n in 1usize..=3) {
        let f = |r: f64| (-a * r - b * r * r).exp();
        let coarse = integrate_radial(f, n, a, 1e-6).unwrap();
        let fine = integrate_radial(f, n, a, 5e-7).unwrap();
        prop_assert!((coarse.value - fine.value).abs() <= coarse.error + 1e-15);
    }

    #[test]
    fn simplex_rule_matches_tensor_oracle(w0 in -3.0f64..3.0, w1 in -3.0f64..3.0) {
        let v = integrate_exp_simplex(&unit_triangle(), &[w0, w1]);
        let oracle = tensor_triangle(w0, w1);
        prop_assert!((v - oracle).abs() <= 1e-9 * oracle);
    }
}
