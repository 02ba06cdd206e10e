use lpgeom::bodies::{hull, ConvexBody, Direction, Rep};
use lpgeom::rng;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::Rng;

fn poly(n: usize, m: usize, seed: u64, symmetric: bool) -> ConvexBody {
    ConvexBody::random_poly(n, m, seed, symmetric).unwrap()
}

fn triangle() -> ConvexBody {
    hull(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
}

/// Rejection-sampled volume and barycenter with 95% radii.
fn mc_volume_barycenter(k: &ConvexBody, samples: usize, seed: u64) -> (f64, f64, Vec<f64>, Vec<f64>) {
    let (lo, hi) = k.bounding_box();
    let n = k.dim();
    let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let mut r = rng::stream(seed, 77, 0);
    let mut hits = 0usize;
    let mut sum = vec![0.0; n];
    let mut sq = vec![0.0; n];
    for _ in 0..samples {
        let x: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| r.gen_range(*a..*b)).collect();
        if k.contains(&x, 0.0) {
            hits += 1;
            for i in 0..n {
                sum[i] += x[i];
                sq[i] += x[i] * x[i];
            }
        }
    }
    let f = hits as f64 / samples as f64;
    let vol = f * box_vol;
    let vol_err = 1.96 * (f * (1.0 - f) / samples as f64).sqrt() * box_vol;
    let h = hits as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / h).collect();
    let err: Vec<f64> = (0..n)
        .map(|i| 1.96 * ((sq[i] / h - mean[i] * mean[i]) / h).sqrt())
        .collect();
    (vol, vol_err, mean, err)
}

/// Support value by the dual program over pairs of facet normals:
/// `min b.λ` subject to `Σ λ_i a_i = y`, `λ >= 0` (planar bodies).
fn dual_support(k: &ConvexBody, y: &[f64]) -> f64 {
    let p = k.as_polytope().unwrap();
    let (a, b) = (p.normals(), p.offsets());
    let mut best = f64::INFINITY;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let det = a[i][0] * a[j][1] - a[i][1] * a[j][0];
            if det.abs() < 1e-12 {
                continue;
            }
            let li = (y[0] * a[j][1] - y[1] * a[j][0]) / det;
            let lj = (a[i][0] * y[1] - a[i][1] * y[0]) / det;
            if li >= -1e-12 && lj >= -1e-12 {
                best = best.min(li * b[i] + lj * b[j]);
            }
        }
    }
    best
}

#[test]
fn hull_drops_interior_points() {
    let mut pts = vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0], vec![0.0, 0.0]];
    let sq = hull(&pts).unwrap();
    assert_eq!(sq.as_polytope().unwrap().vertices().len(), 4);
    assert_eq!(triangle().as_polytope().unwrap().vertices().len(), 3);

    let cube = ConvexBody::cube(3, 1.0).unwrap();
    pts = cube.as_polytope().unwrap().vertices().to_vec();
    let mut r = rng::stream(7, 0, 0);
    let interior: Vec<Vec<f64>> = (0..100)
        .map(|_| (0..3).map(|_| r.gen_range(-0.99..0.99)).collect())
        .collect();
    pts.extend(interior.iter().cloned());
    let h = hull(&pts).unwrap();
    assert_eq!(h.as_polytope().unwrap().vertices().len(), 8);
    assert!(interior.iter().all(|x| h.contains(x, 0.0)));
}

#[test]
fn degenerate_hull_is_rejected() {
    assert!(hull(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).is_err());
}

#[test]
fn conversions() {
    let sq = ConvexBody::cube(2, 1.0).unwrap().convert(Rep::Vertices).unwrap();
    let h = sq.convert(Rep::Halfspaces).unwrap();
    let p = h.as_polytope().unwrap();
    assert_eq!(p.normals().len(), 4);
    assert!(p.offsets().iter().all(|b| (b - 1.0).abs() < 1e-12));

    let simplex = ConvexBody::from_halfspaces(
        &[vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]],
        &[0.0, 0.0, 1.0],
    )
    .unwrap();
    let v = simplex.convert(Rep::Vertices).unwrap();
    assert!(v.hausdorff(&triangle()).unwrap() < 1e-12);

    let k = poly(2, 12, 12, false);
    let back = k.convert(Rep::Halfspaces).unwrap().convert(Rep::Vertices).unwrap();
    let (a, b) = (k.as_polytope().unwrap(), back.as_polytope().unwrap());
    assert_eq!(a.vertices().len(), b.vertices().len());
    for x in a.vertices() {
        let d = b
            .vertices()
            .iter()
            .map(|y| x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!(d < 1e-9);
    }
}

#[test]
fn support_values() {
    let sq = ConvexBody::cube(2, 1.0).unwrap();
    assert_eq!(sq.support(&[1.0, 1.0]), 2.0);
    let ball = ConvexBody::ball(vec![0.0; 3], 1.0).unwrap();
    assert!((ball.support(&[3.0, 4.0, 0.0]) - 5.0).abs() < 1e-15);

    let k = poly(2, 9, 3, false).convert(Rep::Halfspaces).unwrap();
    let y = [0.3, -0.7];
    assert!((k.support(&y) - dual_support(&k, &y)).abs() < 1e-10);
}

#[test]
fn gauge_values() {
    let sq = ConvexBody::cube(2, 1.0).unwrap();
    assert_eq!(sq.gauge(&[2.0, 0.0]).unwrap(), 2.0);
    assert_eq!(sq.gauge(&[0.0, 0.0]).unwrap(), 0.0);

    let k = poly(2, 8, 5, false).convert(Rep::Halfspaces).unwrap();
    let mut r = rng::stream(5, 1, 0);
    for _ in 0..10 {
        let x = [r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)];
        let (mut lo, mut hi) = (0.0, 1e3);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if k.contains(&[x[0] / mid, x[1] / mid], 0.0) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((k.gauge(&x).unwrap() - hi).abs() < 1e-9 * (1.0 + hi));
    }
    let shifted = sq.translate(&[3.0, 0.0]);
    assert!(shifted.gauge(&[1.0, 0.0]).is_err());
}

#[test]
fn volumes_and_barycenters() {
    assert_eq!(ConvexBody::cube(3, 1.0).unwrap().volume().unwrap(), 8.0);
    let disk = ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap();
    assert!((disk.volume().unwrap() - std::f64::consts::PI).abs() < 1e-14);
    let b = triangle().barycenter().unwrap();
    assert!((b[0] - 1.0 / 3.0).abs() < 1e-14 && (b[1] - 1.0 / 3.0).abs() < 1e-14);
    let sym = poly(2, 10, 4, true).barycenter().unwrap();
    assert!(sym.iter().all(|x| x.abs() < 1e-12));

    let k = poly(2, 9, 11, false).translate(&[0.2, -0.1]);
    let (v, ve, bar, be) = mc_volume_barycenter(&k, 400_000, 11);
    assert!((k.volume().unwrap() - v).abs() <= 3.0 * ve);
    let kb = k.barycenter().unwrap();
    for i in 0..2 {
        assert!((kb[i] - bar[i]).abs() <= 3.0 * be[i]);
    }
}

#[test]
fn polar_examples() {
    let sq = ConvexBody::cube(2, 1.0).unwrap();
    let cross = sq.polar(&[0.0, 0.0]).unwrap();
    assert!((cross.volume().unwrap() - 2.0).abs() < 1e-12);
    let diamond = hull(&[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]]).unwrap();
    assert!(cross.hausdorff(&diamond).unwrap() < 1e-12);

    let ball = ConvexBody::ball(vec![0.0; 3], 2.0).unwrap();
    assert_eq!(ball.polar(&[0.0; 3]).unwrap(), ConvexBody::ball(vec![0.0; 3], 0.5).unwrap());

    let seg = ConvexBody::cube(1, 1.0).unwrap();
    let p = seg.translate(&[-0.5]).polar(&[0.0]).unwrap();
    assert!((p.volume().unwrap() - 8.0 / 3.0).abs() < 1e-12);
    assert!(p.hausdorff(&hull(&[vec![-2.0 / 3.0], vec![2.0]]).unwrap()).unwrap() < 1e-12);
    assert!(seg.polar(&[1.0]).is_err());
}

#[test]
fn minkowski_examples() {
    let seg = ConvexBody::cube(1, 1.0).unwrap();
    let s = seg.minkowski_sum(&seg).unwrap();
    assert!(s.hausdorff(&ConvexBody::cube(1, 2.0).unwrap()).unwrap() < 1e-12);
    let sq = ConvexBody::cube(2, 1.0).unwrap();
    let d = sq.minkowski_diff(&sq).unwrap();
    assert!(d.hausdorff(&ConvexBody::cube(2, 2.0).unwrap()).unwrap() < 1e-12);

    let (k, l) = (poly(2, 7, 4, false), poly(2, 9, 9, false));
    let kl = k.minkowski_sum(&l).unwrap();
    for i in 0..64 {
        let a = i as f64 * std::f64::consts::TAU / 64.0;
        let u = [a.cos(), a.sin()];
        assert!((kl.support(&u) - k.support(&u) - l.support(&u)).abs() < 1e-12);
    }
}

#[test]
fn intersection_and_union() {
    let sq = ConvexBody::cube(2, 1.0).unwrap();
    assert!(sq.intersect(&sq).unwrap().hausdorff(&sq).unwrap() < 1e-12);
    assert!(sq.conv_union(&sq).unwrap().hausdorff(&sq).unwrap() < 1e-12);

    let c = std::f64::consts::FRAC_1_SQRT_2;
    let rot = sq.linear_map(&[vec![c, -c], vec![c, c]]).unwrap();
    let oct = sq.intersect(&rot).unwrap();
    let p = oct.as_polytope().unwrap();
    assert_eq!(p.vertices().len(), 8);
    let radii: Vec<f64> = p.vertices().iter().map(|v| v[0].hypot(v[1])).collect();
    assert!(radii.iter().all(|r| (r - radii[0]).abs() < 1e-12));

    let h = hull(&[vec![1.0, 0.0], vec![-1.0, 0.0]]);
    assert!(h.is_err());
    let bar = ConvexBody::from_halfspaces(
        &[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
        &[1.0, 1.0, 1e-3, 1e-3],
    )
    .unwrap();
    let tall = ConvexBody::from_halfspaces(
        &[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
        &[1e-3, 1e-3, 1.0, 1.0],
    )
    .unwrap();
    let cross = bar.conv_union(&tall).unwrap();
    assert_eq!(cross.as_polytope().unwrap().vertices().len(), 8);

    let far = sq.translate(&[5.0, 0.0]);
    assert!(sq.intersect(&far).is_err());
}

#[test]
fn reflection_examples() {
    let sq = ConvexBody::cube(2, 1.0).unwrap();
    let e2 = Direction::axis(2, 1);
    assert!(sq.reflect(&e2).hausdorff(&sq).unwrap() < 1e-15);
    let r = triangle().reflect(&e2);
    let want = hull(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
    assert!(r.hausdorff(&want).unwrap() < 1e-15);
    let k = poly(2, 9, 6, false);
    let v = Direction::new(&[0.3, 0.8]).unwrap();
    assert!(k.reflect(&v).reflect(&v).hausdorff(&k).unwrap() < 1e-12);
}

#[test]
fn profile_examples() {
    let sq = ConvexBody::cube(2, 1.0).unwrap();
    let e2 = Direction::axis(2, 1);
    let pr = sq.profiles(&e2).unwrap();
    for x in [-1.0, -0.3, 0.0, 0.7, 1.0] {
        assert!((pr.lower(&[x]) + 1.0).abs() < 1e-12);
        assert!((pr.upper(&[x]) - 1.0).abs() < 1e-12);
    }
    let pr = triangle().profiles(&e2).unwrap();
    for x in [0.0, 0.25, 0.5, 1.0] {
        // the basis of e2^perp is ±e1; map back to the first coordinate
        let t = pr.lift(&[x], 0.0)[0];
        assert!(pr.lower(&[x]).abs() < 1e-12);
        assert!((pr.upper(&[x]) - (1.0 - t)).abs() < 1e-12);
    }

    let k = poly(3, 12, 10, false);
    let v = Direction::new(&[0.2, -0.5, 0.8]).unwrap();
    let pr = k.profiles(&v).unwrap();
    let pts = pr.chord_points(|_, lo, hi| (lo, hi), &[]);
    assert!(hull(&pts).unwrap().hausdorff(&k).unwrap() < 1e-9);
}

#[test]
fn section_examples() {
    let sq = ConvexBody::cube(2, 1.0).unwrap();
    let s = sq.section(&Direction::axis(2, 1), 0.0).unwrap();
    assert!((s.volume().unwrap() - 2.0).abs() < 1e-12);
    let ball = ConvexBody::ball(vec![0.0; 3], 1.0).unwrap();
    let d = ball.section(&Direction::axis(3, 2), 0.6).unwrap();
    assert!((d.volume().unwrap() - std::f64::consts::PI * 0.64).abs() < 1e-12);
    assert!(sq.section(&Direction::axis(2, 1), 1.5).is_err());

    // thin-slab Monte Carlo of the section area
    let k = poly(3, 12, 8, false);
    let v = Direction::axis(3, 2);
    let area = k.section(&v, 0.2).unwrap().volume().unwrap();
    let (lo, hi) = k.bounding_box();
    let w = 0.01;
    let mut r = rng::stream(8, 3, 0);
    let samples = 400_000;
    let mut hits = 0usize;
    for _ in 0..samples {
        let x = [r.gen_range(lo[0]..hi[0]), r.gen_range(lo[1]..hi[1]), r.gen_range(0.2 - w / 2.0..0.2 + w / 2.0)];
        if k.contains(&x, 0.0) {
            hits += 1;
        }
    }
    let base = (hi[0] - lo[0]) * (hi[1] - lo[1]);
    let f = hits as f64 / samples as f64;
    let est = f * base;
    let radius = 1.96 * (f * (1.0 - f) / samples as f64).sqrt() * base;
    assert!((area - est).abs() <= 3.0 * radius + 1e-4, "{area} vs {est} ± {radius}");
}

#[test]
fn steiner_examples() {
    let sq = ConvexBody::cube(2, 1.0).unwrap();
    let e2 = Direction::axis(2, 1);
    assert!(sq.steiner_symmetrize(&e2).unwrap().hausdorff(&sq).unwrap() < 1e-12);
    let s = triangle().steiner_symmetrize(&e2).unwrap();
    assert!((s.volume().unwrap() - 0.5).abs() < 1e-12);
    let want = hull(&[vec![0.0, 0.5], vec![0.0, -0.5], vec![1.0, 0.0]]).unwrap();
    assert!(s.hausdorff(&want).unwrap() < 1e-12);
}

fn seeds() -> impl Strategy<Value = (usize, usize, u64)> {
    (2usize..=3, 0usize..6, any::<u64>()).prop_map(|(n, extra, seed)| (n, n + 3 + extra, seed))
}

fn direction(n: usize, seed: u64) -> Direction {
    Direction::new(&rng::unit_vector(&mut rng::stream(seed, 9, 0), n)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, rng_seed: RngSeed::Fixed(32), ..ProptestConfig::default() })]

    #[test]
    fn bipolar_is_identity((n, m, seed) in seeds()) {
        let k = poly(n, m, seed, false);
        let o = vec![0.0; n];
        let back = k.polar(&o).unwrap().polar(&o).unwrap();
        prop_assert!(back.hausdorff(&k).unwrap() < 1e-9);
    }

    #[test]
    fn gauge_is_support_of_polar((n, m, seed) in seeds(), dir in any::<u64>()) {
        let k = poly(n, m, seed, false);
        let polar = k.polar(&vec![0.0; n]).unwrap();
        let x = rng::unit_vector(&mut rng::stream(dir, 1, 0), n);
        prop_assert!((k.gauge(&x).unwrap() - polar.support(&x)).abs() < 1e-9);
    }

    #[test]
    fn reflection_and_symmetrization_keep_volume((n, m, seed) in seeds(), dir in any::<u64>()) {
        let k = poly(n, m, seed, false);
        let v = direction(n, dir);
        let vol = k.volume().unwrap();
        prop_assert!((k.reflect(&v).volume().unwrap() - vol).abs() <= 1e-9 * vol);
        prop_assert!((k.steiner_symmetrize(&v).unwrap().volume().unwrap() - vol).abs() <= 1e-9 * vol);
    }

    #[test]
    fn sections_integrate_to_volume(m in 4usize..10, seed in any::<u64>(), dir in any::<u64>()) {
        let k = poly(2, m, seed, false);
        let v = direction(2, dir);
        let (lo, hi) = (-k.support(&v.unit().iter().map(|x| -x).collect::<Vec<_>>()), k.support(v.unit()));
        // the section length is piecewise linear in s; Simpson per cell between vertex heights
        let mut heights: Vec<f64> = k.as_polytope().unwrap().vertices().iter()
            .map(|x| x[0] * v.unit()[0] + x[1] * v.unit()[1]).collect();
        heights.sort_by(f64::total_cmp);
        let len = |s: f64| k.section(&v, s).map(|b| b.volume().unwrap()).unwrap_or(0.0);
        let mut total = 0.0;
        for w in heights.windows(2) {
            let (a, b) = (w[0].max(lo), w[1].min(hi));
            if b - a > 1e-12 {
                let e = 1e-9 * (b - a);
                total += (b - a) * 0.5 * (len(a + e) + len(b - e));
            }
        }
        let vol = k.volume().unwrap();
        prop_assert!((total - vol).abs() <= 1e-6 * vol, "{} vs {}", total, vol);
    }

    #[test]
    fn conv_union_is_polar_of_intersection(s1 in any::<u64>(), s2 in any::<u64>()) {
        let k = poly(2, 7, s1, false);
        let l = poly(2, 8, s2, false);
        let o = [0.0, 0.0];
        let lhs = k.polar(&o).unwrap().intersect(&l.polar(&o).unwrap()).unwrap().polar(&o).unwrap();
        prop_assert!(lhs.hausdorff(&k.conv_union(&l).unwrap()).unwrap() < 1e-9);
    }
}
