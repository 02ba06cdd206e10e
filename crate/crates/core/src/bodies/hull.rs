//! Convex hulls and halfspace intersections in dimensions 1 to 3.
//!
//! Both directions produce a [`Polytope`] carrying vertices and irredundant
//! facets. Halfspace intersections are computed by clipping a large box and
//! re-hulling the resulting vertex set, so redundant inequalities disappear.

use super::linalg::{
    axpy, centroid, check_dims, check_finite, coords_in, cross3, dist, dot, max_abs, norm,
    normalize, orthonormal_complement, solve, sub,
};
use super::polytope::Polytope;
use crate::error::{Error, Result};

/// Relative tolerance for extreme-point and redundancy decisions.
pub const GEOM_EPS: f64 = 1e-9;

fn tolerance(points: &[Vec<f64>]) -> f64 {
    GEOM_EPS * max_abs(points).max(1e-12)
}

/// Convex hull of a finite point set, keeping only extreme points.
pub fn hull(points: &[Vec<f64>]) -> Result<Polytope> {
    let n = points
        .first()
        .map(|p| p.len())
        .ok_or_else(|| Error::DegenerateInput("empty point set".into()))?;
    check_dims(points, n)?;
    check_finite(points)?;
    if points.len() < n + 1 {
        return Err(Error::DegenerateInput(format!(
            "{} points cannot span dimension {n}",
            points.len()
        )));
    }
    match n {
        1 => hull1(points),
        2 => hull2(points),
        3 => hull3(points),
        _ => Err(Error::UnsupportedDimension(n)),
    }
}

fn hull1(points: &[Vec<f64>]) -> Result<Polytope> {
    let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= tolerance(points) {
        return Err(Error::DegenerateInput("points are not full-dimensional".into()));
    }
    Ok(Polytope::from_parts(
        1,
        vec![vec![lo], vec![hi]],
        vec![vec![-1.0], vec![1.0]],
        vec![-lo, hi],
        vec![vec![0], vec![1]],
    ))
}

fn cross2(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn hull2(points: &[Vec<f64>]) -> Result<Polytope> {
    let eps = tolerance(points);
    let mut pts: Vec<&Vec<f64>> = points.iter().collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| dist(a, b) <= eps);
    if pts.len() < 3 {
        return Err(Error::DegenerateInput("points are not full-dimensional".into()));
    }
    // a point is kept only if it lies strictly left of the chord by more than eps
    let keep = |chain: &Vec<&Vec<f64>>, p: &Vec<f64>| -> bool {
        let k = chain.len();
        let (o, a) = (chain[k - 2], chain[k - 1]);
        let base = dist(o, p).max(f64::MIN_POSITIVE);
        cross2(o, a, p) / base > eps
    };
    let mut lower: Vec<&Vec<f64>> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && !keep(&lower, p) {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<&Vec<f64>> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && !keep(&upper, p) {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(Error::DegenerateInput("points are not full-dimensional".into()));
    }
    let vertices: Vec<Vec<f64>> = lower.into_iter().cloned().collect();
    polygon_from_ccw(vertices, eps)
}

/// Builds a polygon from counter-clockwise extreme vertices.
pub(crate) fn polygon_from_ccw(vertices: Vec<Vec<f64>>, eps: f64) -> Result<Polytope> {
    let m = vertices.len();
    let mut normals = Vec::with_capacity(m);
    let mut offsets = Vec::with_capacity(m);
    let mut facets = Vec::with_capacity(m);
    let mut area2 = 0.0;
    for i in 0..m {
        let j = (i + 1) % m;
        let (a, b) = (&vertices[i], &vertices[j]);
        area2 += a[0] * b[1] - a[1] * b[0];
        let nrm = normalize(&[b[1] - a[1], a[0] - b[0]])
            .ok_or_else(|| Error::DegenerateInput("repeated vertex".into()))?;
        offsets.push(dot(&nrm, a));
        normals.push(nrm);
        facets.push(vec![i, j]);
    }
    if area2 <= eps * eps {
        return Err(Error::DegenerateInput("points are not full-dimensional".into()));
    }
    Ok(Polytope::from_parts(2, vertices, normals, offsets, facets))
}

#[derive(Clone)]
struct Face {
    v: [usize; 3],
    n: [f64; 3],
    d: f64,
}

fn make_face(pts: &[Vec<f64>], a: usize, b: usize, c: usize, inside: &[f64]) -> Face {
    let n = cross3(&sub(&pts[b], &pts[a]), &sub(&pts[c], &pts[a]));
    let len = norm(&n).max(f64::MIN_POSITIVE);
    let mut nn = [n[0] / len, n[1] / len, n[2] / len];
    let mut v = [a, b, c];
    let mut d = dot(&nn, &pts[a]);
    if dot(&nn, inside) > d {
        nn = [-nn[0], -nn[1], -nn[2]];
        d = -d;
        v = [a, c, b];
    }
    Face { v, n: nn, d }
}

fn hull3(points: &[Vec<f64>]) -> Result<Polytope> {
    let eps = tolerance(points);
    let degenerate = || Error::DegenerateInput("points are not full-dimensional".into());
    let i0 = (0..points.len())
        .min_by(|&a, &b| points[a][0].total_cmp(&points[b][0]))
        .unwrap();
    let i1 = (0..points.len())
        .max_by(|&a, &b| dist(&points[a], &points[i0]).total_cmp(&dist(&points[b], &points[i0])))
        .unwrap();
    let axis = sub(&points[i1], &points[i0]);
    if norm(&axis) <= eps {
        return Err(degenerate());
    }
    let line_dist = |p: &Vec<f64>| norm(&cross3(&sub(p, &points[i0]), &axis)) / norm(&axis);
    let i2 = (0..points.len())
        .max_by(|&a, &b| line_dist(&points[a]).total_cmp(&line_dist(&points[b])))
        .unwrap();
    if line_dist(&points[i2]) <= eps {
        return Err(degenerate());
    }
    let pn = normalize(&cross3(&axis, &sub(&points[i2], &points[i0]))).unwrap();
    let plane_dist = |p: &Vec<f64>| dot(&pn, &sub(p, &points[i0])).abs();
    let i3 = (0..points.len())
        .max_by(|&a, &b| plane_dist(&points[a]).total_cmp(&plane_dist(&points[b])))
        .unwrap();
    if plane_dist(&points[i3]) <= eps {
        return Err(degenerate());
    }
    let inside = centroid(&[
        points[i0].clone(),
        points[i1].clone(),
        points[i2].clone(),
        points[i3].clone(),
    ]);
    let mut faces = vec![
        make_face(points, i0, i1, i2, &inside),
        make_face(points, i0, i1, i3, &inside),
        make_face(points, i0, i2, i3, &inside),
        make_face(points, i1, i2, i3, &inside),
    ];
    let initial = [i0, i1, i2, i3];
    for (i, p) in points.iter().enumerate() {
        if initial.contains(&i) {
            continue;
        }
        let visible: Vec<bool> = faces.iter().map(|f| dot(&f.n, p) - f.d > eps).collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut edges = std::collections::HashSet::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, &v)| v) {
            for k in 0..3 {
                edges.insert((f.v[k], f.v[(k + 1) % 3]));
            }
        }
        let mut horizon: Vec<(usize, usize)> = edges
            .iter()
            .filter(|(a, b)| !edges.contains(&(*b, *a)))
            .copied()
            .collect();
        horizon.sort_unstable();
        let mut kept: Vec<Face> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, &v)| !v)
            .map(|(f, _)| f.clone())
            .collect();
        for (a, b) in horizon {
            kept.push(make_face(points, a, b, i, &inside));
        }
        faces = kept;
    }
    finish_hull3(points, &faces, eps)
}

/// Merges coplanar triangles into facets and drops non-extreme vertices.
fn finish_hull3(points: &[Vec<f64>], faces: &[Face], eps: f64) -> Result<Polytope> {
    let area = |f: &Face| {
        norm(&cross3(
            &sub(&points[f.v[1]], &points[f.v[0]]),
            &sub(&points[f.v[2]], &points[f.v[0]]),
        ))
    };
    let mut order: Vec<usize> = (0..faces.len()).collect();
    order.sort_by(|&a, &b| area(&faces[b]).total_cmp(&area(&faces[a])));
    let mut planes: Vec<([f64; 3], f64)> = Vec::new();
    for &fi in &order {
        let f = &faces[fi];
        let found = planes.iter().any(|(n, d)| {
            dot(n, &f.n) > 0.9 && f.v.iter().all(|&v| (dot(n, &points[v]) - d).abs() <= eps)
        });
        if !found {
            planes.push((f.n, f.d));
        }
    }
    let mut candidates: Vec<usize> = faces.iter().flat_map(|f| f.v).collect();
    candidates.sort_unstable();
    candidates.dedup();
    let mut extreme = Vec::new();
    for &c in &candidates {
        let on: Vec<&[f64; 3]> = planes
            .iter()
            .filter(|(n, d)| (dot(n, &points[c]) - d).abs() <= eps)
            .map(|(n, _)| n)
            .collect();
        let mut full_rank = false;
        'outer: for a in 0..on.len() {
            for b in a + 1..on.len() {
                let ab = cross3(on[a], on[b]);
                for cc in on.iter().skip(b + 1) {
                    if dot(&ab, *cc).abs() > 1e-9 {
                        full_rank = true;
                        break 'outer;
                    }
                }
            }
        }
        if full_rank {
            extreme.push(points[c].clone());
        }
    }
    if extreme.len() < 4 {
        return Err(Error::DegenerateInput("points are not full-dimensional".into()));
    }
    let mut normals = Vec::new();
    let mut offsets = Vec::new();
    let mut facets = Vec::new();
    for (n, d) in &planes {
        let on: Vec<usize> = (0..extreme.len())
            .filter(|&i| (dot(n, &extreme[i]) - d).abs() <= eps)
            .collect();
        if on.len() < 3 {
            continue;
        }
        facets.push(order_on_plane(&extreme, &on, n));
        normals.push(n.to_vec());
        offsets.push(*d);
    }
    Ok(Polytope::from_parts(3, extreme, normals, offsets, facets))
}

/// Orders coplanar vertex indices counter-clockwise seen from the normal side.
pub(crate) fn order_on_plane(points: &[Vec<f64>], idx: &[usize], normal: &[f64]) -> Vec<usize> {
    let sel: Vec<Vec<f64>> = idx.iter().map(|&i| points[i].clone()).collect();
    let c = centroid(&sel);
    let basis = orthonormal_complement(normal);
    // right-handed (b0, b1, normal)
    let flip = dot(&cross3(&basis[0], &basis[1]), normal) < 0.0;
    let mut with_angle: Vec<(f64, usize)> = idx
        .iter()
        .map(|&i| {
            let q = coords_in(&basis, &sub(&points[i], &c));
            let ang = if flip { (-q[1]).atan2(q[0]) } else { q[1].atan2(q[0]) };
            (ang, i)
        })
        .collect();
    with_angle.sort_by(|a, b| a.0.total_cmp(&b.0));
    with_angle.into_iter().map(|(_, i)| i).collect()
}

/// Intersection of halfspaces `<a_i, x> <= b_i`.
pub fn intersect_halfspaces(normals: &[Vec<f64>], offsets: &[f64]) -> Result<Polytope> {
    if normals.len() != offsets.len() {
        return Err(Error::InvalidParameter(
            "normals and offsets differ in length".into(),
        ));
    }
    let n = normals
        .first()
        .map(|a| a.len())
        .ok_or_else(|| Error::DegenerateInput("no halfspaces".into()))?;
    check_dims(normals, n)?;
    check_finite(normals)?;
    if offsets.iter().any(|b| !b.is_finite()) {
        return Err(Error::DegenerateInput("non-finite offset".into()));
    }
    let bscale = offsets.iter().fold(1.0f64, |m, b| m.max(b.abs()));
    let mut hs: Vec<(Vec<f64>, f64)> = Vec::with_capacity(normals.len());
    for (a, &b) in normals.iter().zip(offsets) {
        let len = norm(a);
        if len <= 1e-300 {
            if b < -GEOM_EPS * bscale {
                return Err(Error::EmptyInterior);
            }
            continue;
        }
        hs.push((a.iter().map(|x| x / len).collect(), b / len));
    }
    let to_empty = |e: Error| match e {
        Error::DegenerateInput(_) => Error::EmptyInterior,
        other => other,
    };
    match n {
        1 => {
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for (a, b) in &hs {
                if a[0] > 0.0 {
                    hi = hi.min(b / a[0]);
                } else {
                    lo = lo.max(b / a[0]);
                }
            }
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::DegenerateInput("unbounded intersection".into()));
            }
            hull1(&[vec![lo], vec![hi]]).map_err(to_empty)
        }
        2 | 3 => {
            let big = 1e6 * (1.0 + hs.iter().fold(0.0f64, |m, (_, b)| m.max(b.abs())));
            let verts = if n == 2 {
                clip_polygon(big, &hs)
            } else {
                clip_polyhedron(big, &hs)
            };
            if verts.iter().flatten().any(|x| x.abs() >= 0.5 * big) {
                return Err(Error::DegenerateInput("unbounded intersection".into()));
            }
            if verts.len() < n + 1 {
                return Err(Error::EmptyInterior);
            }
            let ext = max_abs(&verts).max(1e-300);
            let verts: Vec<Vec<f64>> = verts.iter().map(|x| refine_vertex(x, &hs, ext)).collect();
            hull(&verts).map_err(to_empty)
        }
        _ => enumerate_vertices(n, &hs),
    }
}

/// Re-solves a clipped vertex from its `n` most nearly active, linearly
/// independent constraints; clipping a large box loses relative precision.
fn refine_vertex(x: &[f64], hs: &[(Vec<f64>, f64)], ext: f64) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<(f64, usize)> = hs
        .iter()
        .enumerate()
        .map(|(i, (a, b))| ((dot(a, x) - b).abs(), i))
        .collect();
    order.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(n);
    for &(res, i) in &order {
        if res > 1e-6 * ext.max(1.0) || chosen.len() == n {
            break;
        }
        let mut w = hs[i].0.clone();
        for q in &ortho {
            let c = dot(&w, q);
            w = axpy(&w, -c, q);
        }
        if let Some(u) = normalize(&w) {
            if norm(&w) > 1e-6 {
                ortho.push(u);
                chosen.push(i);
            }
        }
    }
    if chosen.len() < n {
        return x.to_vec();
    }
    let a: Vec<Vec<f64>> = chosen.iter().map(|&i| hs[i].0.clone()).collect();
    let b: Vec<f64> = chosen.iter().map(|&i| hs[i].1).collect();
    match solve(&a, &b) {
        Some(y) if dist(&y, x) <= 1e-6 * ext.max(1.0) => y,
        _ => x.to_vec(),
    }
}

fn clip_polygon(big: f64, hs: &[(Vec<f64>, f64)]) -> Vec<Vec<f64>> {
    let mut poly = vec![
        vec![-big, -big],
        vec![big, -big],
        vec![big, big],
        vec![-big, big],
    ];
    for (a, b) in hs {
        poly = clip_loop(&poly, a, *b).0;
        if poly.is_empty() {
            break;
        }
    }
    poly
}

/// Sutherland–Hodgman clip of a closed loop; also returns points on the cut.
fn clip_loop(poly: &[Vec<f64>], a: &[f64], b: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut out = Vec::new();
    let mut cut = Vec::new();
    let m = poly.len();
    for i in 0..m {
        let p = &poly[i];
        let q = &poly[(i + 1) % m];
        let dp = dot(a, p) - b;
        let dq = dot(a, q) - b;
        if dp <= 0.0 {
            out.push(p.clone());
            if dp == 0.0 {
                cut.push(p.clone());
            }
        }
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            let t = dp / (dp - dq);
            let x = axpy(p, t, &sub(q, p));
            cut.push(x.clone());
            out.push(x);
        }
    }
    (out, cut)
}

fn clip_polyhedron(big: f64, hs: &[(Vec<f64>, f64)]) -> Vec<Vec<f64>> {
    let c = |x: f64, y: f64, z: f64| vec![x * big, y * big, z * big];
    let mut faces: Vec<Vec<Vec<f64>>> = vec![
        vec![c(-1., -1., -1.), c(-1., 1., -1.), c(1., 1., -1.), c(1., -1., -1.)],
        vec![c(-1., -1., 1.), c(1., -1., 1.), c(1., 1., 1.), c(-1., 1., 1.)],
        vec![c(-1., -1., -1.), c(1., -1., -1.), c(1., -1., 1.), c(-1., -1., 1.)],
        vec![c(-1., 1., -1.), c(-1., 1., 1.), c(1., 1., 1.), c(1., 1., -1.)],
        vec![c(-1., -1., -1.), c(-1., -1., 1.), c(-1., 1., 1.), c(-1., 1., -1.)],
        vec![c(1., -1., -1.), c(1., 1., -1.), c(1., 1., 1.), c(1., -1., 1.)],
    ];
    for (a, b) in hs {
        let mut next = Vec::with_capacity(faces.len() + 1);
        let mut cap: Vec<Vec<f64>> = Vec::new();
        for f in &faces {
            let (clipped, cut) = clip_loop(f, a, *b);
            cap.extend(cut);
            if clipped.len() >= 3 {
                next.push(clipped);
            }
        }
        if next.is_empty() {
            return Vec::new();
        }
        let scale = 1e-12 * big;
        let mut uniq: Vec<Vec<f64>> = Vec::new();
        for p in cap {
            if uniq.iter().all(|q| dist(q, &p) > scale) {
                uniq.push(p);
            }
        }
        if uniq.len() >= 3 {
            let idx: Vec<usize> = (0..uniq.len()).collect();
            let ord = order_on_plane(&uniq, &idx, a);
            next.push(ord.into_iter().map(|i| uniq[i].clone()).collect());
        }
        faces = next;
    }
    let mut verts: Vec<Vec<f64>> = Vec::new();
    for f in faces {
        verts.extend(f);
    }
    verts
}

/// Brute-force vertex enumeration for dimensions above three.
fn enumerate_vertices(n: usize, hs: &[(Vec<f64>, f64)]) -> Result<Polytope> {
    let m = hs.len();
    if m < n + 1 {
        return Err(Error::DegenerateInput("unbounded intersection".into()));
    }
    if m > 40 {
        return Err(Error::InvalidParameter(format!(
            "{m} halfspaces is too many for brute-force enumeration in dimension {n}"
        )));
    }
    let bscale = hs.iter().fold(1.0f64, |acc, (_, b)| acc.max(b.abs()));
    let eps = GEOM_EPS * bscale;
    let mut verts: Vec<Vec<f64>> = Vec::new();
    let mut combo: Vec<usize> = (0..n).collect();
    loop {
        let a: Vec<Vec<f64>> = combo.iter().map(|&i| hs[i].0.clone()).collect();
        let b: Vec<f64> = combo.iter().map(|&i| hs[i].1).collect();
        if let Some(x) = solve(&a, &b) {
            if hs.iter().all(|(ai, bi)| dot(ai, &x) <= bi + eps)
                && verts.iter().all(|v| dist(v, &x) > eps)
            {
                verts.push(x);
            }
        }
        // next combination
        let mut k = n;
        loop {
            if k == 0 {
                return Polytope::from_vertices_and_halfspaces(n, verts, hs);
            }
            k -= 1;
            if combo[k] < m - n + k {
                combo[k] += 1;
                for j in k + 1..n {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}
