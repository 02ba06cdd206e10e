//! Convex polytopes stored with both vertex and facet descriptions.

use super::hull::{hull, GEOM_EPS};
use super::linalg::{add, axpy, cross3, det, dist, dot, max_abs, neg, scale, sub};
use crate::error::{Error, Result};

/// A full-dimensional convex polytope.
///
/// Facets carry outward unit normals `a_i` and offsets `b_i` with
/// `P = {x : <a_i, x> <= b_i}`. For `n <= 3` each facet also lists its vertex
/// indices, in counter-clockwise order seen from outside when `n = 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    normals: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    facets: Vec<Vec<usize>>,
}

impl Polytope {
    pub(crate) fn from_parts(
        dim: usize,
        vertices: Vec<Vec<f64>>,
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        facets: Vec<Vec<usize>>,
    ) -> Self {
        Polytope {
            dim,
            vertices,
            normals,
            offsets,
            facets,
        }
    }

    /// Builds a polytope from already-known extreme vertices and irredundant
    /// unit-normal halfspaces, deriving facet incidences.
    pub(crate) fn from_vertices_and_halfspaces(
        dim: usize,
        vertices: Vec<Vec<f64>>,
        hs: &[(Vec<f64>, f64)],
    ) -> Result<Self> {
        if vertices.len() < dim + 1 {
            return Err(Error::EmptyInterior);
        }
        let eps = GEOM_EPS * max_abs(&vertices).max(1.0);
        let mut normals = Vec::new();
        let mut offsets = Vec::new();
        let mut facets = Vec::new();
        for (a, b) in hs {
            let on: Vec<usize> = (0..vertices.len())
                .filter(|&i| (dot(a, &vertices[i]) - b).abs() <= eps)
                .collect();
            if on.len() >= dim && !normals.iter().any(|m: &Vec<f64>| dist(m, a) <= 1e-12) {
                normals.push(a.clone());
                offsets.push(*b);
                facets.push(on);
            }
        }
        Ok(Polytope {
            dim,
            vertices,
            normals,
            offsets,
            facets,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn normals(&self) -> &[Vec<f64>] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn facets(&self) -> &[Vec<usize>] {
        &self.facets
    }

    /// Largest absolute coordinate over the vertices.
    pub fn extent(&self) -> f64 {
        max_abs(&self.vertices)
    }

    pub fn support(&self, y: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| dot(v, y))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Vertex attaining the support value in direction `y` (first one on ties).
    pub fn support_point(&self, y: &[f64]) -> &[f64] {
        let mut best = 0;
        let mut val = f64::NEG_INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let d = dot(v, y);
            if d > val {
                val = d;
                best = i;
            }
        }
        &self.vertices[best]
    }

    /// Smallest facet offset: the distance from the origin to the boundary
    /// when the origin is inside, negative when it is outside.
    pub fn origin_depth(&self) -> f64 {
        self.offsets.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn origin_interior(&self) -> bool {
        self.origin_depth() > GEOM_EPS * self.extent().max(1e-12)
    }

    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        if !self.origin_interior() {
            return Err(Error::OriginNotInterior);
        }
        Ok(self
            .normals
            .iter()
            .zip(&self.offsets)
            .map(|(a, b)| dot(a, x) / b)
            .fold(0.0, f64::max))
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.normals
            .iter()
            .zip(&self.offsets)
            .all(|(a, b)| dot(a, x) <= b + tol)
    }

    /// Fan triangulation of the boundary: `(n-1)`-simplices covering every facet.
    pub fn boundary_simplices(&self) -> Vec<Vec<Vec<f64>>> {
        let mut out = Vec::new();
        for f in &self.facets {
            match self.dim {
                1 => out.push(vec![self.vertices[f[0]].clone()]),
                2 => out.push(vec![
                    self.vertices[f[0]].clone(),
                    self.vertices[f[1]].clone(),
                ]),
                3 => {
                    for k in 1..f.len() - 1 {
                        out.push(vec![
                            self.vertices[f[0]].clone(),
                            self.vertices[f[k]].clone(),
                            self.vertices[f[k + 1]].clone(),
                        ]);
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Triangulation into full-dimensional simplices by coning the boundary
    /// from `apex`, which must lie in the polytope.
    pub fn cone_simplices(&self, apex: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
        if self.dim > 3 {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        let tiny = GEOM_EPS * self.extent().max(1e-12);
        let mut out = Vec::new();
        for (k, s) in self.boundary_simplices().into_iter().enumerate() {
            // skip facets containing the apex: their cones are flat
            let fi = self.facet_of_boundary_simplex(k);
            if self.offsets[fi] - dot(&self.normals[fi], apex) <= tiny {
                continue;
            }
            let mut simplex = vec![apex.to_vec()];
            simplex.extend(s);
            out.push(simplex);
        }
        Ok(out)
    }

    fn facet_of_boundary_simplex(&self, k: usize) -> usize {
        if self.dim < 3 {
            return k;
        }
        let mut acc = 0;
        for (fi, f) in self.facets.iter().enumerate() {
            acc += f.len() - 2;
            if k < acc {
                return fi;
            }
        }
        unreachable!("boundary simplex index out of range")
    }

    fn interior_point(&self) -> Vec<f64> {
        super::linalg::centroid(&self.vertices)
    }

    pub fn volume(&self) -> Result<f64> {
        let c = self.interior_point();
        Ok(self
            .cone_simplices(&c)?
            .iter()
            .map(|s| simplex_volume(s))
            .sum())
    }

    pub fn barycenter(&self) -> Result<Vec<f64>> {
        let c = self.interior_point();
        let mut total = 0.0;
        let mut acc = vec![0.0; self.dim];
        for s in self.cone_simplices(&c)? {
            let vol = simplex_volume(&s);
            let cen = super::linalg::centroid(&s);
            acc = axpy(&acc, vol, &cen);
            total += vol;
        }
        Ok(scale(&acc, 1.0 / total))
    }

    /// Euclidean distance from `x` to the polytope (zero inside).
    pub fn distance(&self, x: &[f64]) -> f64 {
        if self.contains(x, 0.0) {
            return 0.0;
        }
        match self.dim {
            1 => {
                let lo = self.vertices[0][0].min(self.vertices[1][0]);
                let hi = self.vertices[0][0].max(self.vertices[1][0]);
                (lo - x[0]).max(x[0] - hi).max(0.0)
            }
            2 => self
                .boundary_simplices()
                .iter()
                .map(|s| point_segment(x, &s[0], &s[1]))
                .fold(f64::INFINITY, f64::min),
            3 => self
                .boundary_simplices()
                .iter()
                .map(|s| point_triangle(x, &s[0], &s[1], &s[2]))
                .fold(f64::INFINITY, f64::min),
            _ => self
                .normals
                .iter()
                .zip(&self.offsets)
                .map(|(a, b)| dot(a, x) - b)
                .fold(0.0, f64::max),
        }
    }

    pub fn translate(&self, z: &[f64]) -> Polytope {
        Polytope {
            dim: self.dim,
            vertices: self.vertices.iter().map(|v| add(v, z)).collect(),
            normals: self.normals.clone(),
            offsets: self
                .normals
                .iter()
                .zip(&self.offsets)
                .map(|(a, b)| b + dot(a, z))
                .collect(),
            facets: self.facets.clone(),
        }
    }

    /// Image under an orthogonal involution `x -> R x` (reflections, `-I`).
    pub fn map_orthogonal_involution(&self, r: impl Fn(&[f64]) -> Vec<f64>) -> Polytope {
        let mut facets = self.facets.clone();
        // an odd orientation flip reverses facet vertex order in 3-D
        if self.dim == 3 {
            let m = [r(&[1.0, 0.0, 0.0]), r(&[0.0, 1.0, 0.0]), r(&[0.0, 0.0, 1.0])];
            if det(&m) < 0.0 {
                for f in &mut facets {
                    f.reverse();
                }
            }
        }
        Polytope {
            dim: self.dim,
            vertices: self.vertices.iter().map(|v| r(v)).collect(),
            normals: self.normals.iter().map(|a| r(a)).collect(),
            offsets: self.offsets.clone(),
            facets,
        }
    }

    pub fn negate(&self) -> Polytope {
        self.map_orthogonal_involution(neg)
    }

    /// Image under an arbitrary affine map, recomputing the hull.
    pub fn map_points(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Polytope> {
        let pts: Vec<Vec<f64>> = self.vertices.iter().map(|v| f(v)).collect();
        hull(&pts)
    }

    /// Polar body with respect to the origin, which must be interior.
    pub fn polar(&self) -> Result<Polytope> {
        if !self.origin_interior() {
            return Err(Error::CenterNotInterior);
        }
        let pts: Vec<Vec<f64>> = self
            .normals
            .iter()
            .zip(&self.offsets)
            .map(|(a, b)| scale(a, 1.0 / b))
            .collect();
        if self.dim > 3 {
            let hs: Vec<(Vec<f64>, f64)> = self
                .vertices
                .iter()
                .filter_map(|v| {
                    super::linalg::normalize(v).map(|u| {
                        let len = super::linalg::norm(v);
                        (u, 1.0 / len)
                    })
                })
                .collect();
            return Polytope::from_vertices_and_halfspaces(self.dim, pts, &hs);
        }
        hull(&pts)
    }
}

/// Unsigned volume of a simplex given by `n + 1` vertices in `R^n`.
pub fn simplex_volume(s: &[Vec<f64>]) -> f64 {
    let n = s.len() - 1;
    let rows: Vec<Vec<f64>> = s[1..].iter().map(|v| sub(v, &s[0])).collect();
    det(&rows).abs() / factorial(n)
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn point_segment(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(&ab, &ab);
    let t = if len2 > 0.0 {
        (dot(&sub(x, a), &ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist(x, &axpy(a, t, &ab))
}

/// Distance from `x` to triangle `abc` in three dimensions.
pub fn point_triangle(x: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let ab = sub(b, a);
    let ac = sub(c, a);
    let n = cross3(&ab, &ac);
    let n2 = dot(&n, &n);
    if n2 > 0.0 {
        let ap = sub(x, a);
        // barycentric coordinates of the projection
        let v = dot(&cross3(&ap, &ac), &n) / n2;
        let w = dot(&cross3(&ab, &ap), &n) / n2;
        if v >= 0.0 && w >= 0.0 && v + w <= 1.0 {
            return (dot(&ap, &n) / n2.sqrt()).abs();
        }
    }
    point_segment(x, a, b)
        .min(point_segment(x, b, c))
        .min(point_segment(x, a, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Polytope {
        hull(&[
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
            vec![1.0, 1.0],
            vec![-1.0, 1.0],
            vec![0.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn square_basics() {
        let q = square();
        assert_eq!(q.vertices().len(), 4);
        assert_eq!(q.normals().len(), 4);
        assert!((q.volume().unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(q.support(&[1.0, 1.0]), 2.0);
        assert!((q.gauge(&[2.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
        let p = q.polar().unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert!((p.volume().unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn triangle_barycenter() {
        let t = hull(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let b = t.barycenter().unwrap();
        assert!((b[0] - 1.0 / 3.0).abs() < 1e-15 && (b[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_distance_cases() {
        let (a, b, c) = ([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert!((point_triangle(&[0.2, 0.2, 3.0], &a, &b, &c) - 3.0).abs() < 1e-15);
        assert!((point_triangle(&[2.0, 0.0, 0.0], &a, &b, &c) - 1.0).abs() < 1e-15);
    }
}
