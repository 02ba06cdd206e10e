//! Convex bodies and the classical operations on them.

pub mod hull;
pub mod linalg;
mod polytope;

pub use hull::{hull as hull_points, intersect_halfspaces, GEOM_EPS};
pub use polytope::{point_segment, point_triangle, simplex_volume, Polytope};

use crate::error::{Error, Result};
use crate::quadrature::ball_volume;
use crate::rng;
use linalg::{
    add, axpy, check_finite, coords_in, dist, dot, embed, max_abs, norm, normalize,
    orthonormal_complement, scale, sub,
};

/// A unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes `v`; fails on zero or non-finite input.
    pub fn new(v: &[f64]) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite direction".into()));
        }
        normalize(v)
            .map(Direction)
            .ok_or_else(|| Error::InvalidParameter("zero direction".into()))
    }

    /// The `i`-th standard basis vector of `R^n`.
    pub fn axis(n: usize, i: usize) -> Self {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        Direction(e)
    }

    pub fn unit(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Reflection `x - 2<x,v>v` in the hyperplane orthogonal to this direction.
    pub fn reflect_point(&self, x: &[f64]) -> Vec<f64> {
        axpy(x, -2.0 * dot(x, &self.0), &self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Representation tag used by [`ConvexBody::convert`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rep {
    Vertices,
    Halfspaces,
}

/// A convex body: a polytope tagged with its primary description, or a ball.
///
/// Polytopes always carry both descriptions; the tag records which one the
/// body was specified by and which one is serialized.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    VPoly(Polytope),
    HPoly(Polytope),
    Ball(Ball),
}

/// Convex hull of points as a vertex polytope.
pub fn hull(points: &[Vec<f64>]) -> Result<ConvexBody> {
    hull::hull(points).map(ConvexBody::VPoly)
}

impl ConvexBody {
    pub fn from_halfspaces(normals: &[Vec<f64>], offsets: &[f64]) -> Result<Self> {
        intersect_halfspaces(normals, offsets).map(ConvexBody::HPoly)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_finite(std::slice::from_ref(&center))?;
        if center.is_empty() || !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::DegenerateInput("ball needs a positive radius".into()));
        }
        Ok(ConvexBody::Ball(Ball { center, radius }))
    }

    /// The cube `[-half, half]^n`.
    pub fn cube(n: usize, half: f64) -> Result<Self> {
        if n == 0 || !(half > 0.0) || !half.is_finite() {
            return Err(Error::DegenerateInput("cube needs n >= 1 and half > 0".into()));
        }
        if n > 4 {
            return Err(Error::UnsupportedDimension(n));
        }
        let vertices: Vec<Vec<f64>> = (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|i| if mask >> i & 1 == 1 { half } else { -half })
                    .collect()
            })
            .collect();
        let mut hs = Vec::new();
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut a = vec![0.0; n];
                a[i] = sign;
                hs.push((a, half));
            }
        }
        if n <= 3 {
            let (normals, offsets): (Vec<_>, Vec<_>) = hs.into_iter().unzip();
            return Self::from_halfspaces(&normals, &offsets);
        }
        Polytope::from_vertices_and_halfspaces(n, vertices, &hs).map(ConvexBody::HPoly)
    }

    /// The standard simplex `conv{0, e_1, ..., e_n}`.
    pub fn simplex(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::DegenerateInput("simplex needs n >= 1".into()));
        }
        if n > 4 {
            return Err(Error::UnsupportedDimension(n));
        }
        let mut vertices = vec![vec![0.0; n]];
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            vertices.push(e);
        }
        if n <= 3 {
            return hull(&vertices);
        }
        let mut hs: Vec<(Vec<f64>, f64)> = (0..n)
            .map(|i| {
                let mut a = vec![0.0; n];
                a[i] = -1.0;
                (a, 0.0)
            })
            .collect();
        let s = 1.0 / (n as f64).sqrt();
        hs.push((vec![s; n], s));
        Polytope::from_vertices_and_halfspaces(n, vertices, &hs).map(ConvexBody::VPoly)
    }

    /// Random polytope: hull of `m` random points on an ellipsoid, translated
    /// so its barycenter is the origin. With `symmetric`, points come in
    /// antipodal pairs.
    pub fn random_poly(n: usize, m: usize, seed: u64, symmetric: bool) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        if m < n + 1 {
            return Err(Error::DegenerateInput(format!(
                "random polytope in dimension {n} needs at least {} vertices",
                n + 1
            )));
        }
        if m > 100_000 {
            return Err(Error::InvalidParameter("too many vertices".into()));
        }
        for attempt in 0..16u32 {
            let mut r = rng::stream(seed, 0x5eed, attempt);
            let map = random_linear_map(&mut r, n);
            let count = if symmetric { m.div_ceil(2) } else { m };
            let mut pts = Vec::with_capacity(2 * count);
            for _ in 0..count {
                let u = rng::unit_vector(&mut r, n);
                let x: Vec<f64> = map.iter().map(|row| dot(row, &u)).collect();
                if symmetric {
                    pts.push(scale(&x, -1.0));
                }
                pts.push(x);
            }
            if let Ok(p) = hull::hull(&pts) {
                let b = p.barycenter()?;
                let centered = if symmetric {
                    p
                } else {
                    p.translate(&scale(&b, -1.0))
                };
                return Ok(ConvexBody::VPoly(centered));
            }
        }
        Err(Error::DegenerateInput(
            "could not draw a full-dimensional polytope".into(),
        ))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::VPoly(p) | ConvexBody::HPoly(p) => p.dim(),
            ConvexBody::Ball(b) => b.center.len(),
        }
    }

    pub fn as_polytope(&self) -> Option<&Polytope> {
        match self {
            ConvexBody::VPoly(p) | ConvexBody::HPoly(p) => Some(p),
            ConvexBody::Ball(_) => None,
        }
    }

    fn polytope(&self, op: &'static str) -> Result<&Polytope> {
        self.as_polytope().ok_or(Error::BallUnsupported(op))
    }

    pub fn is_ball(&self) -> bool {
        matches!(self, ConvexBody::Ball(_))
    }

    pub fn rep(&self) -> Option<Rep> {
        match self {
            ConvexBody::VPoly(_) => Some(Rep::Vertices),
            ConvexBody::HPoly(_) => Some(Rep::Halfspaces),
            ConvexBody::Ball(_) => None,
        }
    }

    /// Switches the representation tag; the point set is unchanged.
    pub fn convert(&self, target: Rep) -> Result<Self> {
        let p = self.polytope("convert")?.clone();
        if p.dim() > 3 {
            return Err(Error::UnsupportedDimension(p.dim()));
        }
        Ok(match target {
            Rep::Vertices => ConvexBody::VPoly(p),
            Rep::Halfspaces => ConvexBody::HPoly(p),
        })
    }

    fn with_tag(&self, p: Polytope) -> Self {
        match self {
            ConvexBody::HPoly(_) => ConvexBody::HPoly(p),
            _ => ConvexBody::VPoly(p),
        }
    }

    pub fn support(&self, y: &[f64]) -> f64 {
        match self {
            ConvexBody::VPoly(p) | ConvexBody::HPoly(p) => p.support(y),
            ConvexBody::Ball(b) => norm(y) * b.radius + dot(&b.center, y),
        }
    }

    /// Minkowski functional with respect to the origin.
    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        match self {
            ConvexBody::VPoly(p) | ConvexBody::HPoly(p) => p.gauge(x),
            ConvexBody::Ball(b) => {
                let c2 = dot(&b.center, &b.center);
                let k = b.radius * b.radius - c2;
                if k <= GEOM_EPS * b.radius * b.radius {
                    return Err(Error::OriginNotInterior);
                }
                let xc = dot(x, &b.center);
                Ok((xc + (xc * xc + k * dot(x, x)).sqrt()) / k)
            }
        }
    }

    pub fn origin_interior(&self) -> bool {
        match self {
            ConvexBody::VPoly(p) | ConvexBody::HPoly(p) => p.origin_interior(),
            ConvexBody::Ball(b) => norm(&b.center) < b.radius * (1.0 - GEOM_EPS),
        }
    }

    /// Whether `z` lies in the interior, with a relative margin of `GEOM_EPS`.
    pub fn interior_contains(&self, z: &[f64]) -> bool {
        match self {
            ConvexBody::VPoly(p) | ConvexBody::HPoly(p) => {
                p.translate(&scale(z, -1.0)).origin_interior()
            }
            ConvexBody::Ball(b) => dist(&b.center, z) < b.radius * (1.0 - GEOM_EPS),
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            ConvexBody::VPoly(p) | ConvexBody::HPoly(p) => p.contains(x, tol),
            ConvexBody::Ball(b) => dist(&b.center, x) <= b.radius + tol,
        }
    }

    pub fn volume(&self) -> Result<f64> {
        match self {
            ConvexBody::VPoly(p) | ConvexBody::HPoly(p) => p.volume(),
            ConvexBody::Ball(b) => Ok(ball_volume(b.center.len()) * b.radius.powi(b.center.len() as i32)),
        }
    }

    pub fn barycenter(&self) -> Result<Vec<f64>> {
        match self {
            ConvexBody::VPoly(p) | ConvexBody::HPoly(p) => p.barycenter(),
            ConvexBody::Ball(b) => Ok(b.center.clone()),
        }
    }

    /// Axis-aligned bounding box as `(lower, upper)` corners.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim();
        let lo = (0..n)
            .map(|i| -self.support(&scale(Direction::axis(n, i).unit(), -1.0)))
            .collect();
        let hi = (0..n)
            .map(|i| self.support(Direction::axis(n, i).unit()))
            .collect();
        (lo, hi)
    }

    pub fn translate(&self, z: &[f64]) -> Self {
        match self {
            ConvexBody::VPoly(p) | ConvexBody::HPoly(p) => self.with_tag(p.translate(z)),
            ConvexBody::Ball(b) => ConvexBody::Ball(Ball {
                center: add(&b.center, z),
                radius: b.radius,
            }),
        }
    }

    /// The reflection `-K` through the origin.
    pub fn negate(&self) -> Self {
        match self {
            ConvexBody::VPoly(p) | ConvexBody::HPoly(p) => self.with_tag(p.negate()),
            ConvexBody::Ball(b) => ConvexBody::Ball(Ball {
                center: scale(&b.center, -1.0),
                radius: b.radius,
            }),
        }
    }

    /// Image under `x -> s x`, `s > 0`.
    pub fn dilate(&self, s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter("dilation factor must be positive".into()));
        }
        match self {
            ConvexBody::VPoly(p) | ConvexBody::HPoly(p) => {
                Ok(self.with_tag(p.map_points(|x| scale(x, s))?))
            }
            ConvexBody::Ball(b) => Ok(ConvexBody::Ball(Ball {
                center: scale(&b.center, s),
                radius: b.radius * s,
            })),
        }
    }

    /// Image under the linear map with the given matrix rows.
    pub fn linear_map(&self, rows: &[Vec<f64>]) -> Result<Self> {
        let p = self.polytope("linear_map")?;
        let n = p.dim();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rows.len(),
            });
        }
        let q = p.map_points(|x| rows.iter().map(|r| dot(r, x)).collect())?;
        Ok(self.with_tag(q))
    }

    /// Reflection in the hyperplane `v^perp`.
    pub fn reflect(&self, v: &Direction) -> Self {
        match self {
            ConvexBody::VPoly(p) | ConvexBody::HPoly(p) => {
                self.with_tag(p.map_orthogonal_involution(|x| v.reflect_point(x)))
            }
            ConvexBody::Ball(b) => ConvexBody::Ball(Ball {
                center: v.reflect_point(&b.center),
                radius: b.radius,
            }),
        }
    }

    /// Polar body with respect to the interior point `z`:
    /// `K^z = (K - z)^o + z`.
    pub fn polar(&self, z: &[f64]) -> Result<Self> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z.len(),
            });
        }
        if !self.interior_contains(z) {
            return Err(Error::CenterNotInterior);
        }
        match self {
            ConvexBody::VPoly(p) | ConvexBody::HPoly(p) => {
                let zero = z.iter().all(|&x| x == 0.0);
                let q = if zero {
                    p.polar()?
                } else {
                    p.translate(&scale(z, -1.0)).polar()?.translate(z)
                };
                Ok(match self {
                    ConvexBody::VPoly(_) => ConvexBody::HPoly(q),
                    _ => ConvexBody::VPoly(q),
                })
            }
            ConvexBody::Ball(b) => {
                if dist(&b.center, z) > 1e-12 * b.radius {
                    return Err(Error::BallUnsupported("polar about a non-center point"));
                }
                Ok(ConvexBody::Ball(Ball {
                    center: z.to_vec(),
                    radius: 1.0 / b.radius,
                }))
            }
        }
    }

    pub fn minkowski_sum(&self, other: &ConvexBody) -> Result<Self> {
        let (p, q) = (self.polytope("minkowski_sum")?, other.polytope("minkowski_sum")?);
        check_same_dim(p.dim(), q.dim())?;
        let mut pts = Vec::with_capacity(p.vertices().len() * q.vertices().len());
        for a in p.vertices() {
            for b in q.vertices() {
                pts.push(add(a, b));
            }
        }
        hull(&pts)
    }

    /// `K - L = K + (-L)`.
    pub fn minkowski_diff(&self, other: &ConvexBody) -> Result<Self> {
        self.minkowski_sum(&other.negate())
    }

    pub fn intersect(&self, other: &ConvexBody) -> Result<Self> {
        let (p, q) = (self.polytope("intersect")?, other.polytope("intersect")?);
        check_same_dim(p.dim(), q.dim())?;
        let mut normals = p.normals().to_vec();
        normals.extend_from_slice(q.normals());
        let mut offsets = p.offsets().to_vec();
        offsets.extend_from_slice(q.offsets());
        match intersect_halfspaces(&normals, &offsets) {
            Ok(r) => Ok(ConvexBody::HPoly(r)),
            Err(Error::DegenerateInput(_)) => Err(Error::EmptyInterior),
            Err(e) => Err(e),
        }
    }

    pub fn conv_union(&self, other: &ConvexBody) -> Result<Self> {
        let (p, q) = (self.polytope("conv_union")?, other.polytope("conv_union")?);
        check_same_dim(p.dim(), q.dim())?;
        let mut pts = p.vertices().to_vec();
        pts.extend_from_slice(q.vertices());
        hull(&pts)
    }

    /// Euclidean distance from `x` to the body.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            ConvexBody::VPoly(p) | ConvexBody::HPoly(p) => p.distance(x),
            ConvexBody::Ball(b) => (dist(x, &b.center) - b.radius).max(0.0),
        }
    }

    /// Hausdorff distance between two bodies of the same dimension.
    pub fn hausdorff(&self, other: &ConvexBody) -> Result<f64> {
        check_same_dim(self.dim(), other.dim())?;
        match (self, other) {
            (ConvexBody::Ball(a), ConvexBody::Ball(b)) => {
                Ok(dist(&a.center, &b.center) + (a.radius - b.radius).abs())
            }
            _ => {
                let p = self.polytope("hausdorff")?;
                let q = other.polytope("hausdorff")?;
                let d1 = p
                    .vertices()
                    .iter()
                    .map(|v| q.distance(v))
                    .fold(0.0, f64::max);
                let d2 = q
                    .vertices()
                    .iter()
                    .map(|v| p.distance(v))
                    .fold(0.0, f64::max);
                Ok(d1.max(d2))
            }
        }
    }

    pub fn profiles(&self, v: &Direction) -> Result<Profiles> {
        let p = self.polytope("profiles")?;
        Profiles::new(p, v)
    }

    /// The slice `{x' : x' + s v in K}` in the deterministic orthonormal
    /// coordinates of `v^perp`.
    pub fn section(&self, v: &Direction, s: f64) -> Result<ConvexBody> {
        let n = self.dim();
        check_same_dim(n, v.dim())?;
        if n < 2 {
            return Err(Error::UnsupportedDimension(n));
        }
        let basis = orthonormal_complement(v.unit());
        match self {
            ConvexBody::Ball(b) => {
                let h = s - dot(&b.center, v.unit());
                let r2 = b.radius * b.radius - h * h;
                if r2 <= (GEOM_EPS * b.radius).powi(2) {
                    return Err(Error::EmptySection);
                }
                Ok(ConvexBody::Ball(Ball {
                    center: coords_in(&basis, &b.center),
                    radius: r2.sqrt(),
                }))
            }
            ConvexBody::VPoly(p) | ConvexBody::HPoly(p) => {
                let pts = slice_points(p, v.unit(), s);
                if pts.len() < n {
                    return Err(Error::EmptySection);
                }
                let coords: Vec<Vec<f64>> = pts.iter().map(|x| coords_in(&basis, x)).collect();
                hull::hull(&coords)
                    .map(ConvexBody::VPoly)
                    .map_err(|_| Error::EmptySection)
            }
        }
    }

    /// Steiner symmetrization in direction `v`.
    pub fn steiner_symmetrize(&self, v: &Direction) -> Result<Self> {
        let prof = self.profiles(v)?;
        let pts = prof.chord_points(|_, lo, hi| (-(hi - lo) / 2.0, (hi - lo) / 2.0), &[]);
        hull(&pts)
    }
}

fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        })
    }
}

/// Points of `P ∩ {<x,v> = s}` spanning the slice: crossings of all vertex
/// pairs with the hyperplane, plus vertices on it.
fn slice_points(p: &Polytope, v: &[f64], s: f64) -> Vec<Vec<f64>> {
    let eps = GEOM_EPS * p.extent().max(1e-12);
    let vals: Vec<f64> = p.vertices().iter().map(|x| dot(x, v) - s).collect();
    let mut out = Vec::new();
    for (i, x) in p.vertices().iter().enumerate() {
        if vals[i].abs() <= eps {
            out.push(axpy(x, -vals[i], v));
        }
        for j in i + 1..vals.len() {
            if (vals[i] < -eps && vals[j] > eps) || (vals[i] > eps && vals[j] < -eps) {
                let t = vals[i] / (vals[i] - vals[j]);
                out.push(axpy(x, t, &sub(&p.vertices()[j], x)));
            }
        }
    }
    out
}

fn random_linear_map(r: &mut rng::Stream, n: usize) -> Vec<Vec<f64>> {
    use rand::Rng;
    // rotation by Gram-Schmidt on Gaussian columns, scaled by singular values in [0.5, 1.5]
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    while q.len() < n {
        let mut g: Vec<f64> = (0..n).map(|_| rng::normal(r)).collect();
        for b in &q {
            let c = dot(&g, b);
            g = axpy(&g, -c, b);
        }
        if let Some(u) = normalize(&g) {
            if norm(&g) > 1e-6 {
                q.push(u);
            }
        }
    }
    let sv: Vec<f64> = (0..n).map(|_| r.gen_range(0.5..1.5)).collect();
    (0..n)
        .map(|i| (0..n).map(|j| q[j][i] * sv[j]).collect())
        .collect()
}

/// Lower and upper boundary functions of a polytope over its projection
/// onto `v^perp`, so that `K = {x' + s v : lower(x') <= s <= upper(x')}`.
#[derive(Debug, Clone)]
pub struct Profiles {
    direction: Direction,
    basis: Vec<Vec<f64>>,
    domain: Polytope,
    // (a restricted to v^perp, offset, <a, v>)
    upper: Vec<(Vec<f64>, f64, f64)>,
    lower: Vec<(Vec<f64>, f64, f64)>,
    breakpoints: Vec<Vec<f64>>,
    segments: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Profiles {
    fn new(p: &Polytope, v: &Direction) -> Result<Self> {
        let n = p.dim();
        check_same_dim(n, v.dim())?;
        if !(2..=3).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        let basis = orthonormal_complement(v.unit());
        let projected: Vec<Vec<f64>> = p.vertices().iter().map(|x| coords_in(&basis, x)).collect();
        let domain = hull::hull(&projected)?;
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        for (a, &b) in p.normals().iter().zip(p.offsets()) {
            let av = dot(a, v.unit());
            let ap = coords_in(&basis, a);
            if av > 1e-12 {
                upper.push((ap, b, av));
            } else if av < -1e-12 {
                lower.push((ap, b, av));
            }
        }
        let eps = GEOM_EPS * max_abs(&projected).max(1e-12);
        let mut breakpoints: Vec<Vec<f64>> = Vec::new();
        let push = |x: Vec<f64>, list: &mut Vec<Vec<f64>>| {
            if list.iter().all(|y| dist(y, &x) > eps) {
                list.push(x);
            }
        };
        for x in &projected {
            push(x.clone(), &mut breakpoints);
        }
        let mut segments = Vec::new();
        if n == 3 {
            let mut edges = std::collections::BTreeSet::new();
            for f in p.facets() {
                for k in 0..f.len() {
                    let (a, b) = (f[k], f[(k + 1) % f.len()]);
                    edges.insert((a.min(b), a.max(b)));
                }
            }
            for &(a, b) in &edges {
                if dist(&projected[a], &projected[b]) > eps {
                    segments.push((projected[a].clone(), projected[b].clone()));
                }
            }
            for i in 0..segments.len() {
                for j in i + 1..segments.len() {
                    if let Some(x) = segment_crossing(&segments[i], &segments[j], eps) {
                        push(x, &mut breakpoints);
                    }
                }
            }
        }
        Ok(Profiles {
            direction: v.clone(),
            basis,
            domain,
            upper,
            lower,
            breakpoints,
            segments,
        })
    }

    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    /// Orthonormal basis of `v^perp` used for the coordinates `x'`.
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// The projection `K | v^perp` in basis coordinates.
    pub fn domain(&self) -> &Polytope {
        &self.domain
    }

    /// Projected vertices and, in three dimensions, crossings of projected
    /// edges: every kink of either profile lies on a segment between these.
    pub fn breakpoints(&self) -> &[Vec<f64>] {
        &self.breakpoints
    }

    /// Projected edges (three-dimensional bodies only).
    pub fn projected_edges(&self) -> &[(Vec<f64>, Vec<f64>)] {
        &self.segments
    }

    /// Upper profile `f_v` (concave).
    pub fn upper(&self, x: &[f64]) -> f64 {
        self.upper
            .iter()
            .map(|(a, b, av)| (b - dot(a, x)) / av)
            .fold(f64::INFINITY, f64::min)
    }

    /// Lower profile `g_v` (convex).
    pub fn lower(&self, x: &[f64]) -> f64 {
        self.lower
            .iter()
            .map(|(a, b, av)| (b - dot(a, x)) / av)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lifts `x' in v^perp` and a height `s` back into `R^n`.
    pub fn lift(&self, x: &[f64], s: f64) -> Vec<f64> {
        axpy(&embed(&self.basis, x), s, self.direction.unit())
    }

    /// Chord endpoints over the breakpoints and `extra` points, with each
    /// chord mapped by `map(x', lower, upper) -> (new_lower, new_upper)`.
    pub fn chord_points(
        &self,
        map: impl Fn(&[f64], f64, f64) -> (f64, f64),
        extra: &[Vec<f64>],
    ) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for x in self.breakpoints.iter().chain(extra) {
            let lo = self.lower(x);
            let hi = self.upper(x).max(lo);
            let (a, b) = map(x, lo, hi);
            out.push(self.lift(x, a));
            out.push(self.lift(x, b));
        }
        out
    }
}

/// Proper crossing point of two planar segments, if any.
pub(crate) fn segment_crossing(
    s: &(Vec<f64>, Vec<f64>),
    t: &(Vec<f64>, Vec<f64>),
    eps: f64,
) -> Option<Vec<f64>> {
    let r = sub(&s.1, &s.0);
    let q = sub(&t.1, &t.0);
    let den = r[0] * q[1] - r[1] * q[0];
    if den.abs() <= eps * (norm(&r) * norm(&q)).max(f64::MIN_POSITIVE) {
        return None;
    }
    let w = sub(&t.0, &s.0);
    let a = (w[0] * q[1] - w[1] * q[0]) / den;
    let b = (w[0] * r[1] - w[1] * r[0]) / den;
    if (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b) {
        Some(axpy(&s.0, a, &r))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> ConvexBody {
        hull(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn cube_and_polar() {
        let c = ConvexBody::cube(3, 1.0).unwrap();
        assert!((c.volume().unwrap() - 8.0).abs() < 1e-12);
        let o = c.polar(&[0.0; 3]).unwrap();
        assert_eq!(o.as_polytope().unwrap().vertices().len(), 6);
        assert!((o.volume().unwrap() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_polar_about_point() {
        let k = ConvexBody::cube(1, 1.0).unwrap();
        let shifted = k.translate(&[-0.5]).polar(&[0.0]).unwrap();
        assert!((shifted.volume().unwrap() - 8.0 / 3.0).abs() < 1e-14);
        let kz = k.polar(&[0.5]).unwrap();
        assert!((kz.volume().unwrap() - 8.0 / 3.0).abs() < 1e-14);
        assert_eq!(k.polar(&[1.0]), Err(Error::CenterNotInterior));
    }

    #[test]
    fn triangle_profiles_and_reflection() {
        let t = triangle();
        let v = Direction::axis(2, 1);
        let prof = t.profiles(&v).unwrap();
        assert!((prof.lower(&[0.25]) - 0.0).abs() < 1e-15);
        assert!((prof.upper(&[0.25]) - 0.75).abs() < 1e-15);
        let r = t.reflect(&v);
        let expect = hull(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert!(r.hausdorff(&expect).unwrap() < 1e-15);
    }

    #[test]
    fn octagon_from_two_squares() {
        let sq = ConvexBody::cube(2, 1.0).unwrap();
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let rot = sq.linear_map(&[vec![c, -c], vec![c, c]]).unwrap();
        let oct = sq.intersect(&rot).unwrap();
        assert_eq!(oct.as_polytope().unwrap().vertices().len(), 8);
        let expect = 8.0 * (std::f64::consts::PI / 8.0).tan();
        assert!((oct.volume().unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn ball_section_and_gauge() {
        let b = ConvexBody::ball(vec![0.0; 3], 1.0).unwrap();
        let s = b.section(&Direction::axis(3, 2), 0.6).unwrap();
        assert!((s.volume().unwrap() - std::f64::consts::PI * 0.64).abs() < 1e-12);
        assert!((b.gauge(&[0.0, 3.0, 4.0]).unwrap() - 5.0).abs() < 1e-15);
    }
}
