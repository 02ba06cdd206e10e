//! Shadow systems and parallel chord movements.
//!
//! A parallel chord movement in direction `v` shifts every chord of `K`
//! parallel to `v` by `t * β(x')`, where `x'` is the chord's footprint in
//! `v^perp`. The moved body `K_t` is convex for `t` in an interval containing
//! zero, found by scanning.

use serde::{Deserialize, Serialize};

use crate::bodies::linalg::{axpy, dot, sub};
use crate::bodies::{hull, hull_points, segment_crossing, ConvexBody, Direction, Profiles, GEOM_EPS};
use crate::error::{Error, Result};
use crate::rng;

/// Speed function in its JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpeedSpec {
    Steiner,
    Const { value: f64 },
    Affine { coeffs: Vec<f64>, offset: f64 },
    Pl { points: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedKind {
    GeneralAlpha,
    ChordwiseBeta,
}

/// Piecewise-linear interpolant over nodes in `v^perp` coordinates:
/// sorted nodes on a line, or a Delaunay triangulation in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PlField {
    nodes: Vec<Vec<f64>>,
    values: Vec<f64>,
    triangles: Vec<[usize; 3]>,
}

impl PlField {
    /// `points` are rows `[x'..., value]`.
    pub fn new(points: &[Vec<f64>]) -> Result<Self> {
        let m = points.first().map(|p| p.len()).unwrap_or(0);
        if !(2..=3).contains(&m) || points.iter().any(|p| p.len() != m) {
            return Err(Error::InvalidSpeed("pl points must all have length 2 or 3".into()));
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpeed("pl points must be finite".into()));
        }
        let mut rows: Vec<Vec<f64>> = points.to_vec();
        if m == 2 {
            rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
            if rows.windows(2).any(|w| w[1][0] - w[0][0] <= 0.0) || rows.len() < 2 {
                return Err(Error::InvalidSpeed("pl nodes must be at least two distinct abscissae".into()));
            }
            return Ok(PlField {
                nodes: rows.iter().map(|r| vec![r[0]]).collect(),
                values: rows.iter().map(|r| r[1]).collect(),
                triangles: Vec::new(),
            });
        }
        let nodes: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0], r[1]]).collect();
        let values: Vec<f64> = rows.iter().map(|r| r[2]).collect();
        // Delaunay triangulation as the lower hull of the lifted nodes
        let lifted: Vec<Vec<f64>> = nodes
            .iter()
            .map(|x| vec![x[0], x[1], x[0] * x[0] + x[1] * x[1]])
            .collect();
        let poly = hull_points(&lifted)
            .map_err(|_| Error::InvalidSpeed("pl nodes must span the plane".into()))?;
        if poly.vertices().len() != nodes.len() {
            return Err(Error::InvalidSpeed("pl nodes must be distinct".into()));
        }
        let index = |x: &[f64]| {
            nodes
                .iter()
                .position(|y| (y[0] - x[0]).abs() + (y[1] - x[1]).abs() == 0.0)
                .expect("hull vertex is a node")
        };
        let mut triangles = Vec::new();
        for (f, a) in poly.facets().iter().zip(poly.normals()) {
            if a[2] >= -1e-12 {
                continue;
            }
            let ids: Vec<usize> = f.iter().map(|&i| index(&poly.vertices()[i])).collect();
            for k in 1..ids.len() - 1 {
                triangles.push([ids[0], ids[k], ids[k + 1]]);
            }
        }
        Ok(PlField {
            nodes,
            values,
            triangles,
        })
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    /// Interpolated value, `None` outside the triangulated region.
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        let eps = 1e-12 * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        if self.triangles.is_empty() {
            let n = self.nodes.len();
            if x[0] < self.nodes[0][0] - eps || x[0] > self.nodes[n - 1][0] + eps {
                return None;
            }
            let k = self.nodes[1..n - 1].partition_point(|y| y[0] <= x[0]);
            let (a, b) = (self.nodes[k][0], self.nodes[k + 1][0]);
            let s = ((x[0] - a) / (b - a)).clamp(0.0, 1.0);
            return Some(self.values[k] * (1.0 - s) + self.values[k + 1] * s);
        }
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| &self.nodes[i]);
            let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            let l1 = ((x[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (x[1] - a[1])) / det;
            let l2 = ((b[0] - a[0]) * (x[1] - a[1]) - (x[0] - a[0]) * (b[1] - a[1])) / det;
            let l0 = 1.0 - l1 - l2;
            if l0 >= -eps && l1 >= -eps && l2 >= -eps {
                return Some(l0 * self.values[t[0]] + l1 * self.values[t[1]] + l2 * self.values[t[2]]);
            }
        }
        None
    }

    fn edges(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        let mut set = std::collections::BTreeSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                set.insert((a.min(b), a.max(b)));
            }
        }
        set.into_iter()
            .map(|(a, b)| (self.nodes[a].clone(), self.nodes[b].clone()))
            .collect()
    }
}

/// A resolved speed function.
#[derive(Debug, Clone)]
pub enum SpeedFunction {
    /// `β(x') = <coeffs, x'> + offset`.
    Affine { coeffs: Vec<f64>, offset: f64 },
    /// `β(x') = -weight (g_v(x') + f_v(x')) + <coeffs, x'> + offset`.
    Steiner {
        profiles: Box<Profiles>,
        weight: f64,
        coeffs: Vec<f64>,
        offset: f64,
    },
    PiecewiseLinear(PlField),
    /// `α` sampled at points of the body; the system is the hull of moved points.
    Alpha(Vec<(Vec<f64>, f64)>),
}

impl SpeedFunction {
    pub fn constant(value: f64, n: usize) -> Self {
        SpeedFunction::Affine {
            coeffs: vec![0.0; n.saturating_sub(1)],
            offset: value,
        }
    }

    pub fn kind(&self) -> SpeedKind {
        match self {
            SpeedFunction::Alpha(_) => SpeedKind::GeneralAlpha,
            _ => SpeedKind::ChordwiseBeta,
        }
    }

    /// `β(x')`; `None` outside the domain of a piecewise-linear field.
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        match self {
            SpeedFunction::Affine { coeffs, offset } => Some(dot(coeffs, x) + offset),
            SpeedFunction::Steiner {
                profiles,
                weight,
                coeffs,
                offset,
            } => Some(-weight * (profiles.lower(x) + profiles.upper(x)) + dot(coeffs, x) + offset),
            SpeedFunction::PiecewiseLinear(f) => f.eval(x),
            SpeedFunction::Alpha(_) => None,
        }
    }

    /// Resolves a JSON speed against a body and direction.
    pub fn from_spec(spec: &SpeedSpec, k: &ConvexBody, v: &Direction) -> Result<Self> {
        let m = k.dim().saturating_sub(1);
        match spec {
            SpeedSpec::Steiner => steiner_speed(k, v),
            SpeedSpec::Const { value } => Ok(SpeedFunction::constant(*value, k.dim())),
            SpeedSpec::Affine { coeffs, offset } => {
                if coeffs.len() != m {
                    return Err(Error::InvalidSpeed(format!(
                        "affine speed needs {m} coefficients, got {}",
                        coeffs.len()
                    )));
                }
                Ok(SpeedFunction::Affine {
                    coeffs: coeffs.clone(),
                    offset: *offset,
                })
            }
            SpeedSpec::Pl { points } => {
                if points.iter().any(|p| p.len() != m + 1) {
                    return Err(Error::InvalidSpeed(format!("pl points need {} entries", m + 1)));
                }
                Ok(SpeedFunction::PiecewiseLinear(PlField::new(points)?))
            }
        }
    }
}

/// `β = -(g_v + f_v)`: moves `K` to its reflection at `t = 1` through its
/// Steiner symmetral at `t = 1/2`.
pub fn steiner_speed(k: &ConvexBody, v: &Direction) -> Result<SpeedFunction> {
    let profiles = k.profiles(v)?;
    Ok(SpeedFunction::Steiner {
        profiles: Box::new(profiles),
        weight: 1.0,
        coeffs: vec![0.0; k.dim() - 1],
        offset: 0.0,
    })
}

/// Half-width of the default convexity scan window.
pub const SCAN_WINDOW: f64 = 2.0;

/// A body moving under a speed function.
#[derive(Debug, Clone)]
pub struct ShadowSystem {
    base: ConvexBody,
    direction: Direction,
    speed: SpeedFunction,
    profiles: Option<Profiles>,
    // footprints where some chord endpoint function may kink
    nodes: Vec<Vec<f64>>,
    volume: f64,
    validity: (f64, f64),
}

/// Builds a parallel chord movement and computes its validity interval
/// within `[-SCAN_WINDOW, SCAN_WINDOW]`.
pub fn make_parallel_chord(k: &ConvexBody, v: &Direction, beta: SpeedFunction) -> Result<ShadowSystem> {
    make_parallel_chord_in(k, v, beta, SCAN_WINDOW)
}

/// As [`make_parallel_chord`] with an explicit scan window `[-window, window]`.
pub fn make_parallel_chord_in(
    k: &ConvexBody,
    v: &Direction,
    beta: SpeedFunction,
    window: f64,
) -> Result<ShadowSystem> {
    if beta.kind() != SpeedKind::ChordwiseBeta {
        return Err(Error::InvalidSpeed("chord movements need a chordwise speed".into()));
    }
    let profiles = k.profiles(v)?;
    let domain = profiles.domain();
    let eps = GEOM_EPS * domain.extent().max(1.0);
    let mut nodes: Vec<Vec<f64>> = profiles.breakpoints().to_vec();
    match &beta {
        SpeedFunction::Affine { coeffs, offset } => {
            if coeffs.len() != k.dim() - 1 || coeffs.iter().chain([offset]).any(|c| !c.is_finite()) {
                return Err(Error::InvalidSpeed("affine speed has wrong arity or non-finite terms".into()));
            }
        }
        SpeedFunction::Steiner { profiles: sp, .. } => {
            if sp.direction() != v {
                return Err(Error::InvalidSpeed("Steiner speed built for another direction".into()));
            }
        }
        SpeedFunction::PiecewiseLinear(field) => {
            if field.nodes()[0].len() != k.dim() - 1 {
                return Err(Error::InvalidSpeed("pl speed has the wrong dimension".into()));
            }
            for x in domain.vertices() {
                if field.eval(x).is_none() {
                    return Err(Error::InvalidSpeed("pl speed does not cover the projection".into()));
                }
            }
            for x in field.nodes() {
                if domain.contains(x, eps) {
                    nodes.push(x.clone());
                }
            }
            if k.dim() == 3 {
                for e in field.edges() {
                    for s in profiles.projected_edges() {
                        if let Some(x) = segment_crossing(&e, s, eps) {
                            nodes.push(x);
                        }
                    }
                }
            }
        }
        SpeedFunction::Alpha(_) => unreachable!(),
    }
    for x in &nodes {
        match beta.eval(x) {
            Some(b) if b.is_finite() => {}
            _ => return Err(Error::InvalidSpeed("speed is not finite on the projection".into())),
        }
    }
    let volume = k.volume()?;
    let mut system = ShadowSystem {
        base: k.clone(),
        direction: v.clone(),
        speed: beta,
        profiles: Some(profiles),
        nodes,
        volume,
        validity: (0.0, 0.0),
    };
    system.validity = system.scan_validity(window)?;
    Ok(system)
}

/// General shadow system `K_t = conv{x + α(x) t v}` over sampled points.
pub fn make_general(points: &[Vec<f64>], alpha: &[f64], v: &Direction) -> Result<ShadowSystem> {
    if points.len() != alpha.len() || alpha.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidSpeed("alpha must give one finite value per point".into()));
    }
    let base = hull(points)?;
    let volume = base.volume()?;
    Ok(ShadowSystem {
        base,
        direction: v.clone(),
        speed: SpeedFunction::Alpha(points.iter().cloned().zip(alpha.iter().copied()).collect()),
        profiles: None,
        nodes: Vec::new(),
        volume,
        validity: (f64::NEG_INFINITY, f64::INFINITY),
    })
}

/// A random chordwise system `β = -λ (g + f) + affine(x')`, which stays
/// convex for `t` in `[0, 1/λ]`.
pub fn random_chordwise(k: &ConvexBody, v: &Direction, seed: u64, index: u32) -> Result<ShadowSystem> {
    use rand::Rng;
    let mut r = rng::stream(seed, 0x5348, index);
    let weight = r.gen_range(0.0..1.0);
    let coeffs: Vec<f64> = (0..k.dim() - 1).map(|_| 0.3 * rng::normal(&mut r)).collect();
    let offset = 0.3 * rng::normal(&mut r);
    let profiles = Box::new(k.profiles(v)?);
    make_parallel_chord(
        k,
        v,
        SpeedFunction::Steiner {
            profiles,
            weight,
            coeffs,
            offset,
        },
    )
}

impl ShadowSystem {
    pub fn base(&self) -> &ConvexBody {
        &self.base
    }

    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    pub fn speed(&self) -> &SpeedFunction {
        &self.speed
    }

    /// Closed interval of `t` where `K_t` is convex (within the scan window).
    pub fn validity(&self) -> (f64, f64) {
        self.validity
    }

    pub fn is_valid_at(&self, t: f64) -> bool {
        let (a, b) = self.validity;
        t >= a - 1e-12 && t <= b + 1e-12
    }

    fn moved_points(&self, t: f64) -> Vec<Vec<f64>> {
        let v = self.direction.unit();
        match (&self.speed, &self.profiles) {
            (SpeedFunction::Alpha(samples), _) => samples
                .iter()
                .map(|(x, a)| axpy(x, a * t, v))
                .collect(),
            (_, Some(prof)) => prof.chord_points(
                |x, lo, hi| {
                    let shift = t * self.speed.eval(x).unwrap_or(0.0);
                    (lo + shift, hi + shift)
                },
                &self.nodes[prof.breakpoints().len()..],
            ),
            _ => Vec::new(),
        }
    }

    /// Hull of the moved chord endpoints; equals `K_t` whenever `K_t` is convex.
    fn moved_hull(&self, t: f64) -> Result<ConvexBody> {
        if t == 0.0 {
            return Ok(self.base.clone());
        }
        hull(&self.moved_points(t))
    }

    /// Whether the union of moved chords is convex at `t`. The union always
    /// has the volume of `K` and lies in the hull of the moved endpoints, so
    /// it is convex exactly when that hull is no larger than `K`.
    pub fn convexity_scan(&self, t: f64) -> bool {
        if self.speed.kind() == SpeedKind::GeneralAlpha {
            return true;
        }
        match self.moved_hull(t).and_then(|h| h.volume()) {
            Ok(vol) => vol <= self.volume * (1.0 + 1e-9),
            Err(_) => false,
        }
    }

    fn scan_validity(&self, window: f64) -> Result<(f64, f64)> {
        // the set of valid t is an interval containing 0
        let steps = 40;
        let edge = |sign: f64| -> f64 {
            let mut good = 0.0;
            for i in 1..=steps {
                let t = sign * window * i as f64 / steps as f64;
                if self.convexity_scan(t) {
                    good = t;
                } else {
                    let mut bad = t;
                    for _ in 0..50 {
                        let mid = 0.5 * (good + bad);
                        if self.convexity_scan(mid) {
                            good = mid;
                        } else {
                            bad = mid;
                        }
                    }
                    return good;
                }
            }
            good
        };
        Ok((edge(-1.0), edge(1.0)))
    }

    /// `K_t`; fails with `NotConvexAtT` outside the validity interval.
    pub fn body_at(&self, t: f64) -> Result<ConvexBody> {
        if !t.is_finite() || !self.is_valid_at(t) {
            return Err(Error::NotConvexAtT(t));
        }
        self.moved_hull(t)
    }

    /// `|K_t|` for each `t`.
    pub fn volume_along(&self, ts: &[f64]) -> Result<Vec<f64>> {
        ts.iter().map(|&t| self.body_at(t)?.volume()).collect()
    }

    /// Chord-length preservation residual at `t` over the kink footprints.
    pub fn chord_length_residual(&self, t: f64) -> f64 {
        let prof = match &self.profiles {
            Some(p) => p,
            None => return 0.0,
        };
        let mut worst = 0.0f64;
        for x in &self.nodes {
            let shift = t * self.speed.eval(x).unwrap_or(0.0);
            let before = prof.upper(x) - prof.lower(x);
            let after = (prof.upper(x) + shift) - (prof.lower(x) + shift);
            worst = worst.max((before - after).abs());
        }
        worst
    }

    /// Footprint samples in `v^perp` coordinates where the chord endpoints
    /// may kink.
    pub fn kink_footprints(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    /// Chord `[lower, upper]` of `K_t` over footprint `x'`.
    pub fn chord_at(&self, x: &[f64], t: f64) -> Option<(f64, f64)> {
        let prof = self.profiles.as_ref()?;
        let shift = t * self.speed.eval(x)?;
        Some((prof.lower(x) + shift, prof.upper(x) + shift))
    }

    pub fn profiles(&self) -> Option<&Profiles> {
        self.profiles.as_ref()
    }

    /// Moves a point of `K` along with its chord.
    pub fn move_point(&self, x: &[f64], t: f64) -> Option<Vec<f64>> {
        let prof = self.profiles.as_ref()?;
        let basis = prof.basis();
        let xp: Vec<f64> = basis.iter().map(|b| dot(b, x)).collect();
        let shift = t * self.speed.eval(&xp)?;
        Some(axpy(x, shift, self.direction.unit()))
    }
}

/// Offset between two bodies' vertex sets (for `t = 0` identity checks).
pub fn vertex_set_gap(a: &ConvexBody, b: &ConvexBody) -> f64 {
    let (pa, pb) = match (a.as_polytope(), b.as_polytope()) {
        (Some(x), Some(y)) => (x, y),
        _ => return f64::INFINITY,
    };
    if pa.vertices().len() != pb.vertices().len() {
        return f64::INFINITY;
    }
    pa.vertices()
        .iter()
        .map(|x| {
            pb.vertices()
                .iter()
                .map(|y| sub(x, y).iter().fold(0.0f64, |m, d| m.max(d.abs())))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}
