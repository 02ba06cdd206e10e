//! L_p support functions, L_p polar bodies and L_p Mahler volumes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bodies::linalg::{axpy, dot, norm, scale, sub};
use crate::bodies::{intersect_halfspaces, ConvexBody, Direction};
use crate::error::{Error, Result};
use crate::quadrature::{
    ball_profile, ball_volume, exp_simplex_with_moment, factorial, gauss_laguerre,
    integrate_adaptive, integrate_radial, integrate_simplex, ln_exp_integral, sphere_grid,
    sphere_grid_with_phase, sphere_sample, triangulate, Estimate, Method, SimplexMesh, SphereGrid,
};
use crate::rng;

/// The exponent `p` in `(0, ∞]`; infinity is a distinct variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PParam {
    Finite(f64),
    Infinity,
}

impl PParam {
    pub fn finite(p: f64) -> Result<Self> {
        if p > 0.0 && p.is_finite() {
            Ok(PParam::Finite(p))
        } else {
            Err(Error::InvalidParameter(format!("p must lie in (0, inf), got {p}")))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, PParam::Infinity)
    }

    /// `p` as a float (`f64::INFINITY` for the infinite variant).
    pub fn value(&self) -> f64 {
        match self {
            PParam::Finite(p) => *p,
            PParam::Infinity => f64::INFINITY,
        }
    }

    /// `c_p = (1 + p)^{1 + 1/p} / p`, with `c_∞ = 1`.
    pub fn cp(&self) -> f64 {
        match self {
            PParam::Finite(p) => ((1.0 + p).ln() * (1.0 + 1.0 / p)).exp() / p,
            PParam::Infinity => 1.0,
        }
    }
}

impl fmt::Display for PParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PParam::Finite(p) => write!(f, "{p}"),
            PParam::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for PParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Infinity" | "∞" => Ok(PParam::Infinity),
            t => {
                let p: f64 = t
                    .parse()
                    .map_err(|_| Error::Parse(format!("invalid p value `{t}`")))?;
                PParam::finite(p).map_err(|e| Error::Parse(e.to_string()))
            }
        }
    }
}

impl Serialize for PParam {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PParam::Finite(p) => s.serialize_f64(*p),
            PParam::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PParam {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => PParam::finite(p).map_err(serde::de::Error::custom),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Uniform samples used for Monte Carlo evaluation in dimension four.
#[derive(Debug, Clone)]
struct SampleCache {
    points: Vec<Vec<f64>>,
}

/// Evaluates L_p quantities of one body at one exponent.
#[derive(Debug, Clone)]
pub struct LpEvaluator {
    body: ConvexBody,
    p: PParam,
    volume: Estimate,
    mesh: Option<SimplexMesh>,
    samples: Option<SampleCache>,
    tol: f64,
    resolution: usize,
}

/// Default sphere-grid resolution for polar volumes.
pub fn default_resolution(n: usize) -> usize {
    match n {
        2 => 256,
        3 => 16,
        _ => 4096,
    }
}

impl LpEvaluator {
    /// Evaluator with relative quadrature tolerance `1e-10`.
    pub fn new(body: ConvexBody, p: PParam) -> Result<Self> {
        Self::with_options(body, p, 1e-10, 200_000, 0)
    }

    /// Evaluator with explicit tolerance and, for dimension four, the number
    /// of Monte Carlo samples and their seed.
    pub fn with_options(
        body: ConvexBody,
        p: PParam,
        tol: f64,
        mc_samples: u64,
        seed: u64,
    ) -> Result<Self> {
        let n = body.dim();
        if n == 0 || n > 4 {
            return Err(Error::UnsupportedDimension(n));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        let resolution = default_resolution(n);
        if body.is_ball() || n <= 3 {
            let mesh = if body.is_ball() {
                None
            } else {
                Some(triangulate(&body)?)
            };
            let volume = Estimate::deterministic(body.volume()?, 0.0, 1);
            return Ok(LpEvaluator {
                body,
                p,
                volume,
                mesh,
                samples: None,
                tol,
                resolution,
            });
        }
        let (lo, hi) = body.bounding_box();
        let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
        let mut stream = rng::stream(seed, 0x4d43, 0);
        let mut points = Vec::new();
        let mut draws = 0u64;
        use rand::Rng;
        while (points.len() as u64) < mc_samples.max(16) && draws < 100 * mc_samples.max(16) {
            let x: Vec<f64> = lo
                .iter()
                .zip(&hi)
                .map(|(a, b)| stream.gen_range(*a..=*b))
                .collect();
            draws += 1;
            if body.contains(&x, 0.0) {
                points.push(x);
            }
        }
        if points.is_empty() {
            return Err(Error::ZeroAcceptance);
        }
        let frac = points.len() as f64 / draws as f64;
        let volume = Estimate {
            value: frac * box_vol,
            error: 1.96 * (frac * (1.0 - frac) / draws as f64).sqrt() * box_vol,
            method: Method::MonteCarlo,
            samples: draws,
        };
        Ok(LpEvaluator {
            body,
            p,
            volume,
            mesh: None,
            samples: Some(SampleCache { points }),
            tol,
            resolution,
        })
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution.max(4);
        self
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn p(&self) -> PParam {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    pub fn volume(&self) -> Estimate {
        self.volume
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    fn is_mc(&self) -> bool {
        self.samples.is_some()
    }

    /// `ln ∫_K e^{<x,w>} dx - ln|K|` with an absolute error bound.
    fn ln_mean_exp(&self, w: &[f64]) -> Result<(f64, f64)> {
        if let Some(cache) = &self.samples {
            let shift = self.body.support(w);
            let vals: Vec<f64> = cache
                .points
                .iter()
                .map(|x| (dot(x, w) - shift).exp())
                .collect();
            let m = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / m;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
            let rel = 1.96 * var.sqrt() / m.sqrt() / mean;
            return Ok((mean.ln() + shift, rel));
        }
        let (ln, rel) = ln_exp_integral(&self.body, self.mesh.as_ref(), w)?;
        Ok((ln - self.volume.value.ln(), rel))
    }

    /// L_p support function `h_{p,K}(y)`.
    pub fn lp_support(&self, y: &[f64]) -> Result<Estimate> {
        self.check_dim(y)?;
        if y.iter().all(|&v| v == 0.0) {
            return Ok(Estimate::exact(0.0));
        }
        match self.p {
            PParam::Infinity => Ok(Estimate::exact(self.body.support(y))),
            PParam::Finite(p) => {
                let w = scale(y, p);
                let (ln, err) = self.ln_mean_exp(&w)?;
                let method = if self.is_mc() {
                    Method::MonteCarlo
                } else {
                    Method::Deterministic
                };
                let value = ln / p;
                Ok(Estimate {
                    value,
                    error: err / p + 1e-15 * value.abs(),
                    method,
                    samples: 1,
                })
            }
        }
    }

    fn h_value(&self, y: &[f64]) -> f64 {
        match self.p {
            PParam::Infinity => self.body.support(y),
            PParam::Finite(p) => {
                if y.iter().all(|&v| v == 0.0) {
                    return 0.0;
                }
                self.ln_mean_exp(&scale(y, p)).map(|r| r.0 / p).unwrap_or(f64::NAN)
            }
        }
    }

    /// Gradient of `h_{p,K}` at `y`: the mean of `K` under the weight `e^{p<x,y>}`.
    pub fn lp_support_gradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(y)?;
        let p = match self.p {
            PParam::Infinity => return Ok(self.support_point(y)),
            PParam::Finite(p) => p,
        };
        let w = scale(y, p);
        match (&self.body, &self.mesh, &self.samples) {
            (ConvexBody::Ball(b), _, _) => {
                let n = b.center.len();
                let a = b.radius * norm(&w);
                if a == 0.0 {
                    return Ok(b.center.clone());
                }
                let m = ball_profile(a, n).value;
                let dm = integrate_adaptive(
                    |t: f64| (t.cos() - 1.0) * (a * (t.cos() - 1.0)).exp() * t.sin().powi(n as i32),
                    0.0,
                    std::f64::consts::PI,
                    1e-13,
                    0.0,
                )
                .value;
                let radial = b.radius * (1.0 + dm / m);
                Ok(axpy(&b.center, radial / norm(&w), &w))
            }
            (_, Some(mesh), _) => {
                let shift = self.body.support(&w);
                let mut total = 0.0;
                let mut first = vec![0.0; self.dim()];
                for s in &mesh.simplices {
                    let (b, m) = exp_simplex_with_moment(s, &w, shift, true);
                    total += b;
                    first = axpy(&first, 1.0, &m);
                }
                Ok(scale(&first, 1.0 / total))
            }
            (_, _, Some(cache)) => {
                let shift = self.body.support(&w);
                let mut total = 0.0;
                let mut first = vec![0.0; self.dim()];
                for x in &cache.points {
                    let e = (dot(x, &w) - shift).exp();
                    total += e;
                    first = axpy(&first, e, x);
                }
                Ok(scale(&first, 1.0 / total))
            }
            _ => Err(Error::UnsupportedDimension(self.dim())),
        }
    }

    fn support_point(&self, y: &[f64]) -> Vec<f64> {
        match &self.body {
            ConvexBody::Ball(b) => match crate::bodies::linalg::normalize(y) {
                Some(u) => axpy(&b.center, b.radius, &u),
                None => b.center.clone(),
            },
            _ => self
                .body
                .as_polytope()
                .map(|p| p.support_point(y).to_vec())
                .unwrap_or_default(),
        }
    }

    fn check_dim(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: y.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite argument".into()));
        }
        Ok(())
    }

    /// `(1/(n-1)!) ∫_0^∞ r^{n-1} e^{-h_{p,K}(r y)} dr` without checking that
    /// the origin is interior; diverging rays report `RadialDivergence`.
    pub fn radial_integral(&self, y: &[f64]) -> Result<Estimate> {
        self.radial_integral_tol(y, self.tol)
    }

    fn radial_integral_tol(&self, y: &[f64], tol: f64) -> Result<Estimate> {
        self.check_dim(y)?;
        let n = self.dim();
        let hk = self.body.support(y);
        if !(hk > 0.0) {
            return Err(Error::RadialDivergence);
        }
        let fact = factorial(n - 1);
        if self.p.is_infinite() {
            return Ok(Estimate::exact(hk.powi(-(n as i32))));
        }
        let c = 0.5 * hk;
        let est = integrate_radial(|r| (-self.h_value(&scale(y, r))).exp(), n, c, tol)
            .map_err(|e| match e {
                Error::NoDecayBound(_) => Error::RadialDivergence,
                other => other,
            })?;
        let mut out = est.scale(1.0 / fact);
        if self.is_mc() {
            out.method = Method::MonteCarlo;
        }
        Ok(out)
    }

    /// L_p polar gauge `‖y‖_{K^{o,p}}`; zero at `y = o`.
    pub fn lp_gauge(&self, y: &[f64]) -> Result<Estimate> {
        self.check_dim(y)?;
        if !self.body.origin_interior() {
            return Err(Error::OriginNotInterior);
        }
        if y.iter().all(|&v| v == 0.0) {
            return Ok(Estimate::exact(0.0));
        }
        if self.p.is_infinite() {
            return Ok(Estimate::exact(self.body.support(y)));
        }
        let n = self.dim() as f64;
        let g = self.radial_integral(y)?;
        let mut out = g.powf(-1.0 / n);
        out.error += 1e-15 * out.value;
        Ok(out)
    }

    /// Gradient of the L_p polar gauge at `y != o`.
    pub fn lp_gauge_gradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(y)?;
        if !self.body.origin_interior() {
            return Err(Error::OriginNotInterior);
        }
        if self.p.is_infinite() {
            return Ok(self.support_point(y));
        }
        let n = self.dim();
        let g = self.radial_integral(y)?.value * factorial(n - 1);
        // cutoff where the integrand is negligible, from the same decay bound
        let c = 0.5 * self.body.support(y);
        let mut r = n as f64 / c;
        while (-self.h_value(&scale(y, r))).exp() * r.powi(n as i32) > 1e-16 * g && r < 1e9 {
            r *= 2.0;
        }
        let mut grad = vec![0.0; n];
        for (i, gi) in grad.iter_mut().enumerate() {
            let est = integrate_adaptive(
                |t: f64| {
                    let x = scale(y, t);
                    let w = (-self.h_value(&x)).exp() * t.powi(n as i32);
                    if w == 0.0 {
                        return 0.0;
                    }
                    let m = self.lp_support_gradient(&x).unwrap_or_else(|_| vec![0.0; n]);
                    w * m[i]
                },
                0.0,
                r,
                1e-9,
                1e-14 * g,
            );
            // ∇G = -∫ r^n e^{-h(ry)} ∇h(ry) dr;  ∇‖y‖ = -(1/n) G^{-1/n-1} ∇G
            *gi = (1.0 / n as f64) * g.powf(-1.0 / n as f64 - 1.0) * est.value;
        }
        Ok(grad)
    }

    fn sphere_nodes(&self, resolution: usize, phase: f64) -> Result<SphereGrid> {
        match self.dim() {
            1 => Ok(SphereGrid {
                nodes: vec![vec![1.0], vec![-1.0]],
                weights: vec![1.0, 1.0],
            }),
            2 | 3 => sphere_grid_with_phase(self.dim(), resolution, phase),
            n => Ok(sphere_sample(
                n,
                resolution,
                &mut rng::stream(resolution as u64, 0x5348, (phase * 4.0) as u32),
            )),
        }
    }

    /// `|K^{o,p}|` by the spherical route `(1/n) ∫ ‖u‖^{-n}` and the
    /// full-space route `(1/n!) ∫ e^{-h_{p,K}}`, cross-checked.
    pub fn lp_polar_volume(&self) -> Result<Estimate> {
        if !self.body.origin_interior() {
            return Err(Error::OriginNotInterior);
        }
        let a = self.polar_volume_spherical()?;
        let b = self.polar_volume_full_space()?;
        let diff = (a.value - b.value).abs();
        let budget = 5.0 * (a.error + b.error) + 1e-12 * a.value.abs();
        if diff > budget {
            return Err(Error::RouteDisagreement {
                first: a.value,
                second: b.value,
                budget,
            });
        }
        Ok(Estimate {
            value: a.value,
            error: a.error + diff,
            method: if a.method == Method::MonteCarlo || b.method == Method::MonteCarlo {
                Method::MonteCarlo
            } else {
                Method::Deterministic
            },
            samples: a.samples + b.samples,
        })
    }

    /// Both routes, for diagnostics.
    pub fn lp_polar_volume_routes(&self) -> Result<(Estimate, Estimate)> {
        if !self.body.origin_interior() {
            return Err(Error::OriginNotInterior);
        }
        Ok((self.polar_volume_spherical()?, self.polar_volume_full_space()?))
    }

    fn polar_volume_spherical(&self) -> Result<Estimate> {
        let n = self.dim();
        if self.p.is_infinite() && n <= 3 {
            let polar = self.body.polar(&vec![0.0; n])?;
            return Ok(Estimate::deterministic(polar.volume()?, 0.0, 1));
        }
        let res = self.resolution;
        // on the 3-sphere grid the angular error dominates far above 1e-8
        let tol = if n == 3 { self.tol.max(1e-8) } else { self.tol };
        let eval = |grid: &SphereGrid| -> Result<(f64, f64)> {
            let mut total = 0.0;
            let mut err = 0.0;
            for (u, w) in grid.nodes.iter().zip(&grid.weights) {
                let r = self.radial_integral_tol(u, tol)?;
                let g = r.powf(-1.0 / n as f64);
                let v = g.value.powi(-(n as i32));
                total += w * v / n as f64;
                err += w * v * n as f64 * g.error / g.value / n as f64;
            }
            Ok((total, err))
        };
        if n >= 4 {
            return self.mc_sphere_route(|u| {
                let g = self.lp_gauge(u)?;
                Ok(g.value.powi(-(n as i32)) / n as f64)
            });
        }
        let (fine, ferr) = eval(&self.sphere_nodes(res, 0.0)?)?;
        let grid_err = if n == 1 {
            0.0
        } else {
            (fine - eval(&self.sphere_nodes(res / 2, 0.0)?)?.0).abs()
        };
        Ok(Estimate::deterministic(fine, ferr + grid_err, res as u64))
    }

    fn mc_sphere_route(&self, f: impl Fn(&[f64]) -> Result<f64>) -> Result<Estimate> {
        let n = self.dim();
        let grid = self.sphere_nodes(self.resolution, 0.0)?;
        let vals: Vec<f64> = grid.nodes.iter().map(|u| f(u)).collect::<Result<_>>()?;
        let m = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / m;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let area = crate::quadrature::sphere_area(n);
        Ok(Estimate {
            value: area * mean,
            error: area * 1.96 * (var / m).sqrt(),
            method: Method::MonteCarlo,
            samples: vals.len() as u64,
        })
    }

    /// `(1/n!) ∫_0^∞ r^{n-1} e^{-h(r u)} dr` by generalized Gauss–Laguerre
    /// after the substitution `r = t / h_K(u)`; returns value and error.
    fn laguerre_shell(&self, u: &[f64], rules: &[(Vec<f64>, Vec<f64>); 2]) -> (f64, f64) {
        let n = self.dim();
        let hk = self.body.support(u);
        let uh = scale(u, 1.0 / hk);
        let q = |t: f64| (t - self.h_value(&scale(&uh, t))).exp();
        let eval = |(x, w): &(Vec<f64>, Vec<f64>)| -> f64 {
            x.iter().zip(w).map(|(t, wt)| wt * q(*t)).sum()
        };
        let coarse = eval(&rules[0]);
        let fine = eval(&rules[1]);
        let s = hk.powi(-(n as i32)) / factorial(n);
        (fine * s, (fine - coarse).abs() * s + 1e-14 * fine * s)
    }

    fn polar_volume_full_space(&self) -> Result<Estimate> {
        let n = self.dim();
        if self.p.is_infinite() {
            let f = |u: &[f64]| self.body.support(u).powi(-(n as i32)) / n as f64;
            if n == 1 {
                return Ok(Estimate::exact(f(&[1.0]) + f(&[-1.0])));
            }
            if n == 2 && !self.body.is_ball() {
                return Ok(self.circle_integral_with_kinks(f));
            }
            if n >= 4 {
                return self.mc_sphere_route(|u| Ok(f(u)));
            }
            let res = self.resolution;
            let fine = self.sphere_nodes(res, 0.5)?.integrate(f);
            let coarse = self.sphere_nodes(res / 2, 0.5)?.integrate(f);
            return Ok(Estimate::deterministic(fine, (fine - coarse).abs(), res as u64));
        }
        let rules = [
            gauss_laguerre(32, n as f64 - 1.0),
            gauss_laguerre(48, n as f64 - 1.0),
        ];
        if n >= 4 {
            return self.mc_sphere_route(|u| Ok(self.laguerre_shell(u, &rules).0));
        }
        let res = self.resolution;
        let eval = |grid: &SphereGrid| -> (f64, f64) {
            let mut total = 0.0;
            let mut err = 0.0;
            for (u, w) in grid.nodes.iter().zip(&grid.weights) {
                let (v, e) = self.laguerre_shell(u, &rules);
                total += w * v;
                err += w * e;
            }
            (total, err)
        };
        let (fine, ferr) = eval(&self.sphere_nodes(res, 0.5)?);
        let grid_err = if n == 1 {
            0.0
        } else {
            (fine - eval(&self.sphere_nodes(res / 2, 0.5)?).0).abs()
        };
        Ok(Estimate::deterministic(fine, ferr + grid_err, res as u64))
    }

    /// `∫_{S^1} f` split at the edge-normal angles of a polygon, where the
    /// support function has kinks.
    fn circle_integral_with_kinks(&self, f: impl Fn(&[f64]) -> f64) -> Estimate {
        let p = self.body.as_polytope().expect("polygon");
        let mut angles: Vec<f64> = p.normals().iter().map(|a| a[1].atan2(a[0])).collect();
        angles.sort_by(f64::total_cmp);
        let mut total = Estimate::exact(0.0);
        for i in 0..angles.len() {
            let a = angles[i];
            let b = if i + 1 < angles.len() {
                angles[i + 1]
            } else {
                angles[0] + 2.0 * std::f64::consts::PI
            };
            let part = integrate_adaptive(|t| f(&[t.cos(), t.sin()]), a, b, 1e-13, 0.0);
            total = total.add(part);
        }
        total
    }

    /// Inner and outer polytopes approximating `K^{o,p}`.
    pub fn lp_polar_approx(&self, resolution: usize) -> Result<LpPolarApprox> {
        let n = self.dim();
        if !(2..=3).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        if !self.body.origin_interior() {
            return Err(Error::OriginNotInterior);
        }
        let grid = sphere_grid(n, resolution)?;
        let mut radii = Vec::with_capacity(grid.len());
        let mut points = Vec::with_capacity(grid.len());
        let mut normals = Vec::with_capacity(grid.len());
        let mut offsets = Vec::with_capacity(grid.len());
        for u in &grid.nodes {
            let g = self.lp_gauge(u)?.value;
            let x = scale(u, 1.0 / g);
            let grad = self.lp_gauge_gradient(&x)?;
            // tangent halfspace <∇‖x‖, z> <= ‖x‖ = 1
            offsets.push(dot(&grad, &x));
            normals.push(grad);
            radii.push(1.0 / g);
            points.push(x);
        }
        let inner = crate::bodies::hull(&points)?;
        let outer = ConvexBody::HPoly(intersect_halfspaces(&normals, &offsets)?);
        Ok(LpPolarApprox {
            grid,
            radii,
            inner,
            outer,
        })
    }

    /// `(n-1)`-volume of the section `K^{o,p}(s)` in direction `v`, as the
    /// midpoint of the inner/outer bracket.
    ///
    /// In the plane the section is a segment whose endpoints are found by
    /// root-finding on the gauge; at `p = ∞` the polar polytope is sliced
    /// exactly.
    pub fn lp_polar_section_volume(
        &self,
        v: &Direction,
        s: f64,
        resolution: usize,
    ) -> Result<Estimate> {
        if !self.body.origin_interior() {
            return Err(Error::OriginNotInterior);
        }
        if self.p.is_infinite() && !self.body.is_ball() {
            let polar = self.body.polar(&vec![0.0; self.dim()])?;
            let vol = polar.section(v, s)?.volume()?;
            return Ok(Estimate::deterministic(vol, 1e-13 * vol, 1));
        }
        if self.dim() == 2 {
            let seg = self.section_segment(v, s)?;
            return Ok(seg.length());
        }
        let approx = self.lp_polar_approx(resolution)?;
        approx.section_volume(v, s)
    }

    /// The section `K^{o,p}(s) = {x' : x' + s v in K^{o,p}}` of a planar
    /// body, as an interval in the coordinate of `v^perp`.
    pub fn section_segment(&self, v: &Direction, s: f64) -> Result<Segment> {
        if self.dim() != 2 {
            return Err(Error::UnsupportedDimension(self.dim()));
        }
        if !self.body.origin_interior() {
            return Err(Error::OriginNotInterior);
        }
        let basis = crate::bodies::linalg::orthonormal_complement(v.unit());
        let b = basis[0].clone();
        let point = |x: f64| axpy(&scale(v.unit(), s), x, &b);
        let phi = |x: f64| -> Result<Estimate> { self.lp_gauge(&point(x)) };
        // a point of the section: the origin of the line if it lies inside,
        // otherwise the minimizer of the gauge along the line
        let mut center = 0.0;
        let f0 = phi(0.0)?;
        if f0.value >= 1.0 {
            let mut r = 1.0;
            while phi(r)?.value < f0.value || phi(-r)?.value < f0.value {
                r *= 2.0;
                if r > 1e9 {
                    return Err(Error::EmptySection);
                }
            }
            let ratio = 0.5 * (5f64.sqrt() - 1.0);
            let (mut a, mut c) = (-r, r);
            let mut x1 = c - ratio * (c - a);
            let mut x2 = a + ratio * (c - a);
            let mut f1 = phi(x1)?.value;
            let mut f2 = phi(x2)?.value;
            while c - a > 1e-12 * r {
                if f1 <= f2 {
                    c = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = c - ratio * (c - a);
                    f1 = phi(x1)?.value;
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + ratio * (c - a);
                    f2 = phi(x2)?.value;
                }
                if f1.min(f2) < 1.0 {
                    break;
                }
            }
            center = if f1 <= f2 { x1 } else { x2 };
            if phi(center)?.value >= 1.0 {
                return Err(Error::EmptySection);
            }
        }
        let right = self.boundary_root(&phi, center, 1.0)?;
        let left = self.boundary_root(&phi, center, -1.0)?;
        Ok(Segment { left, right })
    }

    /// Root of `phi = 1` on the ray from `center` (where `phi < 1`) in
    /// direction `sign`, by the Illinois variant of regula falsi.
    fn boundary_root(
        &self,
        phi: &impl Fn(f64) -> Result<Estimate>,
        center: f64,
        sign: f64,
    ) -> Result<Estimate> {
        let mut step = 1.0;
        let mut a = center;
        let mut fa = phi(a)?.value - 1.0;
        let mut b = center + sign * step;
        let mut fb = phi(b)?.value - 1.0;
        while fb < 0.0 {
            a = b;
            fa = fb;
            step *= 2.0;
            b = center + sign * step;
            fb = phi(b)?.value - 1.0;
            if step > 1e9 {
                return Err(Error::RadialDivergence);
            }
        }
        let mut side = 0;
        let mut root = b;
        for _ in 0..200 {
            root = (a * fb - b * fa) / (fb - fa);
            let fr = phi(root)?.value - 1.0;
            if fr == 0.0 || (b - a).abs() <= 1e-14 * (1.0 + root.abs()) {
                break;
            }
            if fr < 0.0 {
                a = root;
                fa = fr;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            } else {
                b = root;
                fb = fr;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
            if (b - a).abs() <= 1e-13 * (1.0 + root.abs()) {
                break;
            }
        }
        // gauge error translated to position through the slope of the gauge
        let g = phi(root)?;
        let h = 1e-6 * (1.0 + root.abs());
        let slope = ((phi(root + h)?.value - phi(root - h)?.value) / (2.0 * h)).abs();
        let err = g.error / slope.max(1e-300) + (g.value - 1.0).abs() / slope.max(1e-300)
            + 1e-14 * (1.0 + root.abs());
        Ok(Estimate::deterministic(root, err, 1))
    }

    /// `M_p(K) = |K| · |K^{o,p}|`.
    pub fn mahler_p(&self) -> Result<Estimate> {
        Ok(self.volume.mul(self.lp_polar_volume()?))
    }

    /// Ratios `h_K(u) / ‖u‖_{K^{o,p}}` over the directions: the radius of
    /// `K^{o,p}` relative to the radius of `K^o`.
    pub fn sandwich_margins(&self, directions: &[Vec<f64>]) -> Result<SandwichMargins> {
        let n = self.dim();
        let bar = self.body.barycenter()?;
        let off = norm(&bar);
        if off > 1e-9 * self.body.bounding_box().1.iter().fold(1.0f64, |m, x| m.max(x.abs())) {
            return Err(Error::BarycenterNotOrigin(off));
        }
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut error = 0.0f64;
        for u in directions {
            if u.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: u.len(),
                });
            }
            let hk = self.body.support(u);
            let g = self.lp_gauge(u)?;
            let ratio = hk / g.value;
            error = error.max(ratio * g.error / g.value);
            min = min.min(ratio);
            max = max.max(ratio);
        }
        Ok(SandwichMargins { min, max, error })
    }
}

/// A planar section of an L_p polar body: an interval in the coordinate of
/// `v^perp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub left: Estimate,
    pub right: Estimate,
}

impl Segment {
    pub fn length(&self) -> Estimate {
        self.right.sub(self.left)
    }

    /// Hausdorff distance to another interval, with its error bound.
    pub fn hausdorff(&self, other: &Segment) -> Estimate {
        let dl = (self.left.value - other.left.value).abs();
        let dr = (self.right.value - other.right.value).abs();
        let err = (self.left.error + other.left.error).max(self.right.error + other.right.error);
        Estimate::deterministic(dl.max(dr), err, 1)
    }

    pub fn negate(&self) -> Segment {
        Segment {
            left: self.right.scale(-1.0),
            right: self.left.scale(-1.0),
        }
    }
}

/// Extreme radius ratios of `K^{o,p}` against `K^o`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichMargins {
    pub min: f64,
    pub max: f64,
    pub error: f64,
}

/// Polytope bracket of an L_p polar body.
#[derive(Debug, Clone)]
pub struct LpPolarApprox {
    pub grid: SphereGrid,
    pub radii: Vec<f64>,
    pub inner: ConvexBody,
    pub outer: ConvexBody,
}

impl LpPolarApprox {
    pub fn section_volume(&self, v: &Direction, s: f64) -> Result<Estimate> {
        let outer = match self.outer.section(v, s) {
            Ok(b) => b.volume()?,
            Err(Error::EmptySection) => return Err(Error::EmptySection),
            Err(e) => return Err(e),
        };
        let inner = match self.inner.section(v, s) {
            Ok(b) => b.volume()?,
            Err(Error::EmptySection) => 0.0,
            Err(e) => return Err(e),
        };
        let hi = outer.max(inner);
        Ok(Estimate::deterministic(
            0.5 * (inner + hi),
            0.5 * (hi - inner) + 1e-12 * hi,
            self.radii.len() as u64,
        ))
    }

    /// Volumes of the inner and outer polytopes.
    pub fn volumes(&self) -> Result<(f64, f64)> {
        Ok((self.inner.volume()?, self.outer.volume()?))
    }
}

/// `M_p(B_2^n) = |B| · |B^{o,p}|` by rotational symmetry: the L_p polar
/// gauge of the ball is a constant multiple of the Euclidean norm.
pub fn mahler_p_ball(n: usize, p: PParam) -> Result<Estimate> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let vol = ball_volume(n);
    if p.is_infinite() {
        return Ok(Estimate::exact(vol * vol));
    }
    let ball = ConvexBody::ball(vec![0.0; n], 1.0)?;
    let eval = LpEvaluator::with_options(ball, p, 1e-12, 0, 0)?;
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let g = eval.lp_gauge(&e1)?;
    Ok(g.powf(-(n as f64)).scale(vol * vol))
}

/// `|(K - z)^o|` computed directly and as `∫_{K^o} (1 - <z,x>)^{-(n+1)} dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TranslatePolar {
    pub direct: Estimate,
    pub integral: Estimate,
}

/// Both sides of the translated-polar volume identity; fails with
/// `IdentityViolation` when they differ by more than five error budgets.
pub fn translate_polar_volume(k: &ConvexBody, z: &[f64]) -> Result<TranslatePolar> {
    let n = k.dim();
    if z.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: z.len(),
        });
    }
    if !k.origin_interior() {
        return Err(Error::OriginNotInterior);
    }
    if !k.interior_contains(z) {
        return Err(Error::CenterNotInterior);
    }
    let neg: Vec<f64> = z.iter().map(|x| -x).collect();
    let direct_val = k.translate(&neg).polar(&vec![0.0; n])?.volume()?;
    let direct = Estimate::deterministic(direct_val, 1e-14 * direct_val, 1);
    let polar = k.polar(&vec![0.0; n])?;
    let integral = match &polar {
        ConvexBody::Ball(b) => {
            // radial form over the centered ball
            let r = b.radius;
            let zn = norm(z);
            let f = |t: f64| {
                let sphere = crate::quadrature::sphere_area(n - 1).max(1.0);
                let inner = integrate_adaptive(
                    |th: f64| {
                        th.sin().powi(n as i32 - 2) * (1.0 - zn * t * th.cos()).powi(-(n as i32 + 1))
                    },
                    0.0,
                    std::f64::consts::PI,
                    1e-13,
                    0.0,
                )
                .value;
                sphere * inner * t.powi(n as i32 - 1)
            };
            if n == 1 {
                integrate_adaptive(|t| (1.0 - z[0] * t).powi(-2), -r, r, 1e-13, 0.0)
            } else {
                integrate_adaptive(f, 0.0, r, 1e-12, 0.0)
            }
        }
        _ => {
            let mesh = triangulate(&polar)?;
            let f = |x: &[f64]| (1.0 - dot(z, x)).powi(-(n as i32 + 1));
            let mut total = Estimate::exact(0.0);
            for s in &mesh.simplices {
                total = total.add(integrate_simplex(&f, s, 1e-12));
            }
            total
        }
    };
    let budget = 5.0 * (direct.error + integral.error) + 1e-12 * direct.value;
    if (direct.value - integral.value).abs() > budget {
        return Err(Error::IdentityViolation {
            lhs: direct.value,
            rhs: integral.value,
            budget,
        });
    }
    Ok(TranslatePolar { direct, integral })
}

/// Infimal convolution `inf_{x + y = z} ‖x‖_A + ‖y‖_B`, minimized by nested
/// golden-section search over the coordinates of `y`.
pub fn inf_conv_gauge(a: &ConvexBody, b: &ConvexBody, z: &[f64]) -> Result<f64> {
    let n = a.dim();
    if b.dim() != n || z.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: z.len(),
        });
    }
    if !a.origin_interior() || !b.origin_interior() {
        return Err(Error::OriginNotInterior);
    }
    let ga = a.gauge(z)?;
    if ga == 0.0 {
        return Ok(0.0);
    }
    // the objective is at least ‖y‖_B and equals ‖z‖_A at y = o,
    // so minimizers lie in ‖z‖_A · B
    let (lo, hi) = b.bounding_box();
    let lo = scale(&lo, ga);
    let hi = scale(&hi, ga);
    let objective = |y: &[f64]| -> f64 {
        a.gauge(&sub(z, y)).unwrap_or(f64::INFINITY) + b.gauge(y).unwrap_or(f64::INFINITY)
    };
    let mut y = vec![0.0; n];
    let best = nested_golden(&objective, &mut y, 0, &lo, &hi);
    Ok(best.min(ga))
}

fn nested_golden(
    f: &impl Fn(&[f64]) -> f64,
    y: &mut Vec<f64>,
    axis: usize,
    lo: &[f64],
    hi: &[f64],
) -> f64 {
    let n = y.len();
    let eval = |t: f64, y: &mut Vec<f64>| -> f64 {
        y[axis] = t;
        if axis + 1 == n {
            f(y)
        } else {
            nested_golden(f, y, axis + 1, lo, hi)
        }
    };
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo[axis], hi[axis]);
    let width = (b - a).abs().max(1e-300);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = eval(c, y);
    let mut fd = eval(d, y);
    while (b - a) > 1e-12 * width {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = eval(c, y);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = eval(d, y);
        }
    }
    let t = 0.5 * (a + b);
    let v = eval(t, y);
    v.min(fc).min(fd)
}

/// `max(‖x‖_A, ‖y‖_B)`, the gauge of the product body `A × B`.
pub fn product_gauge(a: &ConvexBody, b: &ConvexBody, x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(a.gauge(x)?.max(b.gauge(y)?))
}

/// Direction sets for grid checks: equispaced on the circle, a Fibonacci
/// spiral on the two-sphere, `±1` on the line.
pub fn direction_set(n: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    use std::f64::consts::PI;
    match n {
        1 => Ok(vec![vec![1.0], vec![-1.0]]),
        2 => Ok((0..count)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            Ok((0..count)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * k as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect())
        }
        _ => Err(Error::UnsupportedDimension(n)),
    }
}
