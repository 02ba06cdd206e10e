//! Deterministic and Monte Carlo integration.

use std::collections::BinaryHeap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::bodies::linalg::{dot, norm, sub};
use crate::bodies::{simplex_volume, ConvexBody};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Deterministic,
    MonteCarlo,
}

/// A value with an absolute error bound (deterministic) or a 95%
/// confidence radius (Monte Carlo).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub method: Method,
    pub samples: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            error: 0.0,
            method: Method::Deterministic,
            samples: 0,
        }
    }

    pub fn deterministic(value: f64, error: f64, cells: u64) -> Self {
        Estimate {
            value,
            error,
            method: Method::Deterministic,
            samples: cells,
        }
    }

    fn combine_method(a: Method, b: Method) -> Method {
        if a == Method::MonteCarlo || b == Method::MonteCarlo {
            Method::MonteCarlo
        } else {
            Method::Deterministic
        }
    }

    pub fn scale(self, s: f64) -> Self {
        Estimate {
            value: self.value * s,
            error: self.error * s.abs(),
            ..self
        }
    }

    pub fn add(self, o: Estimate) -> Self {
        Estimate {
            value: self.value + o.value,
            error: self.error + o.error,
            method: Self::combine_method(self.method, o.method),
            samples: self.samples + o.samples,
        }
    }

    pub fn sub(self, o: Estimate) -> Self {
        self.add(o.scale(-1.0))
    }

    /// First-order product rule.
    pub fn mul(self, o: Estimate) -> Self {
        Estimate {
            value: self.value * o.value,
            error: self.error * o.value.abs() + o.error * self.value.abs() + self.error * o.error,
            method: Self::combine_method(self.method, o.method),
            samples: self.samples + o.samples,
        }
    }

    /// `value^e` with the error bounded over the interval `value ± error`.
    pub fn powf(self, e: f64) -> Self {
        let v = self.value.powf(e);
        let lo = (self.value - self.error).max(0.0).powf(e);
        let hi = (self.value + self.error).powf(e);
        let err = (v - lo).abs().max((hi - v).abs());
        Estimate {
            value: v,
            error: if err.is_finite() { err } else { f64::INFINITY },
            ..self
        }
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Volume of the Euclidean unit ball in `R^n`.
pub fn ball_volume(n: usize) -> f64 {
    // V_n = 2π/n · V_{n-2}
    let mut v = if n.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if n.is_multiple_of(2) { 2 } else { 3 };
    while k <= n {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

/// Surface measure of `S^{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    n as f64 * ball_volume(n)
}

pub fn euler_beta(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

// 15-point Kronrod nodes with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Adaptive Gauss–Kronrod (7/15) quadrature on `[a, b]`.
///
/// Stops when the summed `|K15 - G7|` differences fall below
/// `max(abs_tol, rel_tol * |I|)`; that sum is reported as the error.
pub fn integrate_adaptive(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Estimate {
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, error: e });
    let mut total = v;
    let mut err = e;
    let mut evals = 15u64;
    while err > abs_tol.max(rel_tol * total.abs()) && evals < 15 * 4000 {
        let p = heap.pop().unwrap();
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(&f, p.a, m);
        let (v2, e2) = gk15(&f, m, p.b);
        evals += 30;
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Panel { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, error: e2 });
    }
    // resum to avoid drift from incremental updates
    let total: f64 = heap.iter().map(|p| p.value).sum();
    let err: f64 = heap.iter().map(|p| p.error).sum();
    Estimate::deterministic(total, err + 1e-15 * total.abs(), evals)
}

/// `∫_0^∞ r^{n-1} f(r) dr` for log-concave, eventually decaying `f`.
///
/// `c > 0` is a lower bound on the eventual decay rate of `f`. The range is
/// doubled until the secant slope of `log f` beyond `R` is at most `-c`;
/// log-concavity then gives `f(r) <= f(R) e^{-c (r - R)}` and the tail is
/// bounded in closed form.
pub fn integrate_radial(f: impl Fn(f64) -> f64, n: usize, c: f64, tol: f64) -> Result<Estimate> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::NoDecayBound(c));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let g = |r: f64| r.powi(n as i32 - 1) * f(r);
    let mut r = (n as f64 / c).max(1e-12);
    // integral over [0, covered], extended piece by piece as r doubles
    let mut acc = Estimate::exact(0.0);
    let mut covered = 0.0;
    let extend = |acc: &mut Estimate, covered: &mut f64, to: f64| {
        let abs = 0.5 * tol * acc.value.abs();
        let piece = integrate_adaptive(g, *covered, to, tol * 0.5, abs);
        *acc = acc.add(piece);
        *covered = to;
    };
    for _ in 0..80 {
        let (f1, f2) = (f(r), f(2.0 * r));
        if f2 == 0.0 {
            extend(&mut acc, &mut covered, 2.0 * r);
            return Ok(acc);
        }
        if f1 > 0.0 && (f2.ln() - f1.ln()) / r <= -c {
            extend(&mut acc, &mut covered, 2.0 * r);
            let tail = radial_tail(f2, 2.0 * r, n, c);
            if tail <= tol * acc.value.abs() {
                return Ok(Estimate::deterministic(acc.value, acc.error + tail, acc.samples));
            }
        }
        r *= 2.0;
        if r > 1e12 / c {
            return Err(Error::RadialDivergence);
        }
    }
    Err(Error::RadialDivergence)
}

/// `∫_R^∞ r^{n-1} fr e^{-c (r - R)} dr` in closed form.
fn radial_tail(fr: f64, r: f64, n: usize, c: f64) -> f64 {
    let m = n - 1;
    let mut sum = 0.0;
    let mut falling = 1.0;
    for k in 0..=m {
        sum += falling * r.powi((m - k) as i32) / c.powi(k as i32 + 1);
        falling *= (m - k) as f64;
    }
    fr * sum
}

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    golub_welsch(j, 2.0)
}

/// Nodes and weights of the generalized Gauss–Laguerre rule for the weight
/// `t^alpha e^{-t}` on `[0, ∞)`.
pub fn gauss_laguerre(m: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        let kf = k as f64;
        j[(k, k)] = 2.0 * kf + alpha + 1.0;
        if k > 0 {
            let b = (kf * (kf + alpha)).sqrt();
            j[(k, k - 1)] = b;
            j[(k - 1, k)] = b;
        }
    }
    golub_welsch(j, gamma(alpha + 1.0))
}

fn golub_welsch(j: DMatrix<f64>, mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..eig.eigenvalues.len())
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Divided difference `exp[a_0, ..., a_m]` of the exponential, nodes may repeat.
///
/// Clusters of spread at most one are summed by the Taylor series of the
/// divided difference; wider ranges use the recurrence, whose denominators
/// are then at least one.
pub fn exp_divided_difference(nodes: &[f64]) -> f64 {
    const SMALL: usize = 6;
    let m = nodes.len();
    if m <= SMALL {
        let mut a = [0.0; SMALL];
        a[..m].copy_from_slice(nodes);
        let a = &mut a[..m];
        a.sort_unstable_by(f64::total_cmp);
        if a[m - 1] - a[0] <= 1.0 {
            return taylor_divided_difference(a);
        }
        let mut memo = [f64::NAN; SMALL * SMALL];
        return divided_range(a, 0, m - 1, &mut memo);
    }
    let mut a = nodes.to_vec();
    a.sort_by(f64::total_cmp);
    if a[m - 1] - a[0] <= 1.0 {
        return taylor_divided_difference(&a);
    }
    // memo[i * m + j] = exp[a_i..a_j], filled only where the recurrence needs it
    let mut memo = vec![f64::NAN; m * m];
    divided_range(&a, 0, m - 1, &mut memo)
}

fn divided_range(a: &[f64], i: usize, j: usize, memo: &mut [f64]) -> f64 {
    let m = a.len();
    let cached = memo[i * m + j];
    if !cached.is_nan() {
        return cached;
    }
    let v = if a[j] - a[i] <= 1.0 {
        taylor_divided_difference(&a[i..=j])
    } else {
        (divided_range(a, i + 1, j, memo) - divided_range(a, i, j - 1, memo)) / (a[j] - a[i])
    };
    memo[i * m + j] = v;
    v
}

fn taylor_divided_difference(a: &[f64]) -> f64 {
    let m = a.len() - 1;
    let c = a.iter().sum::<f64>() / a.len() as f64;
    let dmax = a.iter().fold(0.0f64, |acc, x| acc.max((x - c).abs()));
    // term k is at most dmax^k / (m! k!) since |h_k| <= C(m+k, k) dmax^k;
    // the sum itself is at least e^{-dmax} / m!
    let floor = 1e-17 * (-dmax).exp();
    let mut kmax = 0;
    let mut bound = 1.0;
    while bound > floor && kmax < 60 {
        kmax += 1;
        bound *= dmax / kmax as f64;
    }
    // complete homogeneous polynomials h_k of the centered nodes
    let mut h = [0.0f64; 61];
    h[0] = 1.0;
    for x in a.iter().map(|x| x - c) {
        for k in 1..=kmax {
            h[k] += x * h[k - 1];
        }
    }
    let mut sum = 0.0;
    let mut inv_fact = 1.0 / factorial(m);
    for (k, hk) in h.iter().enumerate().take(kmax + 1) {
        if k > 0 {
            inv_fact /= (m + k) as f64;
        }
        sum += hk * inv_fact;
    }
    c.exp() * sum
}

/// `∫_S e^{<x, w>} dx` over a nondegenerate simplex given by its vertices.
pub fn integrate_exp_simplex(simplex: &[Vec<f64>], w: &[f64]) -> f64 {
    let n = simplex.len() - 1;
    let vals: Vec<f64> = simplex.iter().map(|v| dot(v, w)).collect();
    factorial(n) * simplex_volume(simplex) * exp_divided_difference(&vals)
}

/// Shifted form: `e^{-shift} ∫_S e^{<x, w>} dx` and its first moment.
pub(crate) fn exp_simplex_with_moment(
    simplex: &[Vec<f64>],
    w: &[f64],
    shift: f64,
    moment: bool,
) -> (f64, Vec<f64>) {
    let n = simplex.len() - 1;
    let vals: Vec<f64> = simplex.iter().map(|v| dot(v, w) - shift).collect();
    let scale = factorial(n) * simplex_volume(simplex);
    let base = scale * exp_divided_difference(&vals);
    let mut first = vec![0.0; simplex[0].len()];
    if moment {
        let mut nodes = vals.clone();
        nodes.push(0.0);
        for (i, v) in simplex.iter().enumerate() {
            nodes[n + 1] = vals[i];
            let c = scale * exp_divided_difference(&nodes);
            for (f, x) in first.iter_mut().zip(v) {
                *f += c * x;
            }
        }
    }
    (base, first)
}

/// A triangulation of a body into full-dimensional simplices.
#[derive(Debug, Clone)]
pub struct SimplexMesh {
    pub simplices: Vec<Vec<Vec<f64>>>,
    /// `n! |S|` per simplex.
    pub scales: Vec<f64>,
    pub total_volume: f64,
}

impl SimplexMesh {
    /// `e^{-shift} ∫ e^{<x, w>} dx` over the whole mesh.
    pub fn exp_integral(&self, w: &[f64], shift: f64) -> f64 {
        let mut vals = [0.0; 8];
        self.simplices
            .iter()
            .zip(&self.scales)
            .map(|(s, c)| {
                if s.len() > vals.len() {
                    let v: Vec<f64> = s.iter().map(|x| dot(x, w) - shift).collect();
                    return c * exp_divided_difference(&v);
                }
                for (v, x) in vals.iter_mut().zip(s) {
                    *v = dot(x, w) - shift;
                }
                c * exp_divided_difference(&vals[..s.len()])
            })
            .sum()
    }
}

/// Fan triangulation of a polytope from its barycenter; a simplex is
/// returned as itself.
pub fn triangulate(k: &ConvexBody) -> Result<SimplexMesh> {
    let p = k
        .as_polytope()
        .ok_or(Error::BallUnsupported("triangulate"))?;
    let n = k.dim();
    let simplices = if p.vertices().len() == n + 1 {
        vec![p.vertices().to_vec()]
    } else {
        p.cone_simplices(&p.barycenter()?)?
    };
    let scales: Vec<f64> = simplices.iter().map(|s| factorial(n) * simplex_volume(s)).collect();
    let total_volume = scales.iter().sum::<f64>() / factorial(n);
    Ok(SimplexMesh {
        simplices,
        scales,
        total_volume,
    })
}

/// `∫_0^π e^{a (cos θ - 1)} sin^n θ dθ`, the radial profile of a ball.
pub(crate) fn ball_profile(a: f64, n: usize) -> Estimate {
    integrate_adaptive(
        |t: f64| (a * (t.cos() - 1.0)).exp() * t.sin().powi(n as i32),
        0.0,
        std::f64::consts::PI,
        1e-13,
        0.0,
    )
}

/// Natural log of `∫_K e^{<x,w>} dx` together with a relative error bound.
///
/// Deterministic; polytopes are summed over `mesh` when given.
pub fn ln_exp_integral(
    k: &ConvexBody,
    mesh: Option<&SimplexMesh>,
    w: &[f64],
) -> Result<(f64, f64)> {
    match k {
        ConvexBody::Ball(b) => {
            let n = b.center.len();
            let a = b.radius * norm(w);
            let prof = ball_profile(a, n);
            let lead = if n == 1 {
                0.0
            } else {
                ball_volume(n - 1).ln()
            };
            let ln = dot(&b.center, w) + n as f64 * b.radius.ln() + lead + a + prof.value.ln();
            Ok((ln, prof.error / prof.value))
        }
        _ => {
            let owned;
            let mesh = match mesh {
                Some(m) => m,
                None => {
                    owned = triangulate(k)?;
                    &owned
                }
            };
            let shift = k.support(w);
            let sum = mesh.exp_integral(w, shift);
            Ok((sum.ln() + shift, 1e-13))
        }
    }
}

/// `∫_K e^{<x, w>} dx`.
pub fn integrate_exp_body(k: &ConvexBody, w: &[f64]) -> Result<Estimate> {
    if k.dim() > 3 && !k.is_ball() {
        return integrate_exp_body_mc(k, w, 200_000, &mut rng::stream(0, 0xe1, 0));
    }
    let (ln, rel) = ln_exp_integral(k, None, w)?;
    let v = ln.exp();
    Ok(Estimate::deterministic(v, v * rel, 1))
}

/// Monte Carlo estimate of `∫_K e^{<x, w>} dx` by rejection from the bounding box.
pub fn integrate_exp_body_mc(
    k: &ConvexBody,
    w: &[f64],
    samples: u64,
    stream: &mut Stream,
) -> Result<Estimate> {
    let (lo, hi) = k.bounding_box();
    mc_integral(
        |x| k.contains(x, 0.0),
        &lo,
        &hi,
        |x| dot(x, w).exp(),
        samples,
        stream,
    )
}

/// Rejection-sampled Monte Carlo integral of `f` over a region inside a box.
pub fn mc_integral(
    inside: impl Fn(&[f64]) -> bool,
    lo: &[f64],
    hi: &[f64],
    f: impl Fn(&[f64]) -> f64,
    samples: u64,
    stream: &mut Stream,
) -> Result<Estimate> {
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let box_vol: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
    let mut x = vec![0.0; lo.len()];
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    let mut hits = 0u64;
    for _ in 0..samples {
        for ((xi, a), b) in x.iter_mut().zip(lo).zip(hi) {
            *xi = stream.gen_range(*a..=*b);
        }
        if inside(&x) {
            let v = f(&x);
            sum += v;
            sum2 += v * v;
            hits += 1;
        }
    }
    if hits == 0 {
        return Err(Error::ZeroAcceptance);
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let var = (sum2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    Ok(Estimate {
        value: mean * box_vol,
        error: 1.96 * var.sqrt() / nf.sqrt() * box_vol,
        method: Method::MonteCarlo,
        samples,
    })
}

/// Quadrature nodes on the unit sphere.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereGrid {
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(u, w)| w * f(u))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Sphere quadrature: the trapezoid rule on the circle for `n = 2`
/// (`resolution` equispaced angles), and for `n = 3` a product of
/// `resolution` Gauss–Legendre nodes in the height with `2 * resolution`
/// equispaced longitudes, exact for spherical polynomials of degree below
/// `2 * resolution`.
pub fn sphere_grid(n: usize, resolution: usize) -> Result<SphereGrid> {
    sphere_grid_with_phase(n, resolution, 0.0)
}

/// As [`sphere_grid`], with angular nodes shifted by `phase` grid steps.
pub fn sphere_grid_with_phase(n: usize, resolution: usize, phase: f64) -> Result<SphereGrid> {
    use std::f64::consts::PI;
    if resolution == 0 {
        return Err(Error::InvalidParameter("resolution must be positive".into()));
    }
    match n {
        2 => {
            let step = 2.0 * PI / resolution as f64;
            let nodes = (0..resolution)
                .map(|k| {
                    let t = step * (k as f64 + phase);
                    vec![t.cos(), t.sin()]
                })
                .collect();
            Ok(SphereGrid {
                nodes,
                weights: vec![step; resolution],
            })
        }
        3 => {
            let (zs, wz) = gauss_legendre(resolution);
            let m = 2 * resolution;
            let step = 2.0 * PI / m as f64;
            let mut nodes = Vec::with_capacity(resolution * m);
            let mut weights = Vec::with_capacity(resolution * m);
            for (z, wzi) in zs.iter().zip(&wz) {
                let rho = (1.0 - z * z).max(0.0).sqrt();
                for k in 0..m {
                    let t = step * (k as f64 + phase);
                    nodes.push(vec![rho * t.cos(), rho * t.sin(), *z]);
                    weights.push(wzi * step);
                }
            }
            Ok(SphereGrid { nodes, weights })
        }
        _ => Err(Error::UnsupportedDimension(n)),
    }
}

/// Equal-weight random directions on `S^{n-1}` (any dimension).
pub fn sphere_sample(n: usize, count: usize, stream: &mut Stream) -> SphereGrid {
    let w = sphere_area(n) / count as f64;
    SphereGrid {
        nodes: (0..count).map(|_| rng::unit_vector(stream, n)).collect(),
        weights: vec![w; count],
    }
}

/// Adaptive integral of `f` over a simplex by longest-edge bisection, using
/// collapsed Gauss–Legendre product rules of two orders as error indicator.
pub fn integrate_simplex(
    f: &impl Fn(&[f64]) -> f64,
    simplex: &[Vec<f64>],
    rel_tol: f64,
) -> Estimate {
    let rules = [collapsed_rule(simplex.len() - 1, 6), collapsed_rule(simplex.len() - 1, 10)];
    let mut stack = vec![(simplex.to_vec(), 0usize)];
    let mut total = 0.0;
    let mut err = 0.0;
    let mut cells = 0u64;
    let whole = apply_rule(f, simplex, &rules[1]).abs().max(f64::MIN_POSITIVE);
    while let Some((s, depth)) = stack.pop() {
        let lo = apply_rule(f, &s, &rules[0]);
        let hi = apply_rule(f, &s, &rules[1]);
        let local = (hi - lo).abs();
        let share = simplex_volume(&s) / simplex_volume(simplex);
        if local <= rel_tol * whole * share || depth >= 18 {
            total += hi;
            err += local;
            cells += 1;
            continue;
        }
        let (a, b) = bisect_longest(&s);
        stack.push((a, depth + 1));
        stack.push((b, depth + 1));
    }
    Estimate::deterministic(total, err, cells)
}

struct CollapsedRule {
    // barycentric-free form: points as affine combinations of the vertices
    coeffs: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

/// Duffy-collapsed product Gauss rule on the reference simplex; weights sum to one.
fn collapsed_rule(n: usize, order: usize) -> CollapsedRule {
    let (x, w) = gauss_legendre(order);
    let x01: Vec<f64> = x.iter().map(|t| 0.5 * (t + 1.0)).collect();
    let w01: Vec<f64> = w.iter().map(|t| 0.5 * t).collect();
    let mut coeffs = Vec::new();
    let mut weights = Vec::new();
    let total = order.pow(n as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut s = vec![0.0; n];
        let mut wt = factorial(n);
        for (k, sk) in s.iter_mut().enumerate() {
            let i = rem % order;
            rem /= order;
            *sk = x01[i];
            wt *= w01[i] * x01[i].powi((n - 1 - k) as i32);
        }
        // p = v0 + sum_k (prod_{j<=k} s_j) (v_{k+1} - v_k)
        let mut lam = vec![0.0; n + 1];
        lam[0] = 1.0;
        let mut prod = 1.0;
        for k in 0..n {
            prod *= s[k];
            lam[k] -= prod;
            lam[k + 1] += prod;
        }
        coeffs.push(lam);
        weights.push(wt);
    }
    CollapsedRule { coeffs, weights }
}

fn apply_rule(f: &impl Fn(&[f64]) -> f64, s: &[Vec<f64>], rule: &CollapsedRule) -> f64 {
    let vol = simplex_volume(s);
    let dim = s[0].len();
    let mut x = vec![0.0; dim];
    let mut acc = 0.0;
    for (lam, w) in rule.coeffs.iter().zip(&rule.weights) {
        x.iter_mut().for_each(|v| *v = 0.0);
        for (l, v) in lam.iter().zip(s) {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += l * vi;
            }
        }
        acc += w * f(&x);
    }
    acc * vol
}

fn bisect_longest(s: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut best = (0, 1);
    let mut len = -1.0;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let d = norm(&sub(&s[i], &s[j]));
            if d > len {
                len = d;
                best = (i, j);
            }
        }
    }
    let mid: Vec<f64> = s[best.0]
        .iter()
        .zip(&s[best.1])
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let mut a = s.to_vec();
    let mut b = s.to_vec();
    a[best.1] = mid.clone();
    b[best.0] = mid;
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    #[test]
    fn gauss_rules_integrate_polynomials() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-14);
        let (t, v) = gauss_laguerre(6, 2.0);
        let m: f64 = t.iter().zip(&v).map(|(t, w)| w * t.powi(3)).sum();
        // ∫ t^5 e^{-t} = 120
        assert!((m - 120.0).abs() < 1e-10);
    }

    #[test]
    fn divided_difference_matches_closed_forms() {
        assert!((exp_divided_difference(&[0.0, 1.0]) - (E - 1.0)).abs() < 1e-15);
        assert!((exp_divided_difference(&[2.0, 2.0]) - 2f64.exp()).abs() < 1e-14);
        let d = exp_divided_difference(&[0.0, 3.0, 7.0]);
        let expect = ((7f64.exp() - 3f64.exp()) / 4.0 - (3f64.exp() - 1.0) / 3.0) / 7.0;
        assert!((d / expect - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exp_simplex_anchors() {
        let seg = vec![vec![0.0], vec![1.0]];
        assert!((integrate_exp_simplex(&seg, &[1.0]) - (E - 1.0)).abs() < 1e-15);
        let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!((integrate_exp_simplex(&tri, &[0.0, 0.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn radial_gamma_integrals() {
        let a = integrate_radial(|r| (-r).exp(), 1, 1.0, 1e-12).unwrap();
        assert!((a.value - 1.0).abs() < 1e-12);
        let b = integrate_radial(|r| (-2.0 * r).exp(), 3, 2.0, 1e-12).unwrap();
        assert!((b.value - 0.25).abs() < 1e-12);
        assert_eq!(
            integrate_radial(|r| (-r).exp(), 1, 0.0, 1e-12),
            Err(Error::NoDecayBound(0.0))
        );
    }

    #[test]
    fn sphere_grids_integrate_moments() {
        let g = sphere_grid(2, 360).unwrap();
        assert!((g.integrate(|_| 1.0) - 2.0 * PI).abs() < 1e-12);
        let g3 = sphere_grid(3, 12).unwrap();
        assert!((g3.integrate(|u| u[2] * u[2]) - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!((g3.integrate(|_| 1.0) - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn special_functions() {
        assert!((ball_volume(2) - PI).abs() < 1e-14);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((euler_beta(1.0, 3.0) - 1.0 / 3.0).abs() < 1e-14);
    }
}
