//! Individual checks. Each takes fully specified inputs plus a short
//! description of how they were built, and returns records.

use std::f64::consts::SQRT_2;

use rand::Rng;

use super::CheckRecord;
use crate::bodies::linalg::{add, axpy, embed, norm, orthonormal_complement, scale, sub};
use crate::bodies::{hull, ConvexBody, Direction};
use crate::error::{Error, Result};
use crate::lp::{direction_set, inf_conv_gauge, mahler_p_ball, translate_polar_volume, LpEvaluator, PParam};
use crate::quadrature::{ball_volume, factorial, integrate_adaptive, integrate_simplex, triangulate, Estimate, Method};
use crate::rng;
use crate::shadow::{make_parallel_chord, steiner_speed, ShadowSystem};

/// Tolerances and Monte Carlo settings shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckContext {
    pub base_tol: f64,
    pub mc_samples: u64,
    pub seed: u64,
}

impl Default for CheckContext {
    fn default() -> Self {
        CheckContext {
            base_tol: 1e-6,
            mc_samples: 200_000,
            seed: 0,
        }
    }
}

impl CheckContext {
    pub fn evaluator(&self, body: ConvexBody, p: PParam) -> Result<LpEvaluator> {
        LpEvaluator::with_options(body, p, 1e-10, self.mc_samples, self.seed)
    }
}

pub(crate) fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", parts.join(","))
}

fn volume_estimate(k: &ConvexBody) -> Result<Estimate> {
    let v = k.volume()?;
    Ok(Estimate::deterministic(v, 1e-12 * v.abs(), 1))
}

fn origin(n: usize) -> Vec<f64> {
    vec![0.0; n]
}

/// Whether `K = -K` up to rounding.
pub fn is_symmetric(k: &ConvexBody) -> Result<bool> {
    match k {
        ConvexBody::Ball(b) => Ok(norm(&b.center) <= 1e-12 * b.radius),
        _ => {
            let extent = k.bounding_box().1.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            Ok(k.hausdorff(&k.negate())? <= 1e-9 * extent)
        }
    }
}

fn require_symmetric(k: &ConvexBody) -> Result<()> {
    if is_symmetric(k)? {
        Ok(())
    } else {
        Err(Error::HypothesisFailed("body is not origin symmetric".into()))
    }
}

fn require_centered(k: &ConvexBody) -> Result<()> {
    let bar = k.barycenter()?;
    let extent = k.bounding_box().1.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let off = norm(&bar);
    if off > 1e-9 * extent {
        return Err(Error::BarycenterNotOrigin(off));
    }
    Ok(())
}

/// `x' + s v` for `x'` in the coordinates of `v^perp`.
fn lift(v: &Direction, x: &[f64], s: f64) -> Vec<f64> {
    let basis = orthonormal_complement(v.unit());
    axpy(&embed(&basis, x), s, v.unit())
}

fn evaluators_along(
    sys: &ShadowSystem,
    p: PParam,
    ts: &[f64],
    ctx: &CheckContext,
) -> Result<Vec<LpEvaluator>> {
    ts.iter()
        .map(|&t| ctx.evaluator(sys.body_at(t)?, p))
        .collect()
}

/// Midpoint convexity in `t` of `h_{p,K_t}(y)`.
pub fn check_support_convexity(
    desc: &str,
    sys: &ShadowSystem,
    p: PParam,
    y: &[f64],
    t1: f64,
    t2: f64,
    ctx: &CheckContext,
) -> Result<CheckRecord> {
    let tm = 0.5 * (t1 + t2);
    let ev = evaluators_along(sys, p, &[t1, t2, tm], ctx)?;
    let lhs = ev[0].lp_support(y)?.scale(0.5).add(ev[1].lp_support(y)?.scale(0.5));
    let rhs = ev[2].lp_support(y)?;
    let instance = format!("{desc};p={p};y={};t1={t1:?};t2={t2:?}", fmt_vec(y));
    Ok(CheckRecord::inequality("support_convexity", instance, lhs, rhs, ctx.base_tol))
}

/// Three-point inequality with `2/a = 1/b + 1/c`:
/// `c/(b+c) h_{t1}(b(x'+sv)) + b/(b+c) h_{t2}(c(y'+sv)) >= h_{tm}(a((x'+y')/2 + sv))`.
#[allow(clippy::too_many_arguments)]
pub fn check_three_point(
    desc: &str,
    sys: &ShadowSystem,
    p: PParam,
    xp: &[f64],
    yp: &[f64],
    s: f64,
    t1: f64,
    t2: f64,
    b: f64,
    c: f64,
    ctx: &CheckContext,
) -> Result<CheckRecord> {
    if !(b > 0.0 && c > 0.0) {
        return Err(Error::InvalidParameter("b and c must be positive".into()));
    }
    let v = sys.direction();
    let a = 2.0 * b * c / (b + c);
    let mid = scale(&add(xp, yp), 0.5);
    let ev = evaluators_along(sys, p, &[t1, t2, 0.5 * (t1 + t2)], ctx)?;
    let lhs = ev[0]
        .lp_support(&scale(&lift(v, xp, s), b))?
        .scale(c / (b + c))
        .add(ev[1].lp_support(&scale(&lift(v, yp, s), c))?.scale(b / (b + c)));
    let rhs = ev[2].lp_support(&scale(&lift(v, &mid, s), a))?;
    let instance = format!(
        "{desc};p={p};x={};y={};s={s:?};t1={t1:?};t2={t2:?};b={b:?};c={c:?}",
        fmt_vec(xp),
        fmt_vec(yp)
    );
    Ok(CheckRecord::inequality("three_point", instance, lhs, rhs, ctx.base_tol))
}

/// `(K_{t1}^{o,p}(s) + K_{t2}^{o,p}(s))/2` inside `K_{tm}^{o,p}(s)` for planar
/// bodies. The margin is the smaller gap between the endpoints of the
/// averaged segment and those of the midpoint section.
pub fn check_section_inclusion(
    desc: &str,
    sys: &ShadowSystem,
    p: PParam,
    s: f64,
    t1: f64,
    t2: f64,
    ctx: &CheckContext,
) -> Result<CheckRecord> {
    let v = sys.direction();
    let ev = evaluators_along(sys, p, &[t1, t2, 0.5 * (t1 + t2)], ctx)?;
    let s1 = ev[0].section_segment(v, s)?;
    let s2 = ev[1].section_segment(v, s)?;
    let sm = ev[2].section_segment(v, s)?;
    let avg_left = s1.left.add(s2.left).scale(0.5);
    let avg_right = s1.right.add(s2.right).scale(0.5);
    let gap_left = avg_left.value - sm.left.value;
    let gap_right = sm.right.value - avg_right.value;
    let lhs = sm.length();
    let rhs = avg_right.sub(avg_left);
    let instance = format!("{desc};p={p};s={s:?};t1={t1:?};t2={t2:?}");
    Ok(CheckRecord::with_margin(
        "section_inclusion",
        instance,
        lhs,
        rhs,
        gap_left.min(gap_right),
        ctx.base_tol,
    ))
}

/// `|K_{tm}^{o,p}(s)|^{1/(n-1)} >= (|K_{t1}^{o,p}(s)|^{1/(n-1)} + |K_{t2}^{o,p}(s)|^{1/(n-1)}) / 2`.
#[allow(clippy::too_many_arguments)]
pub fn check_slice_concavity(
    desc: &str,
    sys: &ShadowSystem,
    p: PParam,
    s: f64,
    t1: f64,
    t2: f64,
    resolution: usize,
    ctx: &CheckContext,
) -> Result<CheckRecord> {
    let n = sys.base().dim();
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let e = 1.0 / (n - 1) as f64;
    let v = sys.direction();
    let ev = evaluators_along(sys, p, &[t1, t2, 0.5 * (t1 + t2)], ctx)?;
    let vol = |k: &LpEvaluator| -> Result<Estimate> { Ok(k.lp_polar_section_volume(v, s, resolution)?.powf(e)) };
    let rhs = vol(&ev[0])?.scale(0.5).add(vol(&ev[1])?.scale(0.5));
    let lhs = vol(&ev[2])?;
    let instance = format!("{desc};p={p};s={s:?};t1={t1:?};t2={t2:?}");
    Ok(CheckRecord::inequality("slice_concavity", instance, lhs, rhs, ctx.base_tol))
}

/// Hausdorff distance between the sections `K^{o,p}(s)` and `L^{o,p}(r)`,
/// the latter optionally reflected through the origin of `v^perp`.
fn section_distance(
    k: &LpEvaluator,
    s: f64,
    l: &LpEvaluator,
    r: f64,
    v: &Direction,
    reflect: bool,
) -> Result<Estimate> {
    let n = k.dim();
    if k.p().is_infinite() && !k.body().is_ball() && !l.body().is_ball() {
        let a = k.body().polar(&origin(n))?.section(v, s)?;
        let b = l.body().polar(&origin(n))?.section(v, r)?;
        let b = if reflect { b.negate() } else { b };
        let d = a.hausdorff(&b)?;
        return Ok(Estimate::deterministic(d, 1e-12, 1));
    }
    if n != 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let a = k.section_segment(v, s)?;
    let b = l.section_segment(v, r)?;
    let b = if reflect { b.negate() } else { b };
    Ok(a.hausdorff(&b))
}

fn distance_record(check_id: &str, instance: String, d: Estimate, tol: f64) -> CheckRecord {
    CheckRecord::with_margin(check_id, instance, d, Estimate::exact(0.0), -d.value, tol)
}

/// For `K = -K`: `K^{o,p}(-s) = -K^{o,p}(s)`. The margin is minus the
/// Hausdorff distance.
pub fn check_section_symmetry(
    desc: &str,
    k: &ConvexBody,
    p: PParam,
    v: &Direction,
    s: f64,
    ctx: &CheckContext,
) -> Result<CheckRecord> {
    require_symmetric(k)?;
    let ev = ctx.evaluator(k.clone(), p)?;
    let d = section_distance(&ev, -s, &ev, s, v, true)?;
    let instance = format!("{desc};p={p};v={};s={s:?}", fmt_vec(v.unit()));
    Ok(distance_record("section_symmetry", instance, d, ctx.base_tol))
}

/// With `K_1` the image of `K` at `t = 1` under the Steiner speed (its
/// reflection in `v^perp`): `K^{o,p}(-s) = K_1^{o,p}(s)`. A second,
/// diagnostic record compares `K^{o,p}(s)` with `K_1^{o,p}(s)`.
pub fn check_reflection_sections(
    desc: &str,
    k: &ConvexBody,
    v: &Direction,
    p: PParam,
    s: f64,
    ctx: &CheckContext,
) -> Result<Vec<CheckRecord>> {
    let sys = make_parallel_chord(k, v, steiner_speed(k, v)?)?;
    let k1 = sys.body_at(1.0)?;
    let ev = ctx.evaluator(k.clone(), p)?;
    let ev1 = ctx.evaluator(k1, p)?;
    let instance = format!("{desc};p={p};v={};s={s:?}", fmt_vec(v.unit()));
    let proof = section_distance(&ev, -s, &ev1, s, v, false)?;
    let statement = section_distance(&ev, s, &ev1, s, v, false)?;
    Ok(vec![
        distance_record("reflection_sections", instance.clone(), proof, ctx.base_tol),
        distance_record("reflection_sections_statement", instance, statement, ctx.base_tol)
            .as_diagnostic()
            .with_note("sections at equal heights; differs from the reflected form for asymmetric bodies"),
    ])
}

/// For `K = -K`: `|(S_v K)^{o,p}| >= |K^{o,p}|`.
pub fn check_steiner_monotone(
    desc: &str,
    k: &ConvexBody,
    v: &Direction,
    p: PParam,
    ctx: &CheckContext,
) -> Result<CheckRecord> {
    require_symmetric(k)?;
    let sym = k.steiner_symmetrize(v)?;
    let lhs = ctx.evaluator(sym, p)?.lp_polar_volume()?;
    let rhs = ctx.evaluator(k.clone(), p)?.lp_polar_volume()?;
    let instance = format!("{desc};p={p};v={}", fmt_vec(v.unit()));
    Ok(CheckRecord::inequality("steiner_monotone", instance, lhs, rhs, ctx.base_tol))
}

/// For `K = -K`: `|B||B^{o,p}| >= |K||K^{o,p}|`.
pub fn check_santalo_p(desc: &str, k: &ConvexBody, p: PParam, ctx: &CheckContext) -> Result<CheckRecord> {
    require_symmetric(k)?;
    let lhs = mahler_p_ball(k.dim(), p)?;
    let rhs = ctx.evaluator(k.clone(), p)?.mahler_p()?;
    let instance = format!("{desc};p={p}");
    Ok(CheckRecord::inequality("santalo_p", instance, lhs, rhs, ctx.base_tol))
}

/// For `bar(K) = o`: `n! |K| |K^{o,p}| <= n! c_p^n |B|^2`.
pub fn check_prop_bound(desc: &str, k: &ConvexBody, p: PParam, ctx: &CheckContext) -> Result<CheckRecord> {
    require_centered(k)?;
    let n = k.dim();
    let nf = factorial(n);
    let bound = nf * p.cp().powi(n as i32) * ball_volume(n).powi(2);
    let rhs = ctx.evaluator(k.clone(), p)?.mahler_p()?.scale(nf);
    let instance = format!("{desc};p={p}");
    Ok(CheckRecord::inequality("prop_bound", instance, Estimate::exact(bound), rhs, ctx.base_tol))
}

/// For `bar(K) = o`: `K^o ⊂ K^{o,p} ⊂ c_p K^o`, as radius ratios over the
/// directions. `lhs` is the smallest ratio, `rhs` the largest; the margin is
/// `min(lhs - 1, c_p - rhs)`.
pub fn check_sandwich(
    desc: &str,
    k: &ConvexBody,
    p: PParam,
    directions: &[Vec<f64>],
    ctx: &CheckContext,
) -> Result<CheckRecord> {
    let m = ctx.evaluator(k.clone(), p)?.sandwich_margins(directions)?;
    let lhs = Estimate::deterministic(m.min, m.error, directions.len() as u64);
    let rhs = Estimate::deterministic(m.max, m.error, directions.len() as u64);
    let margin = (m.min - 1.0).min(p.cp() - m.max);
    let instance = format!("{desc};p={p};directions={}", directions.len());
    Ok(CheckRecord::with_margin("sandwich", instance, lhs, rhs, margin, ctx.base_tol))
}

/// `|(K - z)^o| = ∫_{K^o} (1 - <z,x>)^{-(n+1)} dx`.
pub fn check_translate_polar(desc: &str, k: &ConvexBody, z: &[f64], ctx: &CheckContext) -> Result<CheckRecord> {
    let instance = format!("{desc};z={}", fmt_vec(z));
    match translate_polar_volume(k, z) {
        Ok(tp) => Ok(CheckRecord::identity("translate_polar", instance, tp.direct, tp.integral, ctx.base_tol)),
        Err(Error::IdentityViolation { lhs, rhs, .. }) => Ok(CheckRecord::identity(
            "translate_polar",
            instance,
            Estimate::exact(lhs),
            Estimate::exact(rhs),
            ctx.base_tol,
        )
        .with_note("identity budget exceeded")),
        Err(e) => Err(e),
    }
}

/// `∫_0^∞ t^{q-1} f(t) dt` through `t = u / (1 - u)`.
fn moment(f: &dyn Fn(f64) -> f64, q: f64) -> Estimate {
    integrate_adaptive(
        |u: f64| {
            if u >= 1.0 {
                return 0.0;
            }
            let t = u / (1.0 - u);
            let v = t.powf(q - 1.0) * f(t) / ((1.0 - u) * (1.0 - u));
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        1e-11,
        1e-14,
    )
}

/// If `H(2ts/(t+s)) >= F(t)^{s/(t+s)} G(s)^{t/(t+s)}`, then
/// `(∫r^{q-1}H)^{-1/q} <= ((∫t^{q-1}F)^{-1/q} + (∫s^{q-1}G)^{-1/q}) / 2`.
/// The premise is checked on `grid × grid` first.
pub fn check_ball_lemma(
    desc: &str,
    f: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
    h: &dyn Fn(f64) -> f64,
    q: f64,
    grid: &[f64],
    ctx: &CheckContext,
) -> Result<CheckRecord> {
    if !(q >= 1.0) {
        return Err(Error::InvalidParameter("q must be at least one".into()));
    }
    for &t in grid {
        for &s in grid {
            let r = 2.0 * t * s / (t + s);
            let lower = f(t).powf(s / (t + s)) * g(s).powf(t / (t + s));
            if h(r) < lower * (1.0 - 1e-9) - 1e-300 {
                return Err(Error::HypothesisFailed(format!(
                    "H({r:e}) = {:e} below {lower:e} at t = {t:e}, s = {s:e}",
                    h(r)
                )));
            }
        }
    }
    let lhs = moment(f, q)
        .powf(-1.0 / q)
        .scale(0.5)
        .add(moment(g, q).powf(-1.0 / q).scale(0.5));
    let rhs = moment(h, q).powf(-1.0 / q);
    let instance = format!("{desc};q={q:?};grid={}", grid.len());
    Ok(CheckRecord::inequality("ball_lemma", instance, lhs, rhs, ctx.base_tol))
}

/// A direction `y` with `h_K(y) < 0` if the origin lies outside `K`.
fn separating_direction(k: &ConvexBody) -> Result<Option<Vec<f64>>> {
    let n = k.dim();
    let count = match n {
        1 => 2,
        2 => 720,
        _ => 2000,
    };
    let best = direction_set(n, count)?
        .into_iter()
        .map(|u| (k.support(&u), u))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    Ok(best.filter(|(h, _)| *h < 0.0).map(|(_, u)| u))
}

fn divergence_record(desc: &str, k: &ConvexBody, p: PParam, ctx: &CheckContext) -> Result<CheckRecord> {
    let y = separating_direction(k)?
        .ok_or_else(|| Error::HypothesisFailed("no separating direction found".into()))?;
    let ev = ctx.evaluator(k.clone(), p)?;
    // growth rate of -h_{p,K}(r y) between r = 32 and r = 64, about -h_K(y)
    let h32 = ev.lp_support(&scale(&y, 32.0))?;
    let h64 = ev.lp_support(&scale(&y, 64.0))?;
    let rate = h32.sub(h64).scale(1.0 / 32.0);
    let detected = matches!(ev.radial_integral(&y), Err(Error::RadialDivergence));
    let instance = format!("{desc};p={p};part=exterior;y={}", fmt_vec(&y));
    let margin = if detected { rate.value } else { -1.0 };
    let rec = CheckRecord::with_margin("origin_iff", instance, rate, Estimate::exact(0.0), margin, ctx.base_tol);
    Ok(if detected {
        rec
    } else {
        rec.with_note("radial integral was not flagged as divergent")
    })
}

/// `o ∈ int K` iff `o ∈ int K^{o,p}`. For an interior origin, every radius
/// of `K^{o,p}` on a direction grid is positive and finite, and the body
/// pushed off the origin has a divergent radial integral along a separating
/// direction. An origin on the boundary gives an indeterminate record.
pub fn check_origin_iff(desc: &str, k: &ConvexBody, p: PParam, ctx: &CheckContext) -> Result<Vec<CheckRecord>> {
    let n = k.dim();
    let o = origin(n);
    if k.origin_interior() {
        let ev = ctx.evaluator(k.clone(), p)?;
        let dirs = direction_set(n, 32)?;
        let mut min_r = f64::INFINITY;
        let mut err = 0.0f64;
        for u in &dirs {
            let g = ev.lp_gauge(u)?;
            let r = 1.0 / g.value;
            if !(r.is_finite() && r > 0.0) {
                min_r = f64::NAN;
                break;
            }
            min_r = min_r.min(r);
            err = err.max(r * g.error / g.value);
        }
        let interior = CheckRecord::with_margin(
            "origin_iff",
            format!("{desc};p={p};part=interior"),
            Estimate::deterministic(min_r, err, dirs.len() as u64),
            Estimate::exact(0.0),
            min_r,
            ctx.base_tol,
        );
        let (lo, hi) = k.bounding_box();
        let shift = 2.0 * norm(&sub(&hi, &lo)) + 1.0;
        let mut z = o.clone();
        z[0] = shift;
        let moved = k.translate(&z);
        let exterior = divergence_record(&format!("{desc};shift={}", fmt_vec(&z)), &moved, p, ctx)?;
        return Ok(vec![interior, exterior]);
    }
    if k.contains(&o, 1e-12) {
        return Ok(vec![CheckRecord::with_margin(
            "origin_iff",
            format!("{desc};p={p};part=boundary"),
            Estimate::exact(0.0),
            Estimate::exact(0.0),
            0.0,
            ctx.base_tol,
        )
        .as_diagnostic()
        .with_note("indeterminate: origin on the boundary")]);
    }
    Ok(vec![divergence_record(desc, k, p, ctx)?])
}

/// `(K^o ∩ L^o)^o = conv(K ∪ L)`, by exact polytope operations. The margin
/// is minus the Hausdorff distance; `lhs` and `rhs` are the two volumes.
pub fn check_conv_polar(desc: &str, k: &ConvexBody, l: &ConvexBody, tol: f64) -> Result<CheckRecord> {
    let o = origin(k.dim());
    let left = k.polar(&o)?.intersect(&l.polar(&o)?)?.polar(&o)?;
    let right = k.conv_union(l)?;
    let d = left.hausdorff(&right)?;
    Ok(CheckRecord::with_margin(
        "conv_polar",
        desc.to_string(),
        Estimate::exact(left.volume()?),
        Estimate::exact(right.volume()?),
        -d,
        tol,
    ))
}

/// Probe points for gauge identities: direction grid points at radii
/// cycling through `1/2, 1, 2`.
fn probe_points(n: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    let dirs = direction_set(n, count)?;
    let radii = [0.5, 1.0, 2.0];
    let mut out: Vec<Vec<f64>> = dirs
        .iter()
        .enumerate()
        .map(|(i, u)| scale(u, radii[i % 3]))
        .collect();
    while out.len() < count {
        let i = out.len();
        out.push(scale(&dirs[i % dirs.len()], radii[i % 3]));
    }
    Ok(out)
}

/// `inf_{x+y=z} ‖x‖_A + ‖y‖_B = ‖z‖_{conv(A ∪ B)}` at 32 probe points.
pub fn check_infconv(desc: &str, a: &ConvexBody, b: &ConvexBody, ctx: &CheckContext) -> Result<CheckRecord> {
    let conv = a.conv_union(b)?;
    let mut worst = 0.0f64;
    let probes = probe_points(a.dim(), 32)?;
    for z in &probes {
        let lhs = inf_conv_gauge(a, b, z)?;
        let rhs = conv.gauge(z)?;
        worst = worst.max((lhs - rhs).abs());
    }
    let d = Estimate::deterministic(worst, 0.0, probes.len() as u64);
    Ok(distance_record("infconv", desc.to_string(), d, ctx.base_tol))
}

/// `∫_M φ <= |M| φ(∫ x φ / ∫ φ)` for log-concave `φ = exp(ln_phi)`.
pub fn check_logconcave_projection(
    desc: &str,
    m: &ConvexBody,
    ln_phi: &dyn Fn(&[f64]) -> f64,
    ctx: &CheckContext,
) -> Result<CheckRecord> {
    let n = m.dim();
    let mesh = triangulate(m)?;
    let phi = |x: &[f64]| ln_phi(x).exp();
    let mut mass = Estimate::exact(0.0);
    let mut first = vec![Estimate::exact(0.0); n];
    for s in &mesh.simplices {
        mass = mass.add(integrate_simplex(&phi, s, 1e-11));
        for (k, acc) in first.iter_mut().enumerate() {
            *acc = acc.add(integrate_simplex(&|x: &[f64]| x[k] * phi(x), s, 1e-11));
        }
    }
    let bar: Vec<f64> = first.iter().map(|e| e.value / mass.value).collect();
    let vol = m.volume()?;
    let at_bar = phi(&bar);
    // first-order propagation of the quadrature error through the barycenter
    let mut err = 0.0;
    for (k, e) in first.iter().enumerate() {
        let delta = e.error / mass.value + e.value.abs() * mass.error / (mass.value * mass.value);
        let step = 1e-6 * (1.0 + bar[k].abs());
        let mut xp = bar.clone();
        let mut xm = bar.clone();
        xp[k] += step;
        xm[k] -= step;
        let slope = (phi(&xp) - phi(&xm)) / (2.0 * step);
        err += slope.abs() * delta;
    }
    let lhs = Estimate::deterministic(vol * at_bar, vol * err + 1e-14 * vol * at_bar, mass.samples);
    let instance = format!("{desc};barycenter={}", fmt_vec(&bar));
    Ok(CheckRecord::inequality("logconcave_projection", instance, lhs, mass, ctx.base_tol))
}

/// Inner and outer polytopes around an L_p polar body.
#[derive(Debug, Clone)]
pub struct PolarBracket {
    pub inner: ConvexBody,
    pub outer: ConvexBody,
}

impl PolarBracket {
    pub fn exact(body: ConvexBody) -> Self {
        PolarBracket {
            inner: body.clone(),
            outer: body,
        }
    }

    pub fn negate(&self) -> Self {
        PolarBracket {
            inner: self.inner.negate(),
            outer: self.outer.negate(),
        }
    }
}

fn interval(lo: f64, hi: f64) -> Result<ConvexBody> {
    hull(&[vec![lo], vec![hi]])
}

/// Polytope bracket of `K^{o,p}`: the exact polar at `p = ∞`, the interval
/// between the gauge roots on the line, the inscribed and tangent polytopes
/// of the gauge grid otherwise.
pub fn lp_polar_bracket(k: &ConvexBody, p: PParam, resolution: usize, ctx: &CheckContext) -> Result<PolarBracket> {
    let n = k.dim();
    if p.is_infinite() && !k.is_ball() {
        return Ok(PolarBracket::exact(k.polar(&origin(n))?));
    }
    let ev = ctx.evaluator(k.clone(), p)?;
    if n == 1 {
        let radius = |u: f64| -> Result<(f64, f64)> {
            let g = ev.lp_gauge(&[u])?;
            Ok((1.0 / g.value, g.error / (g.value * g.value)))
        };
        let (rp, ep) = radius(1.0)?;
        let (rm, em) = radius(-1.0)?;
        return Ok(PolarBracket {
            inner: interval(-(rm - em), rp - ep)?,
            outer: interval(-(rm + em), rp + ep)?,
        });
    }
    let approx = ev.lp_polar_approx(resolution)?;
    Ok(PolarBracket {
        inner: approx.inner,
        outer: approx.outer,
    })
}

/// `(A^o - B^o)^o`.
pub fn difference_polar(a: &ConvexBody, b: &ConvexBody) -> Result<ConvexBody> {
    let o = origin(a.dim());
    a.polar(&o)?.minkowski_diff(&b.polar(&o)?)?.polar(&o)
}

fn central_binomial(n: usize) -> f64 {
    factorial(2 * n) / (factorial(n) * factorial(n))
}

fn require_opposite(a: &ConvexBody, b: &ConvexBody) -> Result<()> {
    let gap = norm(&add(&a.barycenter()?, &b.barycenter()?));
    let extent = a.bounding_box().1.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    if gap > 1e-7 * extent {
        return Err(Error::BarycentersNotOpposite(gap));
    }
    Ok(())
}

/// Brackets of `K^{o,p}` and `L^{o,p}`; when `L = -K` the second is the
/// reflection of the first, so their barycenters are exactly opposite.
pub fn polar_pair(
    k: &ConvexBody,
    l: &ConvexBody,
    p: PParam,
    resolution: usize,
    ctx: &CheckContext,
) -> Result<(PolarBracket, PolarBracket)> {
    let a = lp_polar_bracket(k, p, resolution, ctx)?;
    let reflected = !k.is_ball() && !l.is_ball() && k.negate().hausdorff(l)? <= 1e-12;
    let b = if reflected {
        a.negate()
    } else {
        lp_polar_bracket(l, p, resolution, ctx)?
    };
    require_opposite(&a.inner, &b.inner)?;
    require_opposite(&a.outer, &b.outer)?;
    Ok((a, b))
}

/// Midpoint estimate of a quantity monotone in the bracket.
fn bracketed(f: impl Fn(&ConvexBody, &ConvexBody) -> Result<f64>, a: &PolarBracket, b: &PolarBracket) -> Result<Estimate> {
    let lo = f(&a.inner, &b.inner)?;
    let hi = f(&a.outer, &b.outer)?;
    let (lo, hi) = (lo.min(hi), lo.max(hi));
    Ok(Estimate::deterministic(0.5 * (lo + hi), 0.5 * (hi - lo) + 1e-12 * hi, 2))
}

fn hull_product(a: &ConvexBody, b: &ConvexBody) -> Result<f64> {
    Ok(a.conv_union(b)?.volume()? * difference_polar(a, b)?.volume()?)
}

fn volume_product(a: &ConvexBody, b: &ConvexBody) -> Result<f64> {
    Ok(a.volume()? * b.volume()?)
}

/// With `A = K^{o,p}`, `B = L^{o,p}` of opposite barycenters:
/// `C(2n,n) |conv(A ∪ B)| |(A^o - B^o)^o| >= |A| |B|`.
pub fn check_reverse_rs(
    desc: &str,
    k: &ConvexBody,
    l: &ConvexBody,
    p: PParam,
    resolution: usize,
    ctx: &CheckContext,
) -> Result<CheckRecord> {
    let (a, b) = polar_pair(k, l, p, resolution, ctx)?;
    let lhs = bracketed(hull_product, &a, &b)?.scale(central_binomial(k.dim()));
    let rhs = bracketed(volume_product, &a, &b)?;
    let instance = format!("{desc};p={p};resolution={resolution}");
    Ok(CheckRecord::inequality("reverse_rs", instance, lhs, rhs, ctx.base_tol))
}

/// `|A| |B| >= |conv(A ∪ B)| |(A^o - B^o)^o|` for `A = K^{o,p}`, `B = L^{o,p}`.
pub fn check_rs_forward(
    desc: &str,
    k: &ConvexBody,
    l: &ConvexBody,
    p: PParam,
    resolution: usize,
    ctx: &CheckContext,
) -> Result<CheckRecord> {
    let (a, b) = polar_pair(k, l, p, resolution, ctx)?;
    let lhs = bracketed(volume_product, &a, &b)?;
    let rhs = bracketed(hull_product, &a, &b)?;
    let instance = format!("{desc};p={p};resolution={resolution}");
    Ok(CheckRecord::inequality("rs_forward", instance, lhs, rhs, ctx.base_tol))
}

/// `|K^o| |L^o| >= |(K ∩ L)^o| |(K - L)^o|`.
pub fn check_classical_rs_forward(desc: &str, k: &ConvexBody, l: &ConvexBody, ctx: &CheckContext) -> Result<CheckRecord> {
    let o = origin(k.dim());
    let lhs = volume_estimate(&k.polar(&o)?)?.mul(volume_estimate(&l.polar(&o)?)?);
    let rhs = volume_estimate(&k.intersect(l)?.polar(&o)?)?.mul(volume_estimate(&k.minkowski_diff(l)?.polar(&o)?)?);
    Ok(CheckRecord::inequality("classical_rs_forward", desc.to_string(), lhs, rhs, ctx.base_tol))
}

/// For `K^o`, `L^o` of opposite barycenters:
/// `|(K ∩ L)^o| |(K - L)^o| >= (n!)^2/(2n)! |K^o| |L^o|`.
pub fn check_classical_rs_reverse(desc: &str, k: &ConvexBody, l: &ConvexBody, ctx: &CheckContext) -> Result<CheckRecord> {
    let n = k.dim();
    let o = origin(n);
    let (ko, lo) = (k.polar(&o)?, l.polar(&o)?);
    require_opposite(&ko, &lo)?;
    let lhs = volume_estimate(&k.intersect(l)?.polar(&o)?)?.mul(volume_estimate(&k.minkowski_diff(l)?.polar(&o)?)?);
    let rhs = volume_estimate(&ko)?
        .mul(volume_estimate(&lo)?)
        .scale(1.0 / central_binomial(n));
    Ok(CheckRecord::inequality("classical_rs_reverse", desc.to_string(), lhs, rhs, ctx.base_tol))
}

/// Largest absolute coordinates of a body, per axis.
fn half_widths(k: &ConvexBody) -> Vec<f64> {
    let (lo, hi) = k.bounding_box();
    lo.iter().zip(&hi).map(|(a, b)| a.abs().max(b.abs())).collect()
}

/// Gauge of the box `[lo, hi]`, which contains the origin in its interior.
fn box_gauge(lo: &[f64], hi: &[f64], x: &[f64]) -> f64 {
    x.iter()
        .zip(lo.iter().zip(hi))
        .map(|(&xi, (&a, &b))| if xi >= 0.0 { xi / b } else { xi / a })
        .fold(0.0, f64::max)
}

/// Sum of `k` standard exponentials: a `Gamma(k, 1)` deviate.
fn gamma_int(r: &mut rng::Stream, k: usize) -> f64 {
    (0..k).map(|_| -(1.0 - r.gen::<f64>()).ln()).sum()
}

fn mc_estimate(sum: f64, sum2: f64, count: u64) -> Estimate {
    let nf = count as f64;
    let mean = sum / nf;
    let var = (sum2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0).max(1.0);
    Estimate {
        value: mean,
        error: 1.96 * (var / nf).sqrt(),
        method: Method::MonteCarlo,
        samples: count,
    }
}

/// Level-set construction for `f = e^{-‖·‖_A}`, `g = e^{-‖·‖_B}` with
/// `A = K^{o,p}`, `B = L^{o,p}` (inner polytope stand-ins) of opposite
/// barycenters. With `λ = -ln t`, `C_t = {‖x‖_A + ‖y‖_B <= λ}` in the
/// rotated coordinates `u = (x+y)/√2`, `w = (x-y)/√2` has projection
/// `M_t = (λ/√2) conv(A ∪ B)` and section `√2 λ (A^o - B^o)^o`.
///
/// Per `t`: (a) `|M_t| |section| >= |C_t|` and (b) `|C_t| >= (n!)^2/(2n)! |M_t| |section|`
/// with `|C_t|` by Monte Carlo in `R^{2n}`. Then (c) `∫_0^1 |C_t| dt = (n!)^2 |A| |B|`
/// by a layer-cake estimator, and (d) `∫ e^{-max(‖u‖_P, ‖w‖_D)} = (2n)! |P| |D|`
/// for `P = conv(A ∪ B)`, `D = (A^o - B^o)^o` by importance sampling.
#[allow(clippy::too_many_arguments)]
pub fn check_ct_machinery(
    desc: &str,
    k: &ConvexBody,
    l: &ConvexBody,
    p: PParam,
    ts: &[f64],
    resolution: usize,
    ctx: &CheckContext,
) -> Result<Vec<CheckRecord>> {
    let n = k.dim();
    if !(1..=2).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let (ba, bb) = polar_pair(k, l, p, resolution, ctx)?;
    let (a, b) = (ba.inner, bb.inner);
    let conv = a.conv_union(&b)?;
    let diff = difference_polar(&a, &b)?;
    let (va, vb) = (a.volume()?, b.volume()?);
    let (vc, vd) = (conv.volume()?, diff.volume()?);
    let nf = factorial(n);
    let n2f = factorial(2 * n);
    let samples = ctx.mc_samples.max(2);

    // box around C_1 in (u, w) coordinates
    let (ha, hb) = (half_widths(&a), half_widths(&b));
    let half: Vec<f64> = ha.iter().zip(&hb).map(|(x, y)| (x + y) / SQRT_2).collect();
    let unit_box: f64 = half.iter().map(|h| (2.0 * h) * (2.0 * h)).product();
    let inside = |u: &[f64], w: &[f64], lam: f64| -> Result<bool> {
        let x: Vec<f64> = u.iter().zip(w).map(|(p, q)| (p + q) / SQRT_2).collect();
        let y: Vec<f64> = u.iter().zip(w).map(|(p, q)| (p - q) / SQRT_2).collect();
        Ok(a.gauge(&x)? + b.gauge(&y)? <= lam)
    };
    let draw = |r: &mut rng::Stream, lam: f64| -> (Vec<f64>, Vec<f64>) {
        let u = half.iter().map(|h| lam * h * r.gen_range(-1.0..=1.0)).collect();
        let w = half.iter().map(|h| lam * h * r.gen_range(-1.0..=1.0)).collect();
        (u, w)
    };

    let mut out = Vec::new();
    for (j, &t) in ts.iter().enumerate() {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidParameter(format!("level t = {t} outside (0, 1)")));
        }
        let lam = -t.ln();
        let mut r = rng::stream(ctx.seed, 0x4354, j as u32);
        let mut hits = 0u64;
        for _ in 0..samples {
            let (u, w) = draw(&mut r, lam);
            if inside(&u, &w, lam)? {
                hits += 1;
            }
        }
        let frac = hits as f64 / samples as f64;
        let scale_box = lam.powi(2 * n as i32) * unit_box;
        let ct = Estimate {
            value: frac * scale_box,
            error: 1.96 * (frac * (1.0 - frac) / samples as f64).sqrt() * scale_box,
            method: Method::MonteCarlo,
            samples,
        };
        let m_t = (lam / SQRT_2).powi(n as i32) * vc;
        let sec = (SQRT_2 * lam).powi(n as i32) * vd;
        let product = Estimate::deterministic(m_t * sec, 1e-12 * m_t * sec, 1);
        let base = format!("{desc};p={p};t={t:?}");
        out.push(CheckRecord::inequality("ct_machinery", format!("{base};part=projection"), product, ct, ctx.base_tol));
        out.push(CheckRecord::inequality(
            "ct_machinery",
            format!("{base};part=rogers_shephard"),
            ct,
            product.scale(nf * nf / n2f),
            ctx.base_tol,
        ));
    }

    // (c) λ ~ Gamma(2n+1), point uniform in λ·box: (2n)! |box| 1[in C_λ]
    let mut r = rng::stream(ctx.seed, 0x4354, 0x10000);
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..samples {
        let lam = gamma_int(&mut r, 2 * n + 1);
        let (u, w) = draw(&mut r, lam);
        if inside(&u, &w, lam)? {
            let v = n2f * unit_box;
            sum += v;
            sum2 += v * v;
        }
    }
    let layer = mc_estimate(sum, sum2, samples);
    out.push(CheckRecord::identity(
        "ct_machinery",
        format!("{desc};p={p};part=layer_cake"),
        layer,
        Estimate::deterministic(nf * nf * va * vb, 1e-12 * nf * nf * va * vb, 1),
        ctx.base_tol,
    ));

    // (d) w = r U, r ~ Gamma(2n+1), U uniform in Q = box(P) × box(D)
    let (plo, phi) = conv.bounding_box();
    let (dlo, dhi) = diff.bounding_box();
    let q_vol: f64 = plo.iter().zip(&phi).chain(dlo.iter().zip(&dhi)).map(|(a, b)| b - a).product();
    let mut r = rng::stream(ctx.seed, 0x4354, 0x20000);
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..samples {
        let rad = gamma_int(&mut r, 2 * n + 1);
        let u: Vec<f64> = plo.iter().zip(&phi).map(|(a, b)| rad * r.gen_range(*a..=*b)).collect();
        let w: Vec<f64> = dlo.iter().zip(&dhi).map(|(a, b)| rad * r.gen_range(*a..=*b)).collect();
        let q = box_gauge(&plo, &phi, &u).max(box_gauge(&dlo, &dhi, &w));
        let g = conv.gauge(&u)?.max(diff.gauge(&w)?);
        let v = n2f * q_vol * (q - g).exp();
        sum += v;
        sum2 += v * v;
    }
    let product_integral = mc_estimate(sum, sum2, samples);
    let exact = n2f * vc * vd;
    out.push(CheckRecord::identity(
        "ct_machinery",
        format!("{desc};p={p};part=product_gauge"),
        product_integral,
        Estimate::deterministic(exact, 1e-12 * exact, 1),
        ctx.base_tol,
    ));
    Ok(out)
}
