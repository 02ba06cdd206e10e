//! Seeded instance families and the suite runner.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::checks::*;
use super::{CheckRecord, SuiteConfig};
use crate::bodies::linalg::scale;
use crate::bodies::{hull, ConvexBody, Direction};
use crate::error::{Error, Result};
use crate::lp::{direction_set, PParam};
use crate::rng::{self, Stream};
use crate::shadow::{make_parallel_chord, random_chordwise, ShadowSystem, SpeedFunction};

/// A family of seeded instances of one check.
#[derive(Clone, Copy)]
pub struct Family {
    pub id: &'static str,
    count: fn(&SuiteConfig) -> usize,
    run: fn(&Draw) -> Result<Vec<CheckRecord>>,
}

impl Family {
    /// Number of instances under `cfg`.
    pub fn instances(&self, cfg: &SuiteConfig) -> usize {
        cfg.instances_per_check.unwrap_or_else(|| (self.count)(cfg))
    }
}

impl std::fmt::Debug for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Family").field("id", &self.id).finish()
    }
}

/// Everything an instance generator may use.
pub struct Draw<'a> {
    cfg: &'a SuiteConfig,
    index: usize,
    ctx: CheckContext,
    rng: std::cell::RefCell<Stream>,
}

const ALL_P: &[PParam] = &[];
const P_STANDARD: &[PParam] = &[PParam::Finite(1.0), PParam::Finite(2.0), PParam::Infinity];
const P_RS: &[PParam] = &[PParam::Finite(1.0), PParam::Infinity];
const RS_RESOLUTION: usize = 128;
const T_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

impl Draw<'_> {
    fn uniform(&self, lo: f64, hi: f64) -> f64 {
        self.rng.borrow_mut().gen_range(lo..=hi)
    }

    fn normal(&self) -> f64 {
        rng::normal(&mut self.rng.borrow_mut())
    }

    fn seed(&self) -> u64 {
        self.rng.borrow_mut().gen()
    }

    fn choose<T: Copy>(&self, items: &[T]) -> T {
        items[self.rng.borrow_mut().gen_range(0..items.len())]
    }

    fn direction(&self, n: usize) -> Result<Direction> {
        Direction::new(&rng::unit_vector(&mut self.rng.borrow_mut(), n))
    }

    fn dims(&self, natural: &[usize]) -> Vec<usize> {
        natural
            .iter()
            .copied()
            .filter(|d| self.cfg.dimensions.contains(d))
            .collect()
    }

    fn ps(&self, natural: &[PParam]) -> Vec<PParam> {
        if natural.is_empty() {
            return self.cfg.p_values.clone();
        }
        natural
            .iter()
            .copied()
            .filter(|p| self.cfg.p_values.contains(p))
            .collect()
    }

    /// Dimension and exponent for this instance, cycling dimensions fastest.
    fn pick(&self, dims: &[usize], ps: &[PParam]) -> Option<(usize, PParam)> {
        let (dims, ps) = (self.dims(dims), self.ps(ps));
        if dims.is_empty() || ps.is_empty() {
            return None;
        }
        let i = self.index;
        Some((dims[i % dims.len()], ps[(i / dims.len()) % ps.len()]))
    }

    fn allows(&self, n: usize, p: PParam) -> bool {
        self.cfg.dimensions.contains(&n) && self.cfg.p_values.contains(&p)
    }

    /// Random polytope (an interval on the line); centered at its barycenter
    /// unless `centered` is false, in which case intervals are `[-a, b]`.
    fn body(&self, n: usize, symmetric: bool, centered: bool) -> Result<(ConvexBody, String)> {
        if n == 1 {
            let a = self.uniform(0.5, 1.5);
            let b = if symmetric { a } else { self.uniform(0.5, 1.5) };
            let shift = if centered { 0.5 * (b - a) } else { 0.0 };
            let (lo, hi) = (-a - shift, b - shift);
            return Ok((hull(&[vec![lo], vec![hi]])?, format!("interval[{lo:?},{hi:?}]")));
        }
        let m = match n {
            2 => self.rng.borrow_mut().gen_range(5..=9),
            _ => self.rng.borrow_mut().gen_range(8..=14),
        };
        let seed = self.seed();
        let k = ConvexBody::random_poly(n, m, seed, symmetric)?;
        Ok((k, format!("random_poly(n={n},m={m},seed={seed},symmetric={symmetric})")))
    }

    fn label(&self, family: &str) -> String {
        format!("{family}#{}", self.index)
    }
}

fn interval(lo: f64, hi: f64) -> Result<ConvexBody> {
    hull(&[vec![lo], vec![hi]])
}

/// Radius of `K^{o,p}` along `u`.
fn polar_radius(k: &ConvexBody, p: PParam, u: &[f64], ctx: &CheckContext) -> Result<f64> {
    Ok(1.0 / ctx.evaluator(k.clone(), p)?.lp_gauge(u)?.value)
}

/// A chord movement with the origin interior to `K_t` at `t1`, `t2` and their
/// midpoint, and a height `s` inside all three L_p polars.
struct Moving {
    desc: String,
    sys: ShadowSystem,
    t1: f64,
    t2: f64,
    s: f64,
}

fn draw_moving(d: &Draw, n: usize, p: PParam, equal_ts: bool, name: &str) -> Result<Moving> {
    for attempt in 0..32 {
        let (k, kdesc) = d.body(n, false, true)?;
        let v = d.direction(n)?;
        let seed = d.seed();
        let sys = random_chordwise(&k, &v, seed, 0)?;
        let (lo, hi) = sys.validity();
        let (lo, hi) = (lo.max(-1.0), hi.min(1.0));
        let t1 = d.uniform(lo, hi);
        let t2 = if equal_ts { t1 } else { d.uniform(lo, hi) };
        let ts = [t1, t2, 0.5 * (t1 + t2)];
        let mut ok = true;
        let (mut up, mut down) = (f64::INFINITY, f64::INFINITY);
        for &t in &ts {
            let kt = sys.body_at(t)?;
            if !kt.origin_interior() {
                ok = false;
                break;
            }
            up = up.min(polar_radius(&kt, p, v.unit(), &d.ctx)?);
            down = down.min(polar_radius(&kt, p, &scale(v.unit(), -1.0), &d.ctx)?);
        }
        if !ok {
            continue;
        }
        let s = d.uniform(-0.8 * down, 0.8 * up);
        let desc = format!(
            "{};{kdesc};v={};speed=random_chordwise(seed={seed});attempt={attempt}",
            d.label(name),
            fmt_vec(v.unit())
        );
        return Ok(Moving { desc, sys, t1, t2, s });
    }
    Err(Error::HypothesisFailed("no chord movement keeping the origin interior".into()))
}

fn support_convexity(d: &Draw) -> Result<Vec<CheckRecord>> {
    let Some((n, p)) = d.pick(&[2], P_STANDARD) else {
        return Ok(Vec::new());
    };
    let y: Vec<f64> = (0..n).map(|_| d.normal()).collect();
    if d.index == 0 {
        let k = ConvexBody::random_poly(n, 6, 7, false)?;
        let v = Direction::axis(n, n - 1);
        let sys = make_parallel_chord(&k, &v, SpeedFunction::constant(1.0, n))?;
        let desc = format!("{};random_poly(n={n},m=6,seed=7,symmetric=false);speed=const(1)", d.label("support_convexity"));
        return Ok(vec![check_support_convexity(&desc, &sys, p, &y, -0.3, 0.7, &d.ctx)?]);
    }
    let (k, kdesc) = d.body(n, false, true)?;
    let v = d.direction(n)?;
    let seed = d.seed();
    let sys = random_chordwise(&k, &v, seed, 0)?;
    let (lo, hi) = sys.validity();
    let (lo, hi) = (lo.max(-1.0), hi.min(1.0));
    let (t1, t2) = (d.uniform(lo, hi), d.uniform(lo, hi));
    let desc = format!(
        "{};{kdesc};v={};speed=random_chordwise(seed={seed})",
        d.label("support_convexity"),
        fmt_vec(v.unit())
    );
    Ok(vec![check_support_convexity(&desc, &sys, p, &y, t1, t2, &d.ctx)?])
}

fn three_point(d: &Draw) -> Result<Vec<CheckRecord>> {
    let Some((n, p)) = d.pick(&[2], P_STANDARD) else {
        return Ok(Vec::new());
    };
    let (k, kdesc) = d.body(n, false, true)?;
    let v = d.direction(n)?;
    let seed = d.seed();
    let sys = random_chordwise(&k, &v, seed, 0)?;
    let (lo, hi) = sys.validity();
    let (lo, hi) = (lo.max(-1.0), hi.min(1.0));
    let xp: Vec<f64> = (0..n - 1).map(|_| 0.5 * d.normal()).collect();
    let s = 0.5 * d.normal();
    let (yp, t1, t2, b, c) = if d.index == 0 {
        let t = d.uniform(lo, hi);
        (xp.clone(), t, t, 1.0, 1.0)
    } else {
        let yp: Vec<f64> = (0..n - 1).map(|_| 0.5 * d.normal()).collect();
        let choices = [0.5, 1.0, 2.0];
        (yp, d.uniform(lo, hi), d.uniform(lo, hi), d.choose(&choices), d.choose(&choices))
    };
    let desc = format!(
        "{};{kdesc};v={};speed=random_chordwise(seed={seed})",
        d.label("three_point"),
        fmt_vec(v.unit())
    );
    Ok(vec![check_three_point(&desc, &sys, p, &xp, &yp, s, t1, t2, b, c, &d.ctx)?])
}

fn section_inclusion(d: &Draw) -> Result<Vec<CheckRecord>> {
    let Some((n, p)) = d.pick(&[2], P_STANDARD) else {
        return Ok(Vec::new());
    };
    let m = draw_moving(d, n, p, d.index == 0, "section_inclusion")?;
    Ok(vec![check_section_inclusion(&m.desc, &m.sys, p, m.s, m.t1, m.t2, &d.ctx)?])
}

fn slice_concavity(d: &Draw) -> Result<Vec<CheckRecord>> {
    let Some((n, p)) = d.pick(&[2], P_STANDARD) else {
        return Ok(Vec::new());
    };
    let m = draw_moving(d, n, p, d.index == 0, "slice_concavity")?;
    Ok(vec![check_slice_concavity(&m.desc, &m.sys, p, m.s, m.t1, m.t2, 16, &d.ctx)?])
}

fn section_symmetry(d: &Draw) -> Result<Vec<CheckRecord>> {
    let Some((n, p)) = d.pick(&[2], ALL_P) else {
        return Ok(Vec::new());
    };
    let (k, kdesc) = d.body(n, true, true)?;
    let v = d.direction(n)?;
    let r = polar_radius(&k, p, v.unit(), &d.ctx)?;
    let s = if d.index == 0 { 0.0 } else { d.uniform(-0.8 * r, 0.8 * r) };
    let desc = format!("{};{kdesc}", d.label("section_symmetry"));
    Ok(vec![check_section_symmetry(&desc, &k, p, &v, s, &d.ctx)?])
}

fn reflection_sections(d: &Draw) -> Result<Vec<CheckRecord>> {
    let Some((n, p)) = d.pick(&[2], ALL_P) else {
        return Ok(Vec::new());
    };
    let (k, kdesc) = d.body(n, false, true)?;
    let v = d.direction(n)?;
    let r = polar_radius(&k, p, v.unit(), &d.ctx)?.min(polar_radius(&k, p, &scale(v.unit(), -1.0), &d.ctx)?);
    let sign = if d.index.is_multiple_of(2) { 1.0 } else { -1.0 };
    let s = if d.index == 0 { 0.0 } else { sign * 0.15 * r.min(1.0) };
    let desc = format!("{};{kdesc}", d.label("reflection_sections"));
    check_reflection_sections(&desc, &k, &v, p, s, &d.ctx)
}

fn steiner_monotone(d: &Draw) -> Result<Vec<CheckRecord>> {
    let Some((n, p)) = d.pick(&[2, 3], P_STANDARD) else {
        return Ok(Vec::new());
    };
    if d.index == 0 {
        let k = ConvexBody::cube(n, 1.0)?;
        let v = Direction::axis(n, n - 1);
        let desc = format!("{};cube(n={n})", d.label("steiner_monotone"));
        return Ok(vec![check_steiner_monotone(&desc, &k, &v, p, &d.ctx)?]);
    }
    let (k, kdesc) = d.body(n, true, true)?;
    let v = d.direction(n)?;
    let desc = format!("{};{kdesc}", d.label("steiner_monotone"));
    Ok(vec![check_steiner_monotone(&desc, &k, &v, p, &d.ctx)?])
}

fn santalo_p(d: &Draw) -> Result<Vec<CheckRecord>> {
    let Some((n, p)) = d.pick(&[1, 2, 3], ALL_P) else {
        return Ok(Vec::new());
    };
    if d.index == 0 {
        let k = ConvexBody::ball(vec![0.0; n], 1.7)?;
        let desc = format!("{};ball(n={n},radius=1.7)", d.label("santalo_p"));
        return Ok(vec![check_santalo_p(&desc, &k, p, &d.ctx)?]);
    }
    let (k, kdesc) = d.body(n, true, true)?;
    let desc = format!("{};{kdesc}", d.label("santalo_p"));
    Ok(vec![check_santalo_p(&desc, &k, p, &d.ctx)?])
}

fn prop_bound(d: &Draw) -> Result<Vec<CheckRecord>> {
    let Some((n, p)) = d.pick(&[1, 2, 3], ALL_P) else {
        return Ok(Vec::new());
    };
    if d.index == 0 && d.allows(n, PParam::Infinity) {
        let k = ConvexBody::cube(n, 1.0)?;
        let k = if n == 1 { k } else { ConvexBody::ball(vec![0.0; n], 1.0)? };
        let desc = format!("{};unit_ball(n={n})", d.label("prop_bound"));
        return Ok(vec![check_prop_bound(&desc, &k, PParam::Infinity, &d.ctx)?]);
    }
    let (k, kdesc) = d.body(n, false, true)?;
    let desc = format!("{};{kdesc}", d.label("prop_bound"));
    Ok(vec![check_prop_bound(&desc, &k, p, &d.ctx)?])
}

fn sandwich(d: &Draw) -> Result<Vec<CheckRecord>> {
    let ps = d.ps(ALL_P);
    let dims = d.dims(&[1, 2, 3]);
    if ps.is_empty() || dims.is_empty() {
        return Ok(Vec::new());
    }
    // one body per block of exponents
    let body_index = d.index / ps.len();
    let p = ps[d.index % ps.len()];
    let n = dims[body_index % dims.len()];
    let family = rng::fnv1a("sandwich_bodies") as u32;
    let body_draw = Draw {
        cfg: d.cfg,
        index: body_index,
        ctx: d.ctx,
        rng: std::cell::RefCell::new(rng::stream(d.cfg.master_seed, family, body_index as u32)),
    };
    let (k, kdesc) = body_draw.body(n, false, true)?;
    let dirs = direction_set(n, 64)?;
    let desc = format!("{};body#{body_index};{kdesc}", d.label("sandwich"));
    Ok(vec![check_sandwich(&desc, &k, p, &dirs, &d.ctx)?])
}

fn translate_polar(d: &Draw) -> Result<Vec<CheckRecord>> {
    let dims = d.dims(&[1, 2]);
    if dims.is_empty() {
        return Ok(Vec::new());
    }
    let n = dims[d.index % dims.len()];
    if d.index == 0 && n == 1 {
        let k = interval(-1.0, 1.0)?;
        let desc = format!("{};interval[-1.0,1.0]", d.label("translate_polar"));
        return Ok(vec![check_translate_polar(&desc, &k, &[0.5], &d.ctx)?]);
    }
    let (k, kdesc) = d.body(n, false, d.index.is_multiple_of(2))?;
    let u = rng::unit_vector(&mut d.rng.borrow_mut(), n);
    let reach = 1.0 / k.gauge(&u)?;
    let z = scale(&u, d.uniform(0.0, 0.6) * reach);
    let desc = format!("{};{kdesc}", d.label("translate_polar"));
    Ok(vec![check_translate_polar(&desc, &k, &z, &d.ctx)?])
}

fn geometric_grid() -> Vec<f64> {
    (0..24).map(|i| 0.05 * (400f64).powf(i as f64 / 23.0)).collect()
}

fn ball_lemma(d: &Draw) -> Result<Vec<CheckRecord>> {
    let grid = geometric_grid();
    if d.index == 0 {
        let f = |x: f64| (-x).exp();
        let desc = format!("{};F=G=H=exp(-x)", d.label("ball_lemma"));
        return Ok(vec![check_ball_lemma(&desc, &f, &f, &f, 2.0, &grid, &d.ctx)?]);
    }
    if d.index % 2 == 1 || !d.allows(2, PParam::Finite(1.0)) {
        let a = d.uniform(0.5, 3.0);
        let b = d.uniform(0.5, 3.0);
        let c = 0.5 * (a + b) * d.uniform(0.5, 1.0);
        let q = d.choose(&[1.0, 2.0, 3.0]);
        let f = move |x: f64| (-a * x).exp();
        let g = move |x: f64| (-b * x).exp();
        let h = move |x: f64| (-c * x).exp();
        let desc = format!("{};F=exp(-{a:?}x);G=exp(-{b:?}x);H=exp(-{c:?}x)", d.label("ball_lemma"));
        return Ok(vec![check_ball_lemma(&desc, &f, &g, &h, q, &grid, &d.ctx)?]);
    }
    // radial profiles along three-point configurations of a chord movement
    let p = PParam::Finite(1.0);
    let m = draw_moving(d, 2, p, false, "ball_lemma")?;
    let v = m.sys.direction().clone();
    let basis = crate::bodies::linalg::orthonormal_complement(v.unit());
    let point = |x: f64| crate::bodies::linalg::axpy(&scale(&basis[0], x), m.s, v.unit());
    let (xp, yp) = (0.3 * d.normal(), 0.3 * d.normal());
    let (x, y, mid) = (point(xp), point(yp), point(0.5 * (xp + yp)));
    let ev1 = d.ctx.evaluator(m.sys.body_at(m.t1)?, p)?;
    let ev2 = d.ctx.evaluator(m.sys.body_at(m.t2)?, p)?;
    let evm = d.ctx.evaluator(m.sys.body_at(0.5 * (m.t1 + m.t2))?, p)?;
    let profile = |ev: &crate::lp::LpEvaluator, z: &[f64], r: f64| -> f64 {
        ev.lp_support(&scale(z, r)).map(|e| (-e.value).exp()).unwrap_or(f64::NAN)
    };
    let f = |r: f64| profile(&ev1, &x, r);
    let g = |r: f64| profile(&ev2, &y, r);
    let h = |r: f64| profile(&evm, &mid, r);
    let desc = format!("{};x'={xp:?};y'={yp:?};t1={:?};t2={:?};s={:?}", m.desc, m.t1, m.t2, m.s);
    Ok(vec![check_ball_lemma(&desc, &f, &g, &h, 2.0, &grid, &d.ctx)?])
}

fn origin_iff(d: &Draw) -> Result<Vec<CheckRecord>> {
    let Some((n, p)) = d.pick(&[1, 2, 3], ALL_P) else {
        return Ok(Vec::new());
    };
    let label = d.label("origin_iff");
    match d.index {
        0 => {
            let k = ConvexBody::cube(n, 1.0)?;
            check_origin_iff(&format!("{label};cube(n={n})"), &k, p, &d.ctx)
        }
        1 => {
            let k = ConvexBody::cube(n, 1.0)?.translate(&vec![1.0; n]);
            check_origin_iff(&format!("{label};cube(n={n})+corner"), &k, p, &d.ctx)
        }
        i => {
            let (k, kdesc) = d.body(n, false, true)?;
            if i % 4 == 3 {
                let shift: Vec<f64> = rng::unit_vector(&mut d.rng.borrow_mut(), n);
                let (lo, hi) = k.bounding_box();
                let reach: f64 = lo.iter().zip(&hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt();
                let z = scale(&shift, 1.5 * reach);
                let moved = k.translate(&z);
                check_origin_iff(&format!("{label};{kdesc};shift={}", fmt_vec(&z)), &moved, p, &d.ctx)
            } else {
                check_origin_iff(&format!("{label};{kdesc}"), &k, p, &d.ctx)
            }
        }
    }
}

fn conv_polar(d: &Draw) -> Result<Vec<CheckRecord>> {
    let dims = d.dims(&[1, 2, 3]);
    if dims.is_empty() {
        return Ok(Vec::new());
    }
    let n = dims[d.index % dims.len()];
    let (k, kdesc) = d.body(n, false, true)?;
    let (l, ldesc) = if d.index == 0 {
        (k.clone(), "same".to_string())
    } else {
        d.body(n, d.index.is_multiple_of(3), true)?
    };
    let desc = format!("{};K={kdesc};L={ldesc}", d.label("conv_polar"));
    Ok(vec![check_conv_polar(&desc, &k, &l, 1e-9)?])
}

fn infconv(d: &Draw) -> Result<Vec<CheckRecord>> {
    let dims = d.dims(&[1, 2]);
    if dims.is_empty() {
        return Ok(Vec::new());
    }
    let n = dims[d.index % dims.len()];
    let (a, adesc) = d.body(n, false, true)?;
    let (b, bdesc) = if d.index == 0 {
        (a.clone(), "same".to_string())
    } else {
        d.body(n, false, true)?
    };
    let desc = format!("{};A={adesc};B={bdesc}", d.label("infconv"));
    Ok(vec![check_infconv(&desc, &a, &b, &d.ctx)?])
}

fn logconcave_projection(d: &Draw) -> Result<Vec<CheckRecord>> {
    let dims = d.dims(&[1, 2]);
    if dims.is_empty() {
        return Ok(Vec::new());
    }
    let n = dims[d.index % dims.len()];
    let (m, mdesc) = d.body(n, false, false)?;
    if d.index == 0 {
        let desc = format!("{};M={mdesc};phi=const", d.label("logconcave_projection"));
        return Ok(vec![check_logconcave_projection(&desc, &m, &|_| 0.3, &d.ctx)?]);
    }
    // exp(-½ xᵀ S x + <w, x>) with S = Lᵀ L positive semidefinite
    let l: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| d.normal()).collect()).collect();
    let w: Vec<f64> = (0..n).map(|_| d.normal()).collect();
    let (l2, w2) = (l.clone(), w.clone());
    let ln_phi = move |x: &[f64]| -> f64 {
        let q: f64 = l2
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().powi(2))
            .sum();
        -0.5 * q + w2.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    };
    let desc = format!(
        "{};M={mdesc};phi=gaussian(L={:?},w={})",
        d.label("logconcave_projection"),
        l,
        fmt_vec(&w)
    );
    Ok(vec![check_logconcave_projection(&desc, &m, &ln_phi, &d.ctx)?])
}

fn ct_machinery(d: &Draw) -> Result<Vec<CheckRecord>> {
    let config = d.index % 4;
    let (n, p) = match config {
        0 => (1, PParam::Infinity),
        1 => (1, PParam::Finite(1.0)),
        2 => (2, PParam::Finite(1.0)),
        _ => (2, PParam::Infinity),
    };
    if !d.allows(n, p) {
        return Ok(Vec::new());
    }
    let label = d.label("ct_machinery");
    let (k, kdesc) = match config {
        0 => (interval(-1.0, 1.0)?, "interval[-1.0,1.0]".to_string()),
        1 => d.body(1, false, false)?,
        2 => d.body(2, true, true)?,
        _ => d.body(2, false, true)?,
    };
    let l = k.negate();
    check_ct_machinery(&format!("{label};K={kdesc};L=-K"), &k, &l, p, &T_GRID, RS_RESOLUTION, &d.ctx)
}

/// Pairs for the Rogers-Shephard families: `L = -K`, or `L = K` for
/// symmetric `K`.
fn rs_pair(d: &Draw, n: usize) -> Result<(ConvexBody, ConvexBody, String)> {
    if d.index % 3 == 2 {
        let (k, kdesc) = d.body(n, true, true)?;
        return Ok((k.clone(), k, format!("K={kdesc};L=K")));
    }
    let centered = n > 1 && (d.index / 2).is_multiple_of(2);
    let (k, kdesc) = d.body(n, false, centered)?;
    let l = k.negate();
    Ok((k, l, format!("K={kdesc};L=-K")))
}

fn reverse_rs(d: &Draw) -> Result<Vec<CheckRecord>> {
    let Some((n, p)) = d.pick(&[1, 2], P_RS) else {
        return Ok(Vec::new());
    };
    let label = d.label("reverse_rs");
    if d.index == 0 && d.allows(1, PParam::Infinity) {
        let k = interval(-1.0, 1.0)?;
        let desc = format!("{label};K=interval[-1.0,1.0];L=K");
        return Ok(vec![check_reverse_rs(&desc, &k, &k, PParam::Infinity, RS_RESOLUTION, &d.ctx)?]);
    }
    let (k, l, pdesc) = rs_pair(d, n)?;
    Ok(vec![check_reverse_rs(&format!("{label};{pdesc}"), &k, &l, p, RS_RESOLUTION, &d.ctx)?])
}

fn rs_forward(d: &Draw) -> Result<Vec<CheckRecord>> {
    let Some((n, p)) = d.pick(&[1, 2], P_RS) else {
        return Ok(Vec::new());
    };
    let label = d.label("rs_forward");
    if d.index == 0 && d.allows(1, PParam::Infinity) {
        // equality is approached as L grows
        let (k, l) = (interval(-1.0, 1.0)?, interval(-1e4, 1e4)?);
        let desc = format!("{label};K=interval[-1.0,1.0];L=interval[-1e4,1e4]");
        return Ok(vec![check_rs_forward(&desc, &k, &l, PParam::Infinity, RS_RESOLUTION, &d.ctx)?]);
    }
    let (k, l, pdesc) = rs_pair(d, n)?;
    Ok(vec![check_rs_forward(&format!("{label};{pdesc}"), &k, &l, p, RS_RESOLUTION, &d.ctx)?])
}

fn classical_rs_forward(d: &Draw) -> Result<Vec<CheckRecord>> {
    let dims = d.dims(&[1, 2, 3]);
    if dims.is_empty() {
        return Ok(Vec::new());
    }
    let n = dims[d.index % dims.len()];
    let label = d.label("classical_rs_forward");
    if d.index == 0 && n == 1 {
        let (k, l) = (interval(-1.0, 1.0)?, interval(-1e4, 1e4)?);
        let desc = format!("{label};K=interval[-1.0,1.0];L=interval[-1e4,1e4]");
        return Ok(vec![check_classical_rs_forward(&desc, &k, &l, &d.ctx)?]);
    }
    let (k, kdesc) = d.body(n, false, true)?;
    let (l, ldesc) = d.body(n, d.index.is_multiple_of(3), true)?;
    let desc = format!("{label};K={kdesc};L={ldesc}");
    Ok(vec![check_classical_rs_forward(&desc, &k, &l, &d.ctx)?])
}

fn classical_rs_reverse(d: &Draw) -> Result<Vec<CheckRecord>> {
    let dims = d.dims(&[1, 2, 3]);
    if dims.is_empty() {
        return Ok(Vec::new());
    }
    let n = dims[d.index % dims.len()];
    let label = d.label("classical_rs_reverse");
    if d.index == 0 && n == 1 {
        let k = interval(-1.0, 1.0)?;
        let desc = format!("{label};K=interval[-1.0,1.0];L=K");
        return Ok(vec![check_classical_rs_reverse(&desc, &k, &k, &d.ctx)?]);
    }
    let (k, kdesc) = d.body(n, false, d.index.is_multiple_of(2))?;
    let desc = format!("{label};K={kdesc};L=-K");
    Ok(vec![check_classical_rs_reverse(&desc, &k, &k.negate(), &d.ctx)?])
}

fn fixed<const N: usize>(_: &SuiteConfig) -> usize {
    N
}

fn sandwich_count(cfg: &SuiteConfig) -> usize {
    30 * cfg.p_values.len()
}

/// All families in canonical order.
pub fn families() -> Vec<Family> {
    macro_rules! family {
        ($id:literal, $count:expr, $run:expr) => {
            Family {
                id: $id,
                count: $count,
                run: $run,
            }
        };
    }
    vec![
        family!("support_convexity", fixed::<200>, support_convexity),
        family!("three_point", fixed::<100>, three_point),
        family!("section_inclusion", fixed::<50>, section_inclusion),
        family!("slice_concavity", fixed::<100>, slice_concavity),
        family!("section_symmetry", fixed::<30>, section_symmetry),
        family!("reflection_sections", fixed::<30>, reflection_sections),
        family!("steiner_monotone", fixed::<50>, steiner_monotone),
        family!("santalo_p", fixed::<40>, santalo_p),
        family!("prop_bound", fixed::<40>, prop_bound),
        family!("sandwich", sandwich_count, sandwich),
        family!("translate_polar", fixed::<30>, translate_polar),
        family!("ball_lemma", fixed::<20>, ball_lemma),
        family!("origin_iff", fixed::<20>, origin_iff),
        family!("conv_polar", fixed::<30>, conv_polar),
        family!("infconv", fixed::<30>, infconv),
        family!("logconcave_projection", fixed::<20>, logconcave_projection),
        family!("ct_machinery", fixed::<4>, ct_machinery),
        family!("reverse_rs", fixed::<30>, reverse_rs),
        family!("rs_forward", fixed::<30>, rs_forward),
        family!("classical_rs_forward", fixed::<30>, classical_rs_forward),
        family!("classical_rs_reverse", fixed::<30>, classical_rs_reverse),
    ]
}

/// Runs every instance of one family. Records are numbered per `check_id`
/// in instance order; evaluation errors become failed records.
pub fn run_family(cfg: &SuiteConfig, family: &Family) -> Vec<CheckRecord> {
    let code = rng::fnv1a(family.id) as u32;
    let count = family.instances(cfg);
    let batches: Vec<Vec<CheckRecord>> = (0..count)
        .into_par_iter()
        .map(|index| {
            let mut stream = rng::stream(cfg.master_seed, code, index as u32);
            let seed = stream.gen();
            let draw = Draw {
                cfg,
                index,
                ctx: CheckContext {
                    base_tol: cfg.base_tol,
                    mc_samples: cfg.mc_samples,
                    seed,
                },
                rng: std::cell::RefCell::new(stream),
            };
            let start = Instant::now();
            let mut records = match (family.run)(&draw) {
                Ok(r) => r,
                Err(e) => vec![CheckRecord::failed(
                    family.id,
                    format!("{}#{index};master_seed={}", family.id, cfg.master_seed),
                    &e,
                )],
            };
            let elapsed = start.elapsed().as_millis() as u64;
            let share = elapsed / records.len().max(1) as u64;
            for r in &mut records {
                r.runtime_ms = share;
            }
            records
        })
        .collect();
    let mut out: Vec<CheckRecord> = batches.into_iter().flatten().collect();
    let mut counters: std::collections::BTreeMap<String, usize> = Default::default();
    for r in &mut out {
        let c = counters.entry(r.check_id.clone()).or_insert(0);
        r.index = *c;
        *c += 1;
    }
    out
}

/// Runs every selected family; records come back sorted by
/// `(check_id, index)`.
pub fn run_suite(cfg: &SuiteConfig) -> Vec<CheckRecord> {
    let mut out: Vec<CheckRecord> = families()
        .iter()
        .filter(|f| cfg.wants(f.id))
        .flat_map(|f| run_family(cfg, f))
        .collect();
    out.sort_by(|a, b| a.check_id.cmp(&b.check_id).then(a.index.cmp(&b.index)));
    out
}
