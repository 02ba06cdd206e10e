mod manifest;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lpgeom::bodies::{ConvexBody, Direction};
use lpgeom::format::{parse_body, parse_config, parse_speed, BodySpec};
use lpgeom::lp::{default_resolution, mahler_p_ball, LpEvaluator, PParam};
use lpgeom::quadrature::Estimate;
use lpgeom::shadow::{make_parallel_chord, SpeedFunction};
use lpgeom::verify::{failure_count, run_suite, summarize, to_csv, SuiteConfig};

use manifest::RunManifest;

const DEFAULT_TOL: f64 = 1e-10;
const DEFAULT_MC_SAMPLES: u64 = 200_000;
const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(name = "lpgeom", version, about = "L_p support functions, L_p polars, L_p Mahler volumes and shadow systems")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed for Monte Carlo paths; the master seed of `verify`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Quadrature tolerance; the base slack of `verify`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Monte Carlo sample count.
    #[arg(long, global = true)]
    mc_samples: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the L_p support function h_{p,K}(y).
    Support {
        /// Body JSON, inline or a file path.
        #[arg(long)]
        body: String,
        #[arg(long)]
        p: PParam,
        #[arg(long, allow_hyphen_values = true)]
        y: Floats,
    },
    /// Volume of the L_p polar body or of one of its sections.
    Polar {
        #[arg(long)]
        body: String,
        #[arg(long)]
        p: PParam,
        /// Sphere grid resolution.
        #[arg(long)]
        resolution: Option<usize>,
        /// Section `v,s`: direction components (or `e<k>`) followed by the height.
        #[arg(long, allow_hyphen_values = true)]
        section: Option<SectionArg>,
        /// Write the inner and outer approximating polytopes to this file.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Translate the body so its barycenter is the origin.
        #[arg(long)]
        translate: bool,
    },
    /// L_p Mahler volumes against the Euclidean ball, as CSV.
    Mahler {
        #[arg(long)]
        body: String,
        #[arg(long, conflicts_with = "p_sweep", required_unless_present = "p_sweep")]
        p: Option<PParam>,
        /// Comma-separated list of exponents.
        #[arg(long, value_delimiter = ',')]
        p_sweep: Vec<PParam>,
    },
    /// A quantity along a parallel chord movement, as CSV over t.
    Shadow {
        #[arg(long)]
        body: String,
        /// Direction of the movement.
        #[arg(long, allow_hyphen_values = true)]
        v: Floats,
        /// Speed JSON, inline or a file path.
        #[arg(long)]
        speed: String,
        /// Comma-separated times.
        #[arg(long, allow_hyphen_values = true)]
        t_grid: Floats,
        #[arg(long, value_enum)]
        quantity: Quantity,
        #[arg(long, default_value = "1")]
        p: PParam,
        /// Argument of the support function.
        #[arg(long, allow_hyphen_values = true)]
        y: Option<Floats>,
        /// Height of the section along `v`.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        s: f64,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Run the inequality suite and write JSON and CSV reports.
    Verify {
        /// Suite configuration JSON file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Restrict to these check families.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        p_values: Vec<PParam>,
        /// Instances per check family.
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long, default_value = "lpgeom-report.json")]
        json: PathBuf,
        #[arg(long, default_value = "lpgeom-report.csv")]
        csv: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Quantity {
    Support,
    Slicevol,
    Polarvol,
}

#[derive(Clone, Debug)]
struct Floats(Vec<f64>);

impl FromStr for Floats {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("invalid number `{t}`")))
            .collect::<Result<Vec<_>, _>>()
            .map(Floats)
    }
}

#[derive(Clone, Debug)]
enum Axis {
    Basis(usize),
    Vector(Vec<f64>),
}

#[derive(Clone, Debug)]
struct SectionArg {
    v: Axis,
    s: f64,
}

impl FromStr for SectionArg {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() < 2 {
            return Err("expected `v,s`".into());
        }
        let (last, head) = parts.split_last().unwrap();
        let s: f64 = last.parse().map_err(|_| format!("invalid height `{last}`"))?;
        let v = match head {
            [e] if e.starts_with('e') => {
                let k: usize = e[1..].parse().map_err(|_| format!("invalid axis `{e}`"))?;
                if k == 0 {
                    return Err("axes are numbered from 1".into());
                }
                Axis::Basis(k - 1)
            }
            _ => Axis::Vector(
                head.iter()
                    .map(|t| t.parse::<f64>().map_err(|_| format!("invalid number `{t}`")))
                    .collect::<Result<_, _>>()?,
            ),
        };
        Ok(SectionArg { v, s })
    }
}

enum Failure {
    Usage(String),
    Precondition(String),
    Checks(usize),
}

impl From<lpgeom::Error> for Failure {
    fn from(e: lpgeom::Error) -> Self {
        if e.is_parse() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Precondition(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks(n)) => {
            eprintln!("{n} check(s) failed");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Precondition(m)) => {
            eprintln!("precondition violated: {m}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let c = &cli.common;
    if let Some(t) = c.tol {
        if !t.is_finite() || t <= 0.0 {
            return Err(Failure::Usage("--tol must be a positive number".into()));
        }
    }
    match cli.command {
        Command::Support { body, p, y } => {
            let ev = evaluator(load_body(&body)?, p, c)?;
            print_estimate(ev.lp_support(&y.0)?);
            Ok(())
        }
        Command::Polar {
            body,
            p,
            resolution,
            section,
            dump,
            translate,
        } => polar(c, &body, p, resolution, section, dump, translate),
        Command::Mahler { body, p, p_sweep } => {
            let ps = match p {
                Some(p) => vec![p],
                None => p_sweep,
            };
            mahler(c, &body, &ps)
        }
        Command::Shadow {
            body,
            v,
            speed,
            t_grid,
            quantity,
            p,
            y,
            s,
            resolution,
        } => shadow(c, &body, &v.0, &speed, &t_grid.0, quantity, p, y, s, resolution),
        Command::Verify {
            config,
            checks,
            dims,
            p_values,
            instances,
            json,
            csv,
        } => {
            let mut cfg = match &config {
                Some(path) => parse_config(&read(path)?)?,
                None => SuiteConfig::default(),
            };
            if !checks.is_empty() {
                cfg.checks = Some(checks);
            }
            if !dims.is_empty() {
                cfg.dimensions = dims;
            }
            if !p_values.is_empty() {
                cfg.p_values = p_values;
            }
            if instances.is_some() {
                cfg.instances_per_check = instances;
            }
            if let Some(s) = c.seed {
                cfg.master_seed = s;
            }
            if let Some(t) = c.tol {
                cfg.base_tol = t;
            }
            if let Some(m) = c.mc_samples {
                cfg.mc_samples = m;
            }
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            verify(&cfg, &json, &csv)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Inline JSON when the argument starts with `{`, otherwise a file path.
fn inline_or_file(arg: &str) -> Result<String, Failure> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        read(Path::new(arg))
    }
}

fn load_body(arg: &str) -> Result<ConvexBody, Failure> {
    Ok(parse_body(&inline_or_file(arg)?)?)
}

fn evaluator(body: ConvexBody, p: PParam, c: &Common) -> Result<LpEvaluator, Failure> {
    Ok(LpEvaluator::with_options(
        body,
        p,
        c.tol.unwrap_or(DEFAULT_TOL),
        c.mc_samples.unwrap_or(DEFAULT_MC_SAMPLES),
        c.seed.unwrap_or(DEFAULT_SEED),
    )?)
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn print_estimate(e: Estimate) {
    println!("{}", serde_json::to_string(&e).expect("estimate serializes"));
}

fn direction(axis: &Axis, n: usize) -> Result<Direction, Failure> {
    match axis {
        Axis::Basis(k) if *k < n => Ok(Direction::axis(n, *k)),
        Axis::Basis(k) => Err(Failure::Usage(format!("axis e{} in dimension {n}", k + 1))),
        Axis::Vector(v) if v.len() == n => Ok(Direction::new(v)?),
        Axis::Vector(v) => Err(Failure::Usage(format!(
            "direction has {} components in dimension {n}",
            v.len()
        ))),
    }
}

fn polar(
    c: &Common,
    body: &str,
    p: PParam,
    resolution: Option<usize>,
    section: Option<SectionArg>,
    dump: Option<PathBuf>,
    translate: bool,
) -> Outcome {
    let mut k = load_body(body)?;
    if translate {
        let b = k.barycenter()?;
        k = k.translate(&b.iter().map(|x| -x).collect::<Vec<_>>());
    }
    if !k.origin_interior() {
        return Err(lpgeom::Error::OriginNotInterior.into());
    }
    let n = k.dim();
    let res = resolution.unwrap_or_else(|| default_resolution(n));
    let mut ev = evaluator(k, p, c)?;
    if let Some(r) = resolution {
        ev = ev.with_resolution(r);
    }
    let est = match &section {
        Some(sec) => ev.lp_polar_section_volume(&direction(&sec.v, n)?, sec.s, res)?,
        None => ev.lp_polar_volume()?,
    };
    if let Some(path) = dump {
        let approx = ev.lp_polar_approx(res)?;
        let doc = json!({
            "inner": BodySpec::of(&approx.inner),
            "outer": BodySpec::of(&approx.outer),
        });
        write(&path, &serde_json::to_string_pretty(&doc).expect("json"))?;
    }
    print_estimate(est);
    Ok(())
}

fn ratio(a: Estimate, b: Estimate) -> (f64, f64) {
    let r = a.value / b.value;
    (r, r.abs() * (a.error / a.value.abs() + b.error / b.value.abs()))
}

fn mahler(c: &Common, body: &str, ps: &[PParam]) -> Outcome {
    let k = load_body(body)?;
    let n = k.dim();
    let mut out = String::from("p,mahler,mahler_error,ball,ball_error,ratio,ratio_error\n");
    for &p in ps {
        let m = evaluator(k.clone(), p, c)?.mahler_p()?;
        let b = mahler_p_ball(n, p)?;
        let (r, re) = ratio(m, b);
        let _ = writeln!(
            out,
            "{p},{},{},{},{},{},{}",
            num(m.value),
            num(m.error),
            num(b.value),
            num(b.error),
            num(r),
            num(re)
        );
    }
    print!("{out}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn shadow(
    c: &Common,
    body: &str,
    v: &[f64],
    speed: &str,
    ts: &[f64],
    quantity: Quantity,
    p: PParam,
    y: Option<Floats>,
    s: f64,
    resolution: Option<usize>,
) -> Outcome {
    let k = load_body(body)?;
    let n = k.dim();
    let v = direction(&Axis::Vector(v.to_vec()), n)?;
    let spec = parse_speed(&inline_or_file(speed)?)?;
    let beta = SpeedFunction::from_spec(&spec, &k, &v)?;
    let sys = make_parallel_chord(&k, &v, beta)?;
    let y = match (quantity, y) {
        (Quantity::Support, None) => return Err(Failure::Usage("--quantity support needs --y".into())),
        (_, y) => y.map(|f| f.0),
    };
    let (lo, hi) = sys.validity();
    let mut out = String::from("t,value,error\n");
    for &t in ts {
        if !sys.is_valid_at(t) {
            eprintln!("warning: t = {t} lies outside the validity interval [{lo}, {hi}] and was dropped");
            continue;
        }
        let kt = sys.body_at(t)?;
        let mut ev = evaluator(kt, p, c)?;
        if let Some(r) = resolution {
            ev = ev.with_resolution(r);
        }
        let e = match quantity {
            Quantity::Support => ev.lp_support(y.as_deref().unwrap_or_default())?,
            Quantity::Slicevol => {
                ev.lp_polar_section_volume(&v, s, resolution.unwrap_or_else(|| default_resolution(n)))?
            }
            Quantity::Polarvol => ev.lp_polar_volume()?,
        };
        let _ = writeln!(out, "{},{},{}", num(t), num(e.value), num(e.error));
    }
    print!("{out}");
    Ok(())
}

fn verify(cfg: &SuiteConfig, json_path: &Path, csv_path: &Path) -> Outcome {
    let snapshot = serde_json::to_value(cfg).expect("config serializes");
    let mut manifest = RunManifest::new(snapshot, cfg.master_seed);
    let records = run_suite(cfg);
    manifest.finish();
    let summary = summarize(&records);
    write(csv_path, &to_csv(&records))?;
    let report = json!({
        "manifest": manifest,
        "summary": summary,
        "records": records,
    });
    write(json_path, &serde_json::to_string_pretty(&report).expect("json"))?;

    println!(
        "{:<30} {:>9} {:>8} {:>11} {:>6} {:>14}",
        "check_id", "instances", "failures", "diagnostics", "tight", "worst_margin"
    );
    for s in &summary {
        println!(
            "{:<30} {:>9} {:>8} {:>11} {:>6} {:>14.6e}",
            s.check_id, s.instances, s.failures, s.diagnostics, s.tight, s.worst_margin
        );
    }
    let failures = failure_count(&records);
    println!("{} records, {failures} failures", records.len());
    if failures > 0 {
        return Err(Failure::Checks(failures));
    }
    Ok(())
}
