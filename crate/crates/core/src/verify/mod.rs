//! Executable inequality suite: every check compares two estimated sides
//! with an explicit error budget.

mod checks;
mod suite;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::lp::PParam;
use crate::quadrature::Estimate;
use crate::rng;

pub use checks::*;
pub use suite::{families, run_family, run_suite, Family};

/// One evaluated instance of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check_id: String,
    pub index: usize,
    pub instance: String,
    pub instance_hash: String,
    pub lhs: Estimate,
    pub rhs: Estimate,
    /// Signed; the check passes when `margin >= -slack`.
    pub margin: f64,
    /// `base_tol + 3 (lhs.error + rhs.error)`.
    pub slack: f64,
    pub pass: bool,
    /// Diagnostics are reported but never count as failures.
    pub diagnostic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub runtime_ms: u64,
}

impl CheckRecord {
    /// Record for `lhs >= rhs`, margin `lhs - rhs`.
    pub fn inequality(check_id: &str, instance: String, lhs: Estimate, rhs: Estimate, base_tol: f64) -> Self {
        let margin = lhs.value - rhs.value;
        Self::with_margin(check_id, instance, lhs, rhs, margin, base_tol)
    }

    /// Record for `lhs = rhs`, margin `-|lhs - rhs|`.
    pub fn identity(check_id: &str, instance: String, lhs: Estimate, rhs: Estimate, base_tol: f64) -> Self {
        let margin = -(lhs.value - rhs.value).abs();
        Self::with_margin(check_id, instance, lhs, rhs, margin, base_tol)
    }

    pub fn with_margin(
        check_id: &str,
        instance: String,
        lhs: Estimate,
        rhs: Estimate,
        margin: f64,
        base_tol: f64,
    ) -> Self {
        let slack = base_tol + 3.0 * (lhs.error + rhs.error);
        let pass = margin.is_finite() && margin >= -slack;
        CheckRecord {
            check_id: check_id.to_string(),
            index: 0,
            instance_hash: instance_hash(&instance),
            instance,
            lhs,
            rhs,
            margin,
            slack,
            pass,
            diagnostic: false,
            note: None,
            runtime_ms: 0,
        }
    }

    /// A failed record for an instance whose evaluation raised an error.
    pub fn failed(check_id: &str, instance: String, err: &crate::Error) -> Self {
        let nan = Estimate::exact(f64::NAN);
        CheckRecord {
            check_id: check_id.to_string(),
            index: 0,
            instance_hash: instance_hash(&instance),
            instance,
            lhs: nan,
            rhs: nan,
            margin: f64::NAN,
            slack: f64::NAN,
            pass: false,
            diagnostic: false,
            note: Some(err.to_string()),
            runtime_ms: 0,
        }
    }

    pub fn as_diagnostic(mut self) -> Self {
        self.diagnostic = true;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Whether `|margin| <= slack`: the instance sits on the equality case.
    pub fn is_tight(&self) -> bool {
        self.margin.abs() <= self.slack
    }

    pub fn counts_as_failure(&self) -> bool {
        !self.pass && !self.diagnostic
    }
}

pub fn instance_hash(instance: &str) -> String {
    format!("{:016x}", rng::fnv1a(instance))
}

/// Suite configuration; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub dimensions: Vec<usize>,
    pub p_values: Vec<PParam>,
    /// Overrides every family's own instance count when set.
    pub instances_per_check: Option<usize>,
    pub master_seed: u64,
    pub base_tol: f64,
    pub mc_samples: u64,
    /// Restricts the run to these check families.
    pub checks: Option<Vec<String>>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            dimensions: vec![1, 2, 3],
            p_values: vec![
                PParam::Finite(0.5),
                PParam::Finite(1.0),
                PParam::Finite(2.0),
                PParam::Infinity,
            ],
            instances_per_check: None,
            master_seed: 1,
            base_tol: 1e-6,
            mc_samples: 200_000,
            checks: None,
        }
    }
}

impl SuiteConfig {
    /// A configuration that runs nothing.
    pub fn empty() -> Self {
        SuiteConfig {
            dimensions: Vec::new(),
            p_values: Vec::new(),
            checks: Some(Vec::new()),
            ..SuiteConfig::default()
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if !(self.base_tol >= 0.0) || !self.base_tol.is_finite() {
            return Err(crate::Error::InvalidParameter("base_tol must be a finite non-negative number".into()));
        }
        if let Some(d) = self.dimensions.iter().find(|&&d| d == 0 || d > 4) {
            return Err(crate::Error::UnsupportedDimension(*d));
        }
        if self.mc_samples == 0 {
            return Err(crate::Error::InvalidParameter("mc_samples must be positive".into()));
        }
        if let Some(list) = &self.checks {
            let known: Vec<&str> = families().iter().map(|f| f.id).collect();
            if let Some(bad) = list.iter().find(|c| !known.contains(&c.as_str())) {
                return Err(crate::Error::InvalidParameter(format!("unknown check `{bad}`")));
            }
        }
        Ok(())
    }

    pub fn wants(&self, id: &str) -> bool {
        self.checks.as_ref().is_none_or(|c| c.iter().any(|x| x == id))
    }
}

/// Per-check totals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub check_id: String,
    pub instances: usize,
    pub failures: usize,
    pub diagnostics: usize,
    pub tight: usize,
    pub worst_margin: f64,
}

pub fn summarize(records: &[CheckRecord]) -> Vec<CheckSummary> {
    let mut map: BTreeMap<&str, CheckSummary> = BTreeMap::new();
    for r in records {
        let e = map.entry(&r.check_id).or_insert_with(|| CheckSummary {
            check_id: r.check_id.clone(),
            instances: 0,
            failures: 0,
            diagnostics: 0,
            tight: 0,
            worst_margin: f64::INFINITY,
        });
        e.instances += 1;
        if r.counts_as_failure() {
            e.failures += 1;
        }
        if r.diagnostic {
            e.diagnostics += 1;
        } else {
            if r.is_tight() {
                e.tight += 1;
            }
            if r.margin.is_nan() {
                e.worst_margin = f64::NAN;
            } else if !e.worst_margin.is_nan() {
                e.worst_margin = e.worst_margin.min(r.margin);
            }
        }
    }
    map.into_values().collect()
}

pub fn failure_count(records: &[CheckRecord]) -> usize {
    records.iter().filter(|r| r.counts_as_failure()).count()
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// CSV report, one row per record in canonical order, numbers at 17
/// significant digits.
pub fn to_csv(records: &[CheckRecord]) -> String {
    let mut out = String::from(
        "check_id,index,instance_hash,lhs,lhs_error,rhs,rhs_error,margin,slack,pass,diagnostic\n",
    );
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.check_id,
            r.index,
            r.instance_hash,
            num(r.lhs.value),
            num(r.lhs.error),
            num(r.rhs.value),
            num(r.rhs.error),
            num(r.margin),
            num(r.slack),
            r.pass,
            r.diagnostic
        );
    }
    out
}

/// Which checks exercise which result.
pub fn coverage_manifest() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("convexity in t of the L_p support function of a shadow system", vec!["support_convexity"]),
        ("three-point L_p support inequality with harmonic-mean scaling", vec!["three_point"]),
        ("midpoint inclusion of L_p polar sections along a chord movement", vec!["section_inclusion"]),
        ("concavity of L_p polar section volumes along a chord movement", vec!["slice_concavity"]),
        ("sections of L_p polars of symmetric bodies at opposite heights", vec!["section_symmetry"]),
        ("L_p polar sections of the reflected body under the Steiner speed", vec!["reflection_sections"]),
        ("Steiner symmetrization enlarges the L_p polar of a symmetric body", vec!["steiner_monotone"]),
        ("L_p Blaschke-Santalo inequality for symmetric bodies", vec!["santalo_p"]),
        ("L_p Mahler volume bound for bodies centered at the barycenter", vec!["prop_bound"]),
        ("inclusions between the polar and the L_p polar", vec!["sandwich"]),
        ("volume of the polar about an interior point", vec!["translate_polar"]),
        ("Ball's inequality for radial integrals", vec!["ball_lemma"]),
        ("origin interior to K iff interior to the L_p polar", vec!["origin_iff"]),
        ("polar of an intersection of polars is the convex hull", vec!["conv_polar"]),
        ("infimal convolution of gauges is the gauge of the convex hull", vec!["infconv"]),
        ("log-concave average bounded by the value at the weighted barycenter", vec!["logconcave_projection"]),
        ("gauge of a product body", vec!["ct_machinery"]),
        ("level-set construction behind the reverse Rogers-Shephard bound", vec!["ct_machinery"]),
        ("reverse Rogers-Shephard type inequality for L_p polars", vec!["reverse_rs"]),
        ("forward Rogers-Shephard type inequality for L_p polars", vec!["rs_forward"]),
        ("classical Rogers-Shephard inequalities for polars", vec!["classical_rs_forward", "classical_rs_reverse"]),
    ]
}
