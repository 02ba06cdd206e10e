//! JSON formats for bodies, speed functions and suite configurations.
//!
//! Bodies:
//!
//! ```json
//! {"type":"vpoly","vertices":[[1,0],[0,1],[-1,-1]]}
//! {"type":"hpoly","normals":[[1,0],[-1,0],[0,1],[0,-1]],"offsets":[1,1,1,1]}
//! {"type":"ball","center":[0,0],"radius":1.0}
//! {"type":"cube","n":2,"half":1.0}
//! {"type":"simplex","n":2}
//! {"type":"random_poly","n":2,"vertices":10,"seed":42,"symmetric":true}
//! ```
//!
//! Speed functions:
//!
//! ```json
//! {"kind":"steiner"}
//! {"kind":"const","value":0.5}
//! {"kind":"affine","coeffs":[0.2],"offset":0.1}
//! {"kind":"pl","points":[[-1,0.0],[0,0.3],[1,0.0]]}
//! ```
//!
//! Suite configuration, every field optional:
//!
//! ```json
//! {"dimensions":[1,2,3],"p_values":[0.5,1,2,"inf"],"instances_per_check":10,
//!  "master_seed":1,"base_tol":1e-6,"mc_samples":200000,"checks":["santalo_p"]}
//! ```

use serde::{Deserialize, Serialize};

use crate::bodies::{hull, ConvexBody};
use crate::error::{Error, Result};
use crate::shadow::SpeedSpec;
use crate::verify::SuiteConfig;

/// Largest point or halfspace list accepted from JSON.
pub const MAX_ENTRIES: usize = 100_000;

/// A body in its JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Vpoly {
        vertices: Vec<Vec<f64>>,
    },
    Hpoly {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Cube {
        n: usize,
        #[serde(default = "one")]
        half: f64,
    },
    Simplex {
        n: usize,
    },
    RandomPoly {
        n: usize,
        vertices: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        symmetric: bool,
    },
}

fn one() -> f64 {
    1.0
}

impl BodySpec {
    /// Builds the body; geometric failures keep their own error kinds.
    pub fn build(&self) -> Result<ConvexBody> {
        match self {
            BodySpec::Vpoly { vertices } => {
                check_rows(vertices, "vertices")?;
                hull(vertices)
            }
            BodySpec::Hpoly { normals, offsets } => {
                check_rows(normals, "normals")?;
                if normals.len() != offsets.len() {
                    return Err(Error::Parse(format!(
                        "{} normals but {} offsets",
                        normals.len(),
                        offsets.len()
                    )));
                }
                ConvexBody::from_halfspaces(normals, offsets)
            }
            BodySpec::Ball { center, radius } => ConvexBody::ball(center.clone(), *radius),
            BodySpec::Cube { n, half } => ConvexBody::cube(*n, *half),
            BodySpec::Simplex { n } => ConvexBody::simplex(*n),
            BodySpec::RandomPoly {
                n,
                vertices,
                seed,
                symmetric,
            } => ConvexBody::random_poly(*n, *vertices, *seed, *symmetric),
        }
    }

    /// The explicit form of a body: vertices, halfspaces or a ball.
    pub fn of(body: &ConvexBody) -> Self {
        match body {
            ConvexBody::VPoly(p) => BodySpec::Vpoly {
                vertices: p.vertices().to_vec(),
            },
            ConvexBody::HPoly(p) => BodySpec::Hpoly {
                normals: p.normals().to_vec(),
                offsets: p.offsets().to_vec(),
            },
            ConvexBody::Ball(b) => BodySpec::Ball {
                center: b.center.clone(),
                radius: b.radius,
            },
        }
    }
}

fn check_rows(rows: &[Vec<f64>], what: &str) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Parse(format!("`{what}` is empty")));
    }
    if rows.len() > MAX_ENTRIES {
        return Err(Error::Parse(format!("`{what}` has more than {MAX_ENTRIES} rows")));
    }
    let n = rows[0].len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("rows of `{what}` differ in length")));
    }
    Ok(())
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn parse_body_spec(text: &str) -> Result<BodySpec> {
    serde_json::from_str(text).map_err(parse_err)
}

/// Parses and builds a body.
pub fn parse_body(text: &str) -> Result<ConvexBody> {
    parse_body_spec(text)?.build()
}

pub fn body_to_json(body: &ConvexBody) -> String {
    serde_json::to_string(&BodySpec::of(body)).expect("body serializes")
}

pub fn parse_speed(text: &str) -> Result<SpeedSpec> {
    let spec: SpeedSpec = serde_json::from_str(text).map_err(parse_err)?;
    if let SpeedSpec::Pl { points } = &spec {
        check_rows(points, "points")?;
    }
    Ok(spec)
}

/// Parses and validates a suite configuration; invalid values are parse
/// errors here.
pub fn parse_config(text: &str) -> Result<SuiteConfig> {
    let cfg: SuiteConfig = serde_json::from_str(text).map_err(parse_err)?;
    cfg.validate().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::PParam;

    #[test]
    fn body_examples_parse() {
        let cases = [
            (r#"{"type":"vpoly","vertices":[[1,0],[0,1],[-1,-1]]}"#, 1.5),
            (
                r#"{"type":"hpoly","normals":[[1,0],[-1,0],[0,1],[0,-1]],"offsets":[1,1,1,1]}"#,
                4.0,
            ),
            (r#"{"type":"cube","n":2,"half":1.0}"#, 4.0),
            (r#"{"type":"cube","n":3}"#, 8.0),
            (r#"{"type":"simplex","n":2}"#, 0.5),
        ];
        for (text, vol) in cases {
            let k = parse_body(text).unwrap();
            assert!((k.volume().unwrap() - vol).abs() < 1e-12, "{text}");
        }
        let b = parse_body(r#"{"type":"ball","center":[0,0],"radius":1.0}"#).unwrap();
        assert!(b.is_ball());
        let r = parse_body(r#"{"type":"random_poly","n":2,"vertices":10,"seed":42,"symmetric":true}"#)
            .unwrap();
        assert_eq!(r, ConvexBody::random_poly(2, 10, 42, true).unwrap());
    }

    #[test]
    fn malformed_bodies_are_parse_errors() {
        for text in [
            "",
            "{",
            r#"{"type":"blob"}"#,
            r#"{"type":"cube"}"#,
            r#"{"type":"cube","n":2,"extra":1}"#,
            r#"{"type":"vpoly","vertices":[]}"#,
            r#"{"type":"vpoly","vertices":[[1,0],[0]]}"#,
            r#"{"type":"hpoly","normals":[[1]],"offsets":[1,2]}"#,
        ] {
            assert!(parse_body(text).unwrap_err().is_parse(), "{text}");
        }
    }

    #[test]
    fn degenerate_bodies_keep_their_kind() {
        let e = parse_body(r#"{"type":"vpoly","vertices":[[0,0],[1,1],[2,2]]}"#).unwrap_err();
        assert!(!e.is_parse());
        let e = parse_body(r#"{"type":"ball","center":[0],"radius":-1}"#).unwrap_err();
        assert!(matches!(e, Error::DegenerateInput(_)));
    }

    #[test]
    fn bodies_round_trip() {
        for k in [
            ConvexBody::cube(2, 1.5).unwrap(),
            ConvexBody::simplex(3).unwrap(),
            ConvexBody::ball(vec![0.5, 0.0], 2.0).unwrap(),
        ] {
            let back = parse_body(&body_to_json(&k)).unwrap();
            assert!((back.volume().unwrap() - k.volume().unwrap()).abs() < 1e-12);
            assert_eq!(back.dim(), k.dim());
        }
    }

    #[test]
    fn speeds_parse() {
        assert_eq!(parse_speed(r#"{"kind":"steiner"}"#).unwrap(), SpeedSpec::Steiner);
        assert_eq!(
            parse_speed(r#"{"kind":"const","value":0.5}"#).unwrap(),
            SpeedSpec::Const { value: 0.5 }
        );
        assert_eq!(
            parse_speed(r#"{"kind":"affine","coeffs":[0.2],"offset":0.1}"#).unwrap(),
            SpeedSpec::Affine {
                coeffs: vec![0.2],
                offset: 0.1
            }
        );
        assert!(parse_speed(r#"{"kind":"pl","points":[[0,1],[1,0]]}"#).is_ok());
        assert!(parse_speed(r#"{"kind":"pl","points":[]}"#).unwrap_err().is_parse());
        assert!(parse_speed(r#"{"kind":"warp"}"#).unwrap_err().is_parse());
    }

    #[test]
    fn config_parses_with_defaults() {
        assert_eq!(parse_config("{}").unwrap(), SuiteConfig::default());
        let cfg = parse_config(
            r#"{"dimensions":[2],"p_values":[1,"inf"],"instances_per_check":3,"master_seed":9,
                "base_tol":1e-7,"mc_samples":1000,"checks":["santalo_p"]}"#,
        )
        .unwrap();
        assert_eq!(cfg.dimensions, vec![2]);
        assert_eq!(cfg.p_values, vec![PParam::Finite(1.0), PParam::Infinity]);
        assert_eq!(cfg.instances_per_check, Some(3));
        assert_eq!(cfg.checks, Some(vec!["santalo_p".to_string()]));
    }

    #[test]
    fn bad_configs_are_parse_errors() {
        for text in [
            r#"{"dimensions":[7]}"#,
            r#"{"p_values":[-1]}"#,
            r#"{"checks":["nope"]}"#,
            r#"{"mc_samples":0}"#,
            r#"{"unknown":1}"#,
            r#"{"base_tol":-1}"#,
        ] {
            assert!(parse_config(text).unwrap_err().is_parse(), "{text}");
        }
    }
}
