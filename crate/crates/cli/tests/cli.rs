use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpgeom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(o: &Output) -> (f64, f64) {
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(stdout(o).trim()).unwrap();
    (v["value"].as_f64().unwrap(), v["error"].as_f64().unwrap())
}

fn csv_rows(o: &Output) -> Vec<Vec<f64>> {
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    stdout(o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse::<f64>().unwrap()).collect())
        .collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lpgeom-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const CUBE1: &str = r#"{"type":"cube","n":1}"#;
const CUBE2: &str = r#"{"type":"cube","n":2}"#;
const DISK: &str = r#"{"type":"ball","center":[0,0],"radius":1}"#;

#[test]
fn support_command() {
    let (v, e) = value(&run(&["support", "--body", CUBE1, "--p", "1", "--y", "1"]));
    assert!((v - 1f64.sinh().ln()).abs() < 1e-8 && e < 1e-8);
    assert_eq!(value(&run(&["support", "--body", CUBE1, "--p", "1", "--y", "0"])).0, 0.0);
    assert_eq!(value(&run(&["support", "--body", CUBE2, "--p", "inf", "--y", "1,1"])).0, 2.0);
}

#[test]
fn polar_command() {
    let (v, _) = value(&run(&["polar", "--body", CUBE2, "--p", "inf"]));
    assert!((v - 2.0).abs() < 1e-12);
    let (v, _) = value(&run(&["polar", "--body", CUBE1, "--p", "1"]));
    assert!((v - PI * PI / 2.0).abs() < 1e-6);
    let (v, _) = value(&run(&["polar", "--body", CUBE2, "--p", "inf", "--section", "e2,0"]));
    assert!((v - 2.0).abs() < 1e-12);
    let (v, _) = value(&run(&["polar", "--body", CUBE2, "--p", "inf", "--section", "0,1,0"]));
    assert!((v - 2.0).abs() < 1e-12);
}

#[test]
fn polar_needs_interior_origin() {
    let simplex = r#"{"type":"simplex","n":2}"#;
    assert_eq!(run(&["polar", "--body", simplex, "--p", "1"]).status.code(), Some(3));
    let dir = scratch("dump");
    let dump = dir.join("approx.json");
    let o = run(&[
        "polar",
        "--body",
        simplex,
        "--p",
        "1",
        "--translate",
        "--resolution",
        "64",
        "--dump",
        dump.to_str().unwrap(),
    ]);
    let (v, _) = value(&o);
    let text = std::fs::read_to_string(&dump).unwrap();
    let d: serde_json::Value = serde_json::from_str(&text).unwrap();
    let inner = lpgeom::format::parse_body(&d["inner"].to_string()).unwrap();
    let outer = lpgeom::format::parse_body(&d["outer"].to_string()).unwrap();
    assert!(inner.volume().unwrap() <= v && v <= outer.volume().unwrap());
}

#[test]
fn mahler_command() {
    let rows = csv_rows(&run(&["mahler", "--body", CUBE2, "--p", "inf"]));
    assert_eq!(rows.len(), 1);
    assert!((rows[0][1] - 8.0).abs() < 1e-9);
    assert!((rows[0][3] - PI * PI).abs() < 1e-9);
    assert!((rows[0][5] - 8.0 / (PI * PI)).abs() < 1e-9);

    let rows = csv_rows(&run(&["mahler", "--body", DISK, "--p-sweep", "0.5,1,2,inf"]));
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!((r[5] - 1.0).abs() <= 3.0 * r[6] + 1e-9);
    }

    let rows = csv_rows(&run(&["mahler", "--body", CUBE2, "--p-sweep", "0.5,1,2,inf"]));
    for w in rows.windows(2) {
        assert!(w[1][1] <= w[0][1] + w[0][2] + w[1][2]);
    }
    let o = run(&["mahler", "--body", CUBE2, "--p", "inf"]);
    assert!(stdout(&o).starts_with("p,mahler,mahler_error,ball,ball_error,ratio,ratio_error\n"));
}

#[test]
fn shadow_command() {
    let sq = r#"{"type":"random_poly","n":2,"vertices":8,"seed":3,"symmetric":true}"#;
    let rows = csv_rows(&run(&[
        "shadow",
        "--body",
        sq,
        "--v",
        "0,1",
        "--speed",
        r#"{"kind":"steiner"}"#,
        "--t-grid",
        "0,0.5,1",
        "--quantity",
        "polarvol",
        "--p",
        "1",
    ]));
    assert_eq!(rows.len(), 3);
    assert!(rows[1][1] + rows[1][2] >= rows[0][1] && rows[1][1] + rows[1][2] >= rows[2][1]);

    let rows = csv_rows(&run(&[
        "shadow",
        "--body",
        CUBE2,
        "--v",
        "0,1",
        "--speed",
        r#"{"kind":"const","value":1}"#,
        "--t-grid",
        "-1,0,0.5,1",
        "--quantity",
        "support",
        "--y",
        "0.3,0.7",
    ]));
    let slope = (rows[3][1] - rows[1][1]) / 1.0;
    for r in &rows {
        assert!((r[1] - (rows[1][1] + slope * r[0])).abs() < 1e-9);
    }
    assert!((slope - 0.7).abs() < 1e-9);
}

#[test]
fn shadow_drops_invalid_times() {
    let tent = r#"{"kind":"pl","points":[[-1,0],[0,1],[1,0]]}"#;
    let o = run(&[
        "shadow",
        "--body",
        CUBE2,
        "--v",
        "0,1",
        "--speed",
        tent,
        "--t-grid",
        "0,1.5",
        "--quantity",
        "support",
        "--y",
        "0,1",
    ]);
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], 0.0);
    assert!(!o.stderr.is_empty());

    let bad = r#"{"kind":"affine","coeffs":[1,2],"offset":0}"#;
    let o = run(&[
        "shadow", "--body", CUBE2, "--v", "0,1", "--speed", bad, "--t-grid", "0", "--quantity", "support", "--y", "1,0",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn usage_and_parse_errors_exit_two() {
    assert_eq!(run(&["support", "--body", "{", "--p", "1", "--y", "1"]).status.code(), Some(2));
    assert_eq!(
        run(&["support", "--body", r#"{"type":"blob"}"#, "--p", "1", "--y", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["support", "--body", CUBE1, "--p", "-1", "--y", "1"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["support", "--body", "/no/such/file.json", "--p", "1", "--y", "1"]).status.code(), Some(2));
    let degenerate = r#"{"type":"vpoly","vertices":[[0,0],[1,1],[2,2]]}"#;
    assert_eq!(run(&["support", "--body", degenerate, "--p", "1", "--y", "1,0"]).status.code(), Some(3));
}

#[test]
fn verify_command_filters_and_reports() {
    let dir = scratch("verify");
    let (json, csv) = (dir.join("r.json"), dir.join("r.csv"));
    let o = run(&[
        "verify",
        "--checks",
        "santalo_p",
        "--dims",
        "2",
        "--instances",
        "3",
        "--json",
        json.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.starts_with("santalo_p,")));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["manifest"]["master_seed"], 1);
    assert!(report["records"].as_array().unwrap().len() == rows.len());
    assert!(stdout(&o).contains("santalo_p"));

    let o = run(&["verify", "--checks", "bogus", "--json", json.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = dir.join("bad.json");
    std::fs::write(&cfg, r#"{"dimensions":[9]}"#).unwrap();
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--json", json.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_honors_global_seed() {
    let dir = scratch("seed");
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"dimensions":[2],"instances_per_check":2,"checks":["translate_polar"]}"#).unwrap();
    let mut outputs = Vec::new();
    for (i, seed) in ["5", "5", "6"].iter().enumerate() {
        let csv = dir.join(format!("{i}.csv"));
        let json = dir.join(format!("{i}.json"));
        let o = run(&[
            "--seed",
            seed,
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--json",
            json.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        outputs.push(std::fs::read(&csv).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_ne!(outputs[0], outputs[2]);
}
