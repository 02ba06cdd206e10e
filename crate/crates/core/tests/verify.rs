use std::f64::consts::PI;

use lpgeom::bodies::{hull, ConvexBody, Direction};
use lpgeom::lp::PParam;
use lpgeom::quadrature::Estimate;
use lpgeom::shadow::{make_parallel_chord, steiner_speed, SpeedFunction};
use lpgeom::verify::*;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn ctx() -> CheckContext {
    CheckContext::default()
}

fn square() -> ConvexBody {
    ConvexBody::cube(2, 1.0).unwrap()
}

fn interval() -> ConvexBody {
    ConvexBody::cube(1, 1.0).unwrap()
}

fn p(x: f64) -> PParam {
    PParam::finite(x).unwrap()
}

fn e2() -> Direction {
    Direction::axis(2, 1)
}

fn rotated_square(deg: f64) -> ConvexBody {
    let (s, c) = deg.to_radians().sin_cos();
    square().linear_map(&[vec![c, -s], vec![s, c]]).unwrap()
}

fn tight(r: &CheckRecord) {
    assert!(r.pass, "{r:?}");
    assert!(r.is_tight(), "{r:?}");
}

#[test]
fn support_convexity_witnesses() {
    let k = ConvexBody::random_poly(2, 7, 3, false).unwrap();
    let shift = make_parallel_chord(&k, &e2(), SpeedFunction::constant(1.0, 2)).unwrap();
    for q in [p(1.0), PParam::Infinity] {
        tight(&check_support_convexity("shift", &shift, q, &[0.4, -0.7], -0.5, 0.8, &ctx()).unwrap());
    }
    let st = make_parallel_chord(&k, &e2(), steiner_speed(&k, &e2()).unwrap()).unwrap();
    tight(&check_support_convexity("same-t", &st, p(2.0), &[0.3, 0.2], 0.4, 0.4, &ctx()).unwrap());
    let r = check_support_convexity("spread", &st, p(2.0), &[0.3, 0.9], 0.0, 1.0, &ctx()).unwrap();
    assert!(r.pass);
}

#[test]
fn three_point_witness() {
    let k = ConvexBody::random_poly(2, 7, 4, false).unwrap();
    let st = make_parallel_chord(&k, &e2(), steiner_speed(&k, &e2()).unwrap()).unwrap();
    let r = check_three_point("coincide", &st, p(1.0), &[0.2], &[0.2], 0.1, 0.3, 0.3, 1.0, 1.0, &ctx()).unwrap();
    tight(&r);
    let still = make_parallel_chord(&k, &e2(), SpeedFunction::constant(0.0, 2)).unwrap();
    let r = check_three_point("still", &still, p(1.0), &[0.2], &[-0.3], 0.1, 0.0, 0.0, 0.5, 2.0, &ctx()).unwrap();
    assert!(r.pass);
}

#[test]
fn section_checks() {
    let k = ConvexBody::random_poly(2, 8, 5, false).unwrap();
    let st = make_parallel_chord(&k, &e2(), steiner_speed(&k, &e2()).unwrap()).unwrap();
    tight(&check_section_inclusion("same-t", &st, p(1.0), 0.05, 0.5, 0.5, &ctx()).unwrap());
    assert!(check_section_inclusion("spread", &st, p(1.0), 0.05, 0.0, 1.0, &ctx()).unwrap().pass);
    tight(&check_slice_concavity("same-t", &st, p(1.0), 0.05, 0.3, 0.3, 128, &ctx()).unwrap());

    let sq = square();
    let sst = make_parallel_chord(&sq, &e2(), steiner_speed(&sq, &e2()).unwrap()).unwrap();
    tight(&check_slice_concavity("square", &sst, PParam::Infinity, 0.0, 0.0, 1.0, 128, &ctx()).unwrap());

    tight(&check_section_symmetry("square", &sq, p(1.0), &e2(), 0.0, &ctx()).unwrap());
    tight(&check_section_symmetry("square", &sq, p(1.0), &e2(), 0.2, &ctx()).unwrap());
    let tilted = rotated_square(20.0);
    assert!(check_section_symmetry("tilted", &tilted, p(2.0), &e2(), 0.15, &ctx()).unwrap().pass);
    assert!(check_section_symmetry("asym", &k, p(2.0), &e2(), 0.1, &ctx()).is_err());
}

#[test]
fn reflection_sections_proof_form() {
    let k = ConvexBody::random_poly(2, 7, 6, false).unwrap();
    let recs = check_reflection_sections("asym", &k, &e2(), p(1.0), 0.15, &ctx()).unwrap();
    let proof: Vec<_> = recs.iter().filter(|r| !r.diagnostic).collect();
    assert!(!proof.is_empty() && proof.iter().all(|r| r.pass));
    assert!(recs.iter().any(|r| r.diagnostic && !r.pass));
    assert_eq!(failure_count(&recs), 0);

    let recs = check_reflection_sections("zero", &k, &e2(), p(1.0), 0.0, &ctx()).unwrap();
    assert!(recs.iter().all(|r| r.pass));
}

#[test]
fn steiner_monotone_witnesses() {
    for q in [p(1.0), PParam::Infinity] {
        tight(&check_steiner_monotone("square", &square(), &e2(), q, &ctx()).unwrap());
    }
    let r = check_steiner_monotone("rot30", &rotated_square(30.0), &e2(), PParam::Infinity, &ctx()).unwrap();
    assert!(r.pass && r.margin > 0.0);
}

#[test]
fn santalo_witnesses() {
    let ball = ConvexBody::ball(vec![0.0, 0.0], 2.5).unwrap();
    for q in [p(1.0), PParam::Infinity] {
        tight(&check_santalo_p("ball", &ball, q, &ctx()).unwrap());
    }
    let r = check_santalo_p("square", &square(), PParam::Infinity, &ctx()).unwrap();
    assert!((r.margin - (PI * PI - 8.0)).abs() < 1e-9);
    assert!(check_santalo_p("asym", &ConvexBody::random_poly(2, 7, 1, false).unwrap(), p(1.0), &ctx()).is_err());
}

#[test]
fn prop_bound_examples() {
    let disk = ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap();
    // both sides carry n!, so the disk at p = inf is an equality case
    tight(&check_prop_bound("disk", &disk, PParam::Infinity, &ctx()).unwrap());
    let r = check_prop_bound("interval", &interval(), p(1.0), &ctx()).unwrap();
    assert!((r.margin - (16.0 - PI * PI)).abs() < 1e-6);
    assert!(check_prop_bound("off", &square().translate(&[0.2, 0.0]), p(1.0), &ctx()).is_err());
}

#[test]
fn sandwich_and_translate_witnesses() {
    let dirs = lpgeom::lp::direction_set(2, 64).unwrap();
    tight(&check_sandwich("square", &square(), PParam::Infinity, &dirs, &ctx()).unwrap());
    assert!(check_sandwich("square", &square(), p(0.5), &dirs, &ctx()).unwrap().pass);
    tight(&check_translate_polar("square", &square(), &[0.0, 0.0], &ctx()).unwrap());
    tight(&check_translate_polar("interval", &interval(), &[0.5], &ctx()).unwrap());
}

#[test]
fn ball_lemma_witness() {
    let f = |x: f64| (-x).exp();
    let grid: Vec<f64> = (1..=20).map(|i| 0.25 * i as f64).collect();
    tight(&check_ball_lemma("exp", &f, &f, &f, 2.0, &grid, &ctx()).unwrap());
    let g = |x: f64| (-2.0 * x).exp();
    assert!(check_ball_lemma("mixed", &f, &g, &f, 2.0, &grid, &ctx()).unwrap().pass);
    let tiny = |x: f64| (-10.0 * x).exp();
    assert!(check_ball_lemma("bad", &f, &f, &tiny, 2.0, &grid, &ctx()).is_err());
}

#[test]
fn origin_iff_cases() {
    let recs = check_origin_iff("square", &square(), p(1.0), &ctx()).unwrap();
    assert_eq!(recs.len(), 2);
    assert!(recs.iter().all(|r| r.pass), "{recs:?}");
    let recs = check_origin_iff("far", &square().translate(&[3.0, 0.0]), p(1.0), &ctx()).unwrap();
    assert!(recs[0].pass && recs[0].margin > 0.0);
    let recs = check_origin_iff("edge", &square().translate(&[1.0, 0.0]), p(1.0), &ctx()).unwrap();
    assert!(recs[0].diagnostic);
    assert_eq!(failure_count(&recs), 0);
}

#[test]
fn conv_polar_and_infconv() {
    let k = ConvexBody::random_poly(2, 7, 8, true).unwrap();
    tight(&check_conv_polar("same", &k, &k, 1e-9).unwrap());
    let r = check_conv_polar("octagon", &square(), &rotated_square(45.0), 1e-9).unwrap();
    tight(&r);
    let oct = square().conv_union(&rotated_square(45.0)).unwrap();
    assert_eq!(oct.as_polytope().unwrap().vertices().len(), 8);
    tight(&check_infconv("same", &k, &k, &ctx()).unwrap());
}

#[test]
fn logconcave_projection_cases() {
    tight(&check_logconcave_projection("const", &interval(), &|_| 0.7, &ctx()).unwrap());
    let r = check_logconcave_projection("gauss", &interval(), &|x| -x[0] * x[0], &ctx()).unwrap();
    assert!(r.pass && r.margin >= 0.0);
    let tri = hull(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let r = check_logconcave_projection("tri", &tri, &|x| 0.5 * x[0] - x[1] * x[1], &ctx()).unwrap();
    assert!(r.pass);
}

#[test]
fn rogers_shephard_equality_cases() {
    let k = interval();
    tight(&check_reverse_rs("interval", &k, &k, PParam::Infinity, 128, &ctx()).unwrap());
    let r = check_rs_forward("interval", &k, &k, PParam::Infinity, 128, &ctx()).unwrap();
    assert!(r.pass && (r.margin - 2.0).abs() < 1e-9);
    let far = ConvexBody::cube(1, 1e4).unwrap();
    let r = check_rs_forward("limit", &k, &far, PParam::Infinity, 128, &ctx()).unwrap();
    assert!(r.pass && r.margin <= 1e-7 * r.lhs.value.max(1e-300).max(1.0));

    assert!(check_classical_rs_forward("interval", &k, &k, &ctx()).unwrap().pass);
    tight(&check_classical_rs_reverse("interval", &k, &k, &ctx()).unwrap());
}

#[test]
fn ct_machinery_closed_form_case() {
    let k = interval();
    let c = CheckContext {
        mc_samples: 50_000,
        ..ctx()
    };
    let recs = check_ct_machinery("interval", &k, &k, PParam::Infinity, &[0.25, 0.5, 0.75], 64, &c).unwrap();
    assert!(!recs.is_empty());
    assert_eq!(failure_count(&recs), 0, "{recs:?}");
}

#[test]
fn empty_config_runs_nothing() {
    assert!(run_suite(&SuiteConfig::empty()).is_empty());
    let cfg = SuiteConfig {
        checks: Some(vec![]),
        ..SuiteConfig::default()
    };
    assert!(run_suite(&cfg).is_empty());
    assert_eq!(
        to_csv(&[]),
        "check_id,index,instance_hash,lhs,lhs_error,rhs,rhs_error,margin,slack,pass,diagnostic\n"
    );
}

fn small(checks: &[&str]) -> SuiteConfig {
    SuiteConfig {
        dimensions: vec![1, 2],
        instances_per_check: Some(3),
        mc_samples: 20_000,
        checks: Some(checks.iter().map(|s| s.to_string()).collect()),
        ..SuiteConfig::default()
    }
}

#[test]
fn suite_is_deterministic() {
    let cfg = small(&["santalo_p", "translate_polar", "conv_polar", "ball_lemma", "logconcave_projection"]);
    let a = run_suite(&cfg);
    let b = run_suite(&cfg);
    assert!(!a.is_empty());
    assert_eq!(to_csv(&a), to_csv(&b));
    assert_eq!(failure_count(&a), 0);
    let ids: Vec<&str> = a.iter().map(|r| r.check_id.as_str()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);

    let other = SuiteConfig {
        master_seed: 2,
        ..cfg
    };
    assert_ne!(to_csv(&run_suite(&other)), to_csv(&a));
}

#[test]
fn csv_rows_are_well_formed() {
    let recs = run_suite(&small(&["santalo_p", "classical_rs_reverse"]));
    let csv = to_csv(&recs);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), recs.len() + 1);
    for (line, r) in lines[1..].iter().zip(&recs) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 11);
        assert_eq!(cols[0], r.check_id);
        assert_eq!(cols[2], r.instance_hash);
        assert_eq!(cols[2].len(), 16);
        assert_eq!(cols[7].parse::<f64>().unwrap(), r.margin);
        assert_eq!(cols[9], r.pass.to_string());
    }
}

#[test]
fn coverage_is_total() {
    let manifest = coverage_manifest();
    let ids: Vec<&str> = families().iter().map(|f| f.id).collect();
    for (_, checks) in &manifest {
        assert!(!checks.is_empty());
        for c in checks {
            assert!(ids.contains(c), "{c} has no family");
        }
    }
    for id in &ids {
        assert!(manifest.iter().any(|(_, c)| c.contains(id)), "{id} is not in the manifest");
    }
}

#[test]
fn summaries_count_failures_only_outside_diagnostics() {
    let e = Estimate::exact(1.0);
    let recs = vec![
        CheckRecord::inequality("a", "x".into(), e, Estimate::exact(2.0), 1e-6),
        CheckRecord::inequality("a", "y".into(), e, Estimate::exact(2.0), 1e-6).as_diagnostic(),
        CheckRecord::identity("b", "z".into(), e, e, 1e-6),
    ];
    assert_eq!(failure_count(&recs), 1);
    let s = summarize(&recs);
    assert_eq!(s.len(), 2);
    assert_eq!((s[0].instances, s[0].failures, s[0].diagnostics), (2, 1, 1));
    assert_eq!(s[0].worst_margin, -1.0);
    assert_eq!((s[1].tight, s[1].worst_margin), (1, 0.0));
}

fn estimate() -> impl Strategy<Value = Estimate> {
    (-10.0f64..10.0, 0.0f64..1.0).prop_map(|(v, e)| Estimate {
        error: e,
        ..Estimate::exact(v)
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, rng_seed: RngSeed::Fixed(256), ..ProptestConfig::default() })]

    #[test]
    fn record_invariants(lhs in estimate(), rhs in estimate(), tol in 0.0f64..1e-3, identity in any::<bool>()) {
        let r = if identity {
            CheckRecord::identity("c", "i".into(), lhs, rhs, tol)
        } else {
            CheckRecord::inequality("c", "i".into(), lhs, rhs, tol)
        };
        prop_assert_eq!(r.slack, tol + 3.0 * (lhs.error + rhs.error));
        prop_assert_eq!(r.pass, r.margin >= -r.slack);
        prop_assert!(!identity || r.margin <= 0.0);
    }
}
