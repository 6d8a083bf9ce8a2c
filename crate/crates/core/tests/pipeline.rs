use std::collections::BTreeMap;

use natred::pipeline::*;
use natred::report::{Num, VerificationReport};

fn timeless(mut r: VerificationReport) -> String {
    r.wall_time_s = Num(0.0);
    r.to_json()
}

#[test]
fn pipeline_names_round_trip() {
    for p in Pipeline::ALL {
        assert_eq!(p.name().parse::<Pipeline>().unwrap(), p);
    }
    let err = "bogus".parse::<Pipeline>().unwrap_err().to_string();
    assert!(err.contains("validate-algebra"), "{err}");
}

#[test]
fn tangent_run_passes_and_is_reproducible() {
    let cfg = RunConfig::new(Pipeline::Tangent).algebra("su2").param("a", 1.0).param("b", 0.5);
    let a = run(&cfg);
    assert_eq!(a.status, ExitStatus::Pass, "{:?}", a.error);
    let b = run(&cfg);
    assert_eq!(timeless(a.report.unwrap()), timeless(b.report.unwrap()));
}

#[test]
fn exit_statuses() {
    let degenerate = RunConfig::new(Pipeline::Tangent).param("a", 0.0).param("b", 1.0);
    assert_eq!(run(&degenerate).status.code(), 3);
    let unknown = RunConfig::new(Pipeline::Tangent).algebra("e8").param("a", 1.0).param("b", 1.0);
    let out = run(&unknown);
    assert_eq!(out.status.code(), 2);
    assert!(out.error.unwrap().contains("su3"));
    let missing = RunConfig::new(Pipeline::Gxg).param("a", 1.0);
    assert_eq!(run(&missing).status, ExitStatus::ConfigError);
    let extra = RunConfig::new(Pipeline::Tangent).param("a", 1.0).param("b", 1.0).param("c", 1.0);
    assert_eq!(run(&extra).status, ExitStatus::ConfigError);
    let flat = RunConfig::new(Pipeline::Gxg).param("a", 1.0).param("b", 1.0).param("c", 1.0).param("d", 1.0).param("lambda", 1.0);
    assert_eq!(run(&flat).status, ExitStatus::Degenerate);
}

#[test]
fn s7_sign_of_nonflat_case() {
    let flat = RunConfig::new(Pipeline::S7).param("a", 1.0).param("b", 0.0);
    let out = run(&flat);
    assert_eq!(out.status, ExitStatus::Pass, "{:?}", out.report.map(|r| r.to_text()));
    let mut bent = RunConfig::new(Pipeline::S7).param("a", 1.0).param("b", 1.0);
    bent.samples = Some(3);
    let out = run(&bent);
    assert_eq!(out.status, ExitStatus::Fail);
    let rep = out.report.unwrap();
    assert_eq!(rep.input.samples, Some(3));
    assert!(!rep.check_named("curvature_scalar").unwrap().pass);
}

#[test]
fn validate_algebra_reports() {
    let out = run(&RunConfig::new(Pipeline::ValidateAlgebra).algebra("su3"));
    assert_eq!(out.status, ExitStatus::Pass);
    let rep = out.report.unwrap();
    assert_eq!(rep.observation("levi_civita_holonomy_dim").unwrap().values[0].0, 8.0);

    let dir = std::env::temp_dir().join(format!("natred-validate-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"name": "x", "dim": 3, "entries": [[1,2,3,1.0],[1,3,1,1.0]]}"#).unwrap();
    let mut cfg = RunConfig::new(Pipeline::ValidateAlgebra);
    cfg.algebra = Some(AlgebraSource::File(bad));
    let out = run(&cfg);
    assert_eq!(out.status, ExitStatus::Fail);
    assert!(!out.report.unwrap().check_named("jacobi").unwrap().pass);

    cfg.algebra = Some(AlgebraSource::File(dir.join("missing.json")));
    assert_eq!(run(&cfg).status, ExitStatus::ConfigError);
    assert_eq!(run(&RunConfig::new(Pipeline::ValidateAlgebra)).status, ExitStatus::ConfigError);
}

#[test]
fn direct_product_crosscheck_passes() {
    for alg in ["su2", "su3", "u2"] {
        let cfg = RunConfig::new(Pipeline::DirectProductCrosscheck).algebra(alg).param("a", 1.3).param("b", -0.7);
        let out = run(&cfg);
        assert_eq!(out.status, ExitStatus::Pass, "{alg}: {:?}", out.report.map(|r| r.to_text()));
    }
}

#[test]
fn grid_sweep_order_and_degenerate_points() {
    let base = RunConfig::new(Pipeline::Tangent).algebra("su2");
    let mut axes = BTreeMap::new();
    axes.insert("a".to_string(), vec![0.0, 1.0, 2.0]);
    axes.insert("b".to_string(), vec![-1.0, 0.0]);
    let r = sweep(&base, &SweepSpec::Grid(axes)).unwrap();
    assert_eq!(r.points.len(), 6);
    let order: Vec<(f64, f64)> = r.points.iter().map(|p| (p.params["a"].0, p.params["b"].0)).collect();
    assert_eq!(order, vec![(0.0, -1.0), (0.0, 0.0), (1.0, -1.0), (1.0, 0.0), (2.0, -1.0), (2.0, 0.0)]);
    assert_eq!(r.count(ExitStatus::Degenerate), 2);
    assert_eq!(r.count(ExitStatus::Pass), 4);
    assert_eq!(r.status(), ExitStatus::Pass);
    let csv = r.to_csv();
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.starts_with("index,a,b,status,flat,curvature_scalar"));
}

#[test]
fn tangent_grid_flags_flat_column() {
    let base = RunConfig::new(Pipeline::Tangent).algebra("su2");
    let mut axes = BTreeMap::new();
    axes.insert("a".to_string(), vec![0.5, 1.0, 2.0]);
    axes.insert("b".to_string(), vec![-1.0, 0.0, 1.0]);
    let r = sweep(&base, &SweepSpec::Grid(axes)).unwrap();
    assert_eq!(r.points.len(), 9);
    assert_eq!(r.status(), ExitStatus::Pass, "{}", r.summary());
    for p in &r.points {
        assert_eq!(p.flat, p.params["b"].0 == 0.0);
        assert_eq!(p.holonomy_dim.unwrap().0, if p.flat { 0.0 } else { 3.0 });
    }
    let at = r.points.iter().find(|p| p.params["a"].0 == 1.0 && p.params["b"].0 == 1.0).unwrap();
    assert!((at.curvature_scalar.unwrap().0 - 2.0).abs() <= 1e-9);
    assert!(r.summary().contains("flat at points 1, 4, 7"));
}

#[test]
fn gxg_flat_locus_example() {
    let cfg = RunConfig::new(Pipeline::Gxg).param("a", 2.0).param("b", 1.0).param("c", 1.0).param("d", 3.0).param("lambda", 1.0);
    let out = run(&cfg);
    assert_eq!(out.status, ExitStatus::Pass, "{:?}", out.report.map(|r| r.to_text()));
    let rep = out.report.unwrap();
    assert!(rep.check_named("flat_curvature").unwrap().pass);
    assert_eq!(rep.check_named("holonomy_dim").unwrap().values[0].0, 0.0);
}

#[test]
fn empty_sweep_is_fine() {
    let base = RunConfig::new(Pipeline::Tangent);
    let r = sweep(&base, &SweepSpec::Grid(BTreeMap::new())).unwrap();
    assert!(r.points.is_empty());
    assert_eq!(r.status().code(), 0);
    let r = sweep(&base, &SweepSpec::Random { samples: 0 }).unwrap();
    assert_eq!(r.status().code(), 0);
}

#[test]
fn random_sweep_is_deterministic() {
    let base = RunConfig::new(Pipeline::Tangent).algebra("su2");
    let spec = SweepSpec::Random { samples: 12 };
    let a = sweep(&base, &spec).unwrap();
    let b = sweep(&base, &spec).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.status(), ExitStatus::Pass, "{}", a.summary());
    // a prefix of a longer sweep draws the same points
    let longer = SweepSpec::Random { samples: 20 }.points(Pipeline::Tangent, base.seed);
    assert_eq!(&longer[..12], &spec.points(Pipeline::Tangent, base.seed)[..]);
}

#[test]
fn sweep_rejects_bad_parameters_up_front() {
    let base = RunConfig::new(Pipeline::Tangent);
    let mut axes = BTreeMap::new();
    axes.insert("q".to_string(), vec![1.0]);
    assert!(sweep(&base, &SweepSpec::Grid(axes)).is_err());
}

#[test]
fn gxg_point_with_rank_deficient_span_closes() {
    // this point once produced a non-closed holonomy basis from a bad SVD
    let cfg = RunConfig::new(Pipeline::Gxg)
        .param("a", -1.6813359320564594)
        .param("b", 0.54046113871574342)
        .param("c", 0.49422322508099459)
        .param("d", 0.47968311362726546)
        .param("lambda", 2.0073152930403282);
    let out = run(&cfg);
    assert_eq!(out.status, ExitStatus::Pass, "{:?}", out.report.map(|r| r.to_text()));
}
