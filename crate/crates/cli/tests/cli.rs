use std::path::PathBuf;
use std::process::{Command, Output};

fn natred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_natred")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("natred-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Structured report with the wall time blanked.
fn without_time(json: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    v["wall_time_s"] = serde_json::Value::Null;
    v
}

#[test]
fn tangent_run_passes_with_curvature_two() {
    let o = natred(&["run", "tangent", "--algebra", "su2", "--a", "1", "--b", "1", "--format", "structured"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    let c = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "curvature_scalar").unwrap();
    assert!((c["values"][0].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn structured_output_is_reproducible() {
    let args = ["run", "tangent", "--algebra", "su3", "--a", "0.7", "--b", "-1.3", "--format", "structured"];
    let (a, b) = (natred(&args), natred(&args));
    assert_eq!(without_time(&stdout(&a)), without_time(&stdout(&b)));
    let strip = |s: String| s.lines().filter(|l| !l.contains("wall_time_s")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(stdout(&a)), strip(stdout(&b)));
}

#[test]
fn text_and_structured_share_records() {
    let base = ["run", "gxg", "--a", "2", "--b", "1", "--c", "1", "--d", "3", "--lambda", "1"];
    let text = stdout(&natred(&base));
    let mut args = base.to_vec();
    args.extend(["--format", "structured"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&natred(&args))).unwrap();
    let checks = v["checks"].as_array().unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| l.starts_with("PASS ") || l.starts_with("FAIL ")).collect();
    assert_eq!(lines.len(), checks.len());
    for (line, c) in lines.iter().zip(checks) {
        assert_eq!(line.split(' ').nth(1).unwrap(), c["name"].as_str().unwrap());
    }
    assert!(text.contains("PASS flat_curvature"));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&natred(&["run", "tangent", "--a", "0", "--b", "1"])), 3);
    let o = natred(&["run", "tangent", "--algebra", "e8", "--a", "1", "--b", "1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("su3"));
    let o = natred(&["run", "nonsense", "--a", "1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("validate-algebra"));
    assert_eq!(code(&natred(&["run", "gxg", "--a", "1"])), 2);
    assert_eq!(code(&natred(&["run", "tangent", "--a", "1", "--b", "1", "--tol", "0"])), 2);
    assert_eq!(code(&natred(&["run", "gxg", "--a", "1", "--b", "1", "--c", "1", "--d", "1", "--lambda", "1"])), 3);
}

#[test]
fn s7_nonflat_case_fails_with_report() {
    let o = natred(&["run", "s7", "--a", "1", "--b", "1"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL curvature_scalar"));
    assert_eq!(code(&natred(&["run", "s7", "--a", "1", "--b", "0", "--samples", "2"])), 0);
}

#[test]
fn out_file_matches_stdout() {
    let path = scratch("report.json");
    let args = ["run", "spinor", "--a", "1", "--b", "0", "--format", "structured"];
    let shown = stdout(&natred(&args));
    let mut with_out = args.to_vec();
    let p = path.to_str().unwrap();
    with_out.extend(["--out", p]);
    let o = natred(&with_out);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(without_time(&written), without_time(&shown));
}

#[test]
fn sweep_grid_with_csv() {
    let csv = scratch("grid.csv");
    let o = natred(&["sweep", "tangent", "--algebra", "su2", "--a", "0.5,1,2", "--b", "-1,0,1", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("9 pass"));
    assert!(stdout(&o).contains("flat at points 1, 4, 7"));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.starts_with("index,a,b,status,flat,"));
}

#[test]
fn sweep_random_and_empty() {
    let args = ["sweep", "gxg", "--random", "8", "--format", "structured"];
    let a = natred(&args);
    assert_eq!(code(&a), 0);
    let va: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    let vb: serde_json::Value = serde_json::from_str(&stdout(&natred(&args))).unwrap();
    let params = |v: &serde_json::Value| v["points"].as_array().unwrap().iter().map(|p| p["params"].clone()).collect::<Vec<_>>();
    assert_eq!(params(&va), params(&vb));
    assert_eq!(params(&va).len(), 8);
    let o = natred(&["sweep", "tangent"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("over 0 points"));
}

#[test]
fn validate_presets_and_files() {
    assert_eq!(code(&natred(&["validate", "--algebra", "g2"])), 0);
    let good = scratch("su2.json");
    std::fs::write(&good, r#"{"name": "s", "dim": 3, "entries": [[1,2,3,1.0],[2,3,1,1.0],[3,1,2,1.0]]}"#).unwrap();
    assert_eq!(code(&natred(&["validate", "--file", good.to_str().unwrap()])), 0);
    assert_eq!(code(&natred(&["run", "tangent", "--file", good.to_str().unwrap(), "--a", "1", "--b", "1"])), 0);
    let bad = scratch("bad.json");
    std::fs::write(&bad, r#"{"name": "x", "dim": 3, "entries": [[1,2,3,1.0],[1,3,1,1.0]]}"#).unwrap();
    let o = natred(&["validate", "--file", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL jacobi"));
    assert_eq!(code(&natred(&["validate", "--file", "/nonexistent/x.json"])), 2);
}
