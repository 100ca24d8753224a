use std::path::Path;
use std::process::Command;

use ilscond::cond::{kappa_2ils, CondParams};
use ilscond::experiments::gen_example2;
use ilscond::io::read_problem;

fn run(args: &[&str], file: Option<&Path>) -> String {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ilscond"));
    cmd.args(args);
    if let Some(f) = file {
        cmd.arg(f);
    }
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn value(text: &str, key: &str) -> f64 {
    let v: serde_json::Value = serde_json::from_str(text).unwrap();
    v[key].as_f64().unwrap_or_else(|| panic!("missing {key} in {text}"))
}

#[test]
fn gen_then_exact_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.txt");
    let p = path.to_str().unwrap();
    run(&["gen", "--example", "2", "--m", "20", "--n", "6", "--p", "12", "--kappa", "1e3", "--seed", "4", "--out", p], None);

    let file = read_problem(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    let direct = gen_example2(20, 6, 12, 1e3, 1.0, 4).unwrap();
    assert_eq!(&file.a, direct.problem.a());
    assert_eq!(&file.b, direct.problem.b());

    let out = run(&["exact", "--json"], Some(&path));
    let expected = kappa_2ils(&direct.problem, &CondParams::default()).unwrap();
    assert_eq!(value(&out, "kappa_2ils"), expected);

    let est = run(&["estimate", "--json", "--seed", "3"], Some(&path));
    let pce = value(&est, "kappa_2ils_pce");
    assert!((pce - expected).abs() <= 0.01 * expected);
    assert!(value(&est, "kappa_mixed_ssce") > 0.0);
}

#[test]
fn structured_problem_compare() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.txt");
    run(&["gen", "--example", "3", "--n", "8", "--rho", "0.1", "--out", path.to_str().unwrap()], None);
    let header = std::fs::read_to_string(&path).unwrap();
    assert!(header.starts_with("ILS 16 8 8 8 stacked_scaled:toeplitz:0.5"));
    let out = run(&["compare", "--json"], Some(&path));
    for key in ["r_N", "r_M", "r_C"] {
        assert!(value(&out, key) >= 1.0 - 1e-12);
    }
    let exact = run(&["exact", "--json"], Some(&path));
    assert!(value(&exact, "kappa_2ils_structured") <= value(&exact, "kappa_2ils"));
}

#[test]
fn compare_needs_structure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.txt");
    run(&["gen", "--m", "12", "--n", "4", "--p", "8", "--out", path.to_str().unwrap()], None);
    let out = Command::new(env!("CARGO_BIN_EXE_ilscond")).arg("compare").arg(&path).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn table_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t2.json");
    let text = run(
        &["table2", "--m", "16", "--n", "5", "--p", "10", "--kappa", "1e2", "--rho", "1", "--trials", "4", "--format", "json", "--out", path.to_str().unwrap()],
        None,
    );
    assert!(text.contains("r_m"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 4);
    assert_eq!(v["summary"][0]["ratios"][0]["count"], 4);
}
