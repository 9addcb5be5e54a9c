use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn capra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capra")).args(args).output().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");
    let inst = fixture("toy-n12-k4.vrp");
    let run = capra(&["solve", "--algo", "classical", "--variant", "general", s(&inst), "-o", s(&out)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let value = json(&out);
    assert_eq!(value["report"]["winner"], "classical");
    assert_eq!(value["report"]["config"]["seed"], 0);
    let check = capra(&["verify", s(&inst), s(&out)]);
    assert!(check.status.success());
    assert!(String::from_utf8_lossy(&check.stdout).starts_with("ok"));
}

#[test]
fn unit_variant_on_generated_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("unit.json");
    let out = dir.path().join("sol.json");
    assert!(capra(&["gen", "-n", "25", "--model", "unit:3", "--seed", "5", "-o", s(&inst)]).status.success());
    let run = capra(&["solve", "--algo", "classical", "--variant", "unit", s(&inst), "-o", s(&out)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(capra(&["verify", s(&inst), s(&out)]).status.success());
}

#[test]
fn capacity_breach_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    // All twelve customers in one tour: far over capacity.
    let tour: Vec<usize> = (0..=12).chain([0]).collect();
    std::fs::write(&bad, serde_json::json!({ "tours": [tour], "variant": "general" }).to_string()).unwrap();
    let run = capra(&["verify", s(&fixture("toy-n12-k4.vrp")), s(&bad)]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("violation"));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let inst = fixture("toy-n12-k4.vrp");
    for out in [&a, &b] {
        assert!(capra(&["solve", s(&inst), "--tau", "0.1", "--rho", "0.05", "--gamma", "10", "-o", s(out)]).status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(json(&a)["report"]["config"]["gamma"], 10.0);
}

#[test]
fn generator_is_seeded() {
    let one = capra(&["gen", "-n", "10", "--model", "clustered:2:0.01", "--seed", "3"]);
    let two = capra(&["gen", "-n", "10", "--model", "clustered:2:0.01", "--seed", "3"]);
    let other = capra(&["gen", "-n", "10", "--model", "clustered:2:0.01", "--seed", "4"]);
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
    assert_ne!(one.stdout, other.stdout);
}

#[test]
fn oracle_respects_size_limit() {
    let small = capra(&["oracle", s(&fixture("toy-explicit-n7.vrp"))]);
    assert!(small.status.success());
    let value: serde_json::Value = serde_json::from_slice(&small.stdout).unwrap();
    assert!(value["cost"].as_f64().unwrap() > 0.0);
    let large = capra(&["oracle", s(&fixture("toy-n12-k4.vrp"))]);
    assert_eq!(large.status.code(), Some(1));
}

#[test]
fn bench_ratios_with_exact_backend() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..4 {
        let path = dir.path().join(format!("g{seed}.json"));
        assert!(capra(&["gen", "-n", "7", "--seed", &seed.to_string(), "-o", s(&path)]).status.success());
    }
    std::fs::copy(fixture("toy-explicit-n7.vrp"), dir.path().join("toy-explicit-n7.vrp")).unwrap();
    let run = capra(&["bench", s(dir.path()), "--tsp", "exact", "--max-n", "8"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let table = String::from_utf8_lossy(&run.stdout);
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let cols: Vec<&str> = row.split_whitespace().collect();
        let ratio: f64 = cols[7].parse().unwrap();
        assert!((1.0 - 1e-9..=3.0).contains(&ratio), "{row}");
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(capra(&["solve"]).status.code(), Some(2));
    assert_eq!(capra(&["solve", "x.vrp", "--algo", "fastest"]).status.code(), Some(2));
    assert_eq!(capra(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(capra(&["gen", "-n", "3", "--model", "pareto"]).status.code(), Some(2));
    let inst = fixture("toy-n12-k4.vrp");
    assert_eq!(capra(&["solve", s(&inst), "--tau", "0.5"]).status.code(), Some(2));
}

#[test]
fn missing_file_exits_one() {
    assert_eq!(capra(&["solve", "/nonexistent/instance.vrp"]).status.code(), Some(1));
}
