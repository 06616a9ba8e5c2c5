use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ruusc"))
}

fn specs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("suites/specs")
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn single_specs_map_outcomes_to_exit_codes() {
    let out = tempfile::tempdir().unwrap();
    for (id, code) in [("c01_convex_bound", 0), ("x_false_convexity", 1), ("c09_multiply_refused", 2)] {
        let spec = specs().join(format!("{id}.json"));
        let o = run(&["--spec", spec.to_str().unwrap()], out.path());
        assert_eq!(o.status.code(), Some(code), "{id}: {}", String::from_utf8_lossy(&o.stderr));
        let doc = read_json(&out.path().join(format!("{id}.json")));
        assert_eq!(doc["exit_code"], code);
        assert!(doc["header"]["generated_unix_ms"].is_u64());
        assert_eq!(out.path().join(format!("{id}.csv")).exists(), code != 2);
    }
    let doc = read_json(&out.path().join("c09_multiply_refused.json"));
    assert!(doc["refusal"].as_str().unwrap().contains("multiply"));
    assert!(doc["report"].is_null());
}

#[test]
fn report_csv_has_documented_columns() {
    let out = tempfile::tempdir().unwrap();
    let spec = specs().join("c01_convex_bound.json");
    run(&["--spec", spec.to_str().unwrap()], out.path());
    let text = std::fs::read_to_string(out.path().join("c01_convex_bound.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("kind,x0,lhs,rhs,gap"));
    assert_eq!(lines.count(), 20);
}

#[test]
fn unknown_catalog_name_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let spec = json!({
        "statement": "convex_bound_check",
        "params": {
            "function": {"name": "no_such_function"},
            "region": {"name": "ball", "center": [0, 0], "radius": 1.0},
            "sampling": {"kind": "region", "count": 10}
        }
    });
    let p = write(dir.path(), "bad.json", &spec);
    let o = run(&["--spec", p.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("params.function"), "{stderr}");
    assert!(stderr.contains("no_such_function"), "{stderr}");
    let doc = read_json(&dir.path().join("out/bad.json"));
    assert!(doc["error"].as_str().unwrap().contains("params.function"));
}

#[test]
fn malformed_specs_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        json!({"statement": "no_such_statement", "params": {}}),
        json!({"statement": "convex_bound_check", "params": {}, "typo": 1}),
        json!({"statement": "s_epsilon_properties", "params": {"eps": 1.0, "extra": true}}),
        json!({"statement": "s_epsilon_properties", "params": {"eps": -1.0}}),
        json!({"statement": "s_epsilon_properties", "id": "a/b", "params": {"eps": 1.0}}),
    ];
    for (k, v) in cases.iter().enumerate() {
        let p = write(dir.path(), &format!("m{k}.json"), v);
        let o = run(&["--spec", p.to_str().unwrap()], &dir.path().join("out"));
        assert_eq!(o.status.code(), Some(3), "case {k}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let p = dir.path().join("broken.json");
    std::fs::write(&p, "{ not json").unwrap();
    let o = run(&["--spec", p.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn empty_suite_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "suite.json", &json!({"specs": []}));
    let o = run(&["--suite", p.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn injected_adversarial_spec_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let mut bad: Value = read_json(&specs().join("x_false_convexity.json"));
    bad["expect"] = json!("pass");
    bad["id"] = json!("injected");
    let suite = json!({"specs": [
        specs().join("c01_convex_bound.json"),
        specs().join("c09_multiply_refused.json"),
        bad,
    ]});
    let p = write(dir.path(), "suite.json", &suite);
    let out = dir.path().join("out");
    let o = run(&["--suite", p.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let flagged: Vec<_> = stdout.lines().filter(|l| l.ends_with("UNEXPECTED")).collect();
    assert_eq!(flagged.len(), 1, "{stdout}");
    assert!(flagged[0].starts_with("injected"));

    let mut rows = csv::Reader::from_path(out.join("summary.csv")).unwrap();
    let header: Vec<String> = rows.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["id", "statement", "expect", "exit_code", "verdict", "max_gap", "flagged", "runtime_ms"]);
    let records: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 3);
    assert_eq!(&records[1][4], "refused");
    assert_eq!(&records[2][0], "injected");
    assert_eq!(&records[2][4], "fail");
    assert!(records[2][6].parse::<usize>().unwrap() > 0);
}

#[test]
fn seed_and_resolution_flags_change_the_samples() {
    let dir = tempfile::tempdir().unwrap();
    let spec = specs().join("c06_growth.json");
    let spec = spec.to_str().unwrap();
    let points = |args: &[&str], out: &str| {
        let out = dir.path().join(out);
        let mut all = vec!["--spec", spec, "--threads", "2"];
        all.extend_from_slice(args);
        assert_eq!(run(&all, &out).status.code(), Some(0));
        read_json(&out.join("c06_growth.json"))["details"]["samples"].clone()
    };
    let base = points(&[], "a");
    assert_eq!(base, points(&[], "b"));
    // Ball and sphere samples plus the origin.
    let n = (base.as_u64().unwrap() - 1) / 2;
    assert_eq!(points(&["--resolution-scale", "2"], "c").as_u64().unwrap(), 4 * n + 1);
    let seeded = read_json(&dir.path().join("a/c06_growth.json"))["seed"].clone();
    points(&["--seed", "5"], "d");
    let shifted = read_json(&dir.path().join("d/c06_growth.json"))["seed"].clone();
    assert_eq!(shifted.as_u64().unwrap(), seeded.as_u64().unwrap() + 5);
}
