use std::process::Command;

use nemesys::cli::run;
use serde_json::Value;

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn json(args: &[&str]) -> Value {
    let mut argv = vec!["nemesys"];
    argv.extend_from_slice(args);
    let out = run(argv);
    assert_eq!(out.code, 0, "{}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

#[test]
fn solve_reports_path_answers() {
    let r = json(&["solve", "--program", &fixture("path.pl"), "--goal", "path(a,c,P)"]);
    assert_eq!(r["command"], "solve");
    assert!(r["grounding"]["atoms"].as_u64().unwrap() > 0);
    let top = &r["result"]["answers"][0];
    assert_eq!(top["bindings"][0][1], "[edge(a,b),edge(b,c)]");
    assert!(top["valuation"].as_f64().unwrap() > 0.99);
}

#[test]
fn reports_are_deterministic_apart_from_timings() {
    let args = ["prove", "--program", &fixture("shapes.pl"), "--goal", "same_shape_pair(obj0,X)"];
    let mut a = json(&args);
    let mut b = json(&args);
    a["timings_ms"] = Value::Null;
    b["timings_ms"] = Value::Null;
    assert_eq!(a, b);
}

#[test]
fn causal_applies_the_intervention() {
    let r = json(&["causal", "--network", &fixture("night.pl"), "--do", "light=1", "--query", "light", "--query", "sleep"]);
    let q = &r["result"]["queries"];
    assert!((q[0]["pre"].as_f64().unwrap() - 0.4).abs() < 0.01);
    assert!((q[0]["post"].as_f64().unwrap() - 1.0).abs() < 0.01);
    assert!((q[1]["post"].as_f64().unwrap() - 0.45).abs() < 0.01);
}

#[test]
fn dry_run_stops_after_grounding() {
    let r = json(&["explain", "--program", &fixture("shapes.pl"), "--goal", "same_shape_pair(obj0,obj2)", "--dry-run"]);
    assert_eq!(r["result"]["dry_run"], true);
    assert!(r["grounding"]["atoms"].as_u64().unwrap() > 0);
}

#[test]
fn text_mode_and_side_files() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.tsv");
    let log = dir.path().join("loss.jsonl");
    let out = run([
        "nemesys", "solve", "--program", &fixture("path.pl"), "--goal", "path(a,c,P)", "--text",
        "--dump-table", table.to_str().unwrap(), "--trace-top", "2",
    ]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("solve(path(a,c,[edge(a,b),edge(b,c)]))"));
    assert!(std::fs::read_to_string(&table).unwrap().lines().count() > 10);

    let out = run([
        "nemesys", "learn-param", "--network", &fixture("medicine.pl"), "--target", "patient=0.72",
        "--candidate", "medicine_a", "--steps", "20", "--loss-log", log.to_str().unwrap(),
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let lines = std::fs::read_to_string(&log).unwrap();
    let first: Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert!(first["loss"].as_f64().unwrap() >= 0.0);
}

#[test]
fn bad_input_exits_1() {
    for args in [
        vec!["nemesys", "solve", "--program", "/no/such/file.pl", "--goal", "p"],
        vec!["nemesys", "solve", "--program", &fixture("path.pl"), "--goal", "path(a"],
        vec!["nemesys", "solve", "--program", &fixture("path.pl"), "--goal", "p", "--gamma", "-1"],
        vec!["nemesys", "causal", "--network", &fixture("night.pl"), "--do", "light", "--query", "light"],
        vec!["nemesys", "frobnicate"],
    ] {
        let out = run(args.clone());
        assert_eq!(out.code, 1, "{args:?}");
        assert!(out.stderr.starts_with("error"), "{args:?}: {}", out.stderr);
        assert!(out.stdout.is_empty());
    }
    assert_eq!(run(["nemesys", "--help"]).code, 0);
}

#[test]
fn engine_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.json");
    let g = dir.path().join("g.json");
    std::fs::write(&s, r#"[{"id":"obj0","shape":"cube","color":"red","x":1,"y":1}]"#).unwrap();
    std::fs::write(&g, r#"[{"id":"obj0","shape":"cube","color":"red","x":5,"y":1}]"#).unwrap();
    let out = run(["nemesys", "plan", "--start", s.to_str().unwrap(), "--goal", g.to_str().unwrap(), "--max-moves", "2"]);
    assert_eq!(out.code, 2, "{}", out.stderr);
    let out = run([
        "nemesys", "learn-param", "--network", &fixture("medicine.pl"), "--target", "medicine_a=0.1",
        "--target", "patient=0.9", "--candidate", "patient", "--steps", "50",
    ]);
    assert_eq!(out.code, 2);
}

#[test]
fn the_binary_uses_the_same_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_nemesys");
    let ok = Command::new(bin).args(["solve", "--program", &fixture("path.pl"), "--goal", "path(a,a,P)"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let _: Value = serde_json::from_slice(&ok.stdout).unwrap();
    let bad = Command::new(bin).args(["solve", "--program", "/no/such/file.pl", "--goal", "p"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(String::from_utf8_lossy(&bad.stderr).lines().count(), 1);
}
