use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn uavplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uavplan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = uavplan(args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn genmap_writes_map_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("map.json");
    ok(&["genmap", "--seed", "5", "--count", "12", "--out", s(&out)]);
    let v = json(&out);
    assert_eq!(v["seed"], 5);
    assert_eq!(v["bounds"]["max"], serde_json::json!([500.0, 500.0, 500.0]));
    let buildings = v["buildings"].as_array().unwrap();
    assert_eq!(buildings.len(), 12);
    for b in buildings {
        let (min, max) = (b["min"].as_array().unwrap(), b["max"].as_array().unwrap());
        assert_eq!(min.len(), 3);
        assert_eq!(min[2], 0.0);
        let h = max[2].as_f64().unwrap();
        assert!((18.0..=270.0).contains(&h));
    }

    // same seed, same bytes
    let again = dir.path().join("again.json");
    ok(&["genmap", "--seed", "5", "--count", "12", "--out", s(&again)]);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn plan_each_algorithm_on_generated_map() {
    let dir = tempfile::tempdir().unwrap();
    for algo in ["drrt", "astar", "aco"] {
        let out = dir.path().join(format!("{algo}.json"));
        let stdout = ok(&[
            "plan", "--algo", algo, "--seed", "1", "--start", "10,10,1", "--goal", "470,420,50", "--out", s(&out),
        ]);
        assert!(stdout.starts_with(algo), "{stdout}");
        let v = json(&out);
        assert_eq!(v["algorithm"], algo);
        assert_eq!(v["map_seed"], 1);
        assert_eq!(v["success"], true);
        let path = v["path"].as_array().unwrap();
        assert_eq!(path[0], serde_json::json!([10.0, 10.0, 1.0]));
        assert_eq!(*path.last().unwrap(), serde_json::json!([470.0, 420.0, 50.0]));
        assert_eq!(v["smoothed_path"].is_array(), algo == "drrt");
        assert_eq!(v["metrics"]["waypoints"].as_u64().unwrap() as usize, path.len());

        // plan output feeds straight into `metrics`
        let m: Value = serde_json::from_str(&ok(&["metrics", "--path", s(&out)])).unwrap();
        assert_eq!(m["length_m"], v["metrics"]["length_m"]);
    }
}

#[test]
fn plan_rrt_from_map_file() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("map.json");
    fs::write(
        &map,
        r#"{"bounds":{"min":[0,0,0],"max":[60,60,60]},"seed":0,"buildings":[{"min":[20,0,0],"max":[30,60,40]}]}"#,
    )
    .unwrap();
    let out = dir.path().join("rrt.json");
    ok(&[
        "plan", "--algo", "rrt", "--map", s(&map), "--start", "5,30,5", "--goal", "50,30,5", "--rng-seed", "3",
        "--out", s(&out),
    ]);
    let v = json(&out);
    assert_eq!(v["success"], true);
    assert_eq!(v["rng_seed"], 3);
    // the wall forces the path over its top
    let top = v["path"].as_array().unwrap().iter().map(|p| p[2].as_f64().unwrap()).fold(0.0, f64::max);
    assert!(top >= 40.0);
}

#[test]
fn plan_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let o = s(&out);
    for args in [
        vec!["plan", "--algo", "bfs", "--seed", "1", "--out", o],
        vec!["plan", "--algo", "drrt", "--out", o],
        vec!["plan", "--algo", "drrt", "--seed", "1", "--map", "m.json", "--out", o],
        vec!["plan", "--algo", "drrt", "--seed", "1", "--start", "1,2", "--out", o],
        vec!["plan", "--algo", "drrt", "--seed", "1", "--goal", "900,0,0", "--out", o],
    ] {
        let r = uavplan(&args);
        assert!(!r.status.success(), "{args:?} should fail");
    }
    assert!(!out.exists());
}

#[test]
fn bench_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("map.json");
    ok(&["genmap", "--seed", "2", "--count", "10", "--out", s(&map)]);
    let scenario = dir.path().join("scenario.json");
    fs::write(
        &scenario,
        r#"{
            "name": "cli",
            "map": {"file": "map.json"},
            "trials": 3,
            "base_seed": 100,
            "algorithms": ["drrt", "astar", "aco"],
            "aco": {"ants": 5, "iterations": 5}
        }"#,
    )
    .unwrap();
    let out = dir.path().join("report.json");
    ok(&["bench", "--scenario", s(&scenario), "--out", s(&out), "--threads", "2"]);

    let v = json(&out);
    assert_eq!(v["scenario"], "cli");
    assert_eq!(v["map_seed"], 2);
    assert_eq!(v["records"].as_array().unwrap().len(), 9);
    assert_eq!(v["records"][0]["seed"], 100);

    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "algorithm,t,l,l',w,m,eta,beta,beta',n,n'");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("drrt,"));

    let trials = fs::read_to_string(dir.path().join("report_trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 10);
}

#[test]
fn bench_reports_missing_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let r = uavplan(&["bench", "--scenario", "/nonexistent/s.json", "--out", s(&dir.path().join("r.json"))]);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("/nonexistent/s.json"));
}

#[test]
fn metrics_on_bare_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    fs::write(&path, "[[0,0,0],[10,0,0],[10,10,0],[20,10,0]]").unwrap();
    let m: Value = serde_json::from_str(&ok(&["metrics", "--path", s(&path)])).unwrap();
    assert_eq!(m["length_m"], 30.0);
    assert_eq!(m["waypoints"], 4);
    assert_eq!(m["sharp_turns"], 2);
    assert!((m["max_turn_deg"].as_f64().unwrap() - 90.0).abs() < 1e-9);
}
