use std::path::Path;
use std::process::Command;

fn udgfl(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_udgfl")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_solve_audit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.txt");
    let out = udgfl(&["gen", "--family", "clustered", "--n", "40", "--side", "3", "--seed", "4", "--out", s(&inst)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let again = dir.path().join("again.txt");
    udgfl(&["gen", "--family", "clustered", "--n", "40", "--side", "3", "--seed", "4", "--out", s(&again)]);
    assert_eq!(std::fs::read(&inst).unwrap(), std::fs::read(&again).unwrap());

    for solver in ["exact", "baseline", "boxptas", "qptas"] {
        let report = dir.path().join(format!("{}.json", solver));
        let csv = dir.path().join(format!("{}.csv", solver));
        let out = udgfl(&[
            "solve", "--input", s(&inst), "--solver", solver, "--eps", "0.5", "--seed", "1",
            "--grid-trials", "4", "--out", s(&report), "--csv", s(&csv),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}: {}", solver, String::from_utf8_lossy(&out.stderr));
        let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
        assert_eq!(json["outcome"]["solver"], solver);
        assert!(std::fs::read_to_string(&csv).unwrap().lines().count() == 2);
        let audit = udgfl(&["audit", "--report", s(&report)]);
        assert_eq!(audit.status.code(), Some(0));
        assert!(String::from_utf8_lossy(&audit.stdout).contains("PASS solution.recompute"));
    }
}

#[test]
fn json_instances_and_configs_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    assert!(udgfl(&["gen", "--n", "25", "--side", "2", "--json", "--out", s(&inst)]).status.success());
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"solve": {"solver": "boxptas", "grid_trials": 2}}"#).unwrap();
    let report = dir.path().join("r.json");
    let out = udgfl(&["solve", "--input", s(&inst), "--config", s(&cfg), "--out", s(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["config"]["solve"]["grid_trials"], 2);
}

#[test]
fn failing_audit_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("bad.json");
    std::fs::write(
        &report,
        r#"{"outcome": {"audits": [
            {"name": "separator.verify", "passed": true, "checked": 3, "witness": null},
            {"name": "decomposition.detour", "passed": false, "checked": 9, "witness": "pair (1, 4) exceeds bound"}
        ]}}"#,
    )
    .unwrap();
    let out = udgfl(&["audit", "--report", s(&report)]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("FAIL decomposition.detour"));
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(udgfl(&["gen", "--n", "0"]).status.code(), Some(1));
    assert_eq!(udgfl(&["solve", "--input", "/nonexistent/file"]).status.code(), Some(1));
    assert_eq!(udgfl(&["frobnicate"]).status.code(), Some(1));
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "0 0 0 facility\n").unwrap();
    let out = udgfl(&["solve", "--input", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
    let dup = dir.path().join("dup.txt");
    std::fs::write(&dup, "0 0 0 client\n1 0 0 facility 1\n").unwrap();
    assert_eq!(udgfl(&["solve", "--input", s(&dup)]).status.code(), Some(1));
    assert_eq!(udgfl(&["solve", "--input", s(&dup), "--merge", "--solver", "exact"]).status.code(), Some(0));
    assert_eq!(udgfl(&["solve", "--input", s(&dup), "--eps", "2"]).status.code(), Some(1));
}
