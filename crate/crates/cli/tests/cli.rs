//! End-to-end tests of the `sonoplan` binary: output formats, file
//! round-trips, and the exit-code contract (0 ok, 1 bad input, 2 failed run,
//! 3 I/O).

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sonoplan"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn default_config_simulates_unmodified() {
    let dir = TempDir::new().unwrap();
    for scenario in ["fb", "bs"] {
        let cfg = format!("{scenario}.json");
        let out = run(&["default-config", "--scenario", scenario, "-o", &cfg], dir.path());
        assert!(out.status.success());

        let text = std::fs::read_to_string(dir.path().join(&cfg)).unwrap();
        let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["scenario"], scenario);
        assert_eq!(value["dt"], 0.02);
        assert_eq!(value["sensor"]["delay"], 4);

        // keep the round-trip cheap
        value["duration"] = serde_json::json!(2.0);
        std::fs::write(dir.path().join(&cfg), value.to_string()).unwrap();
        let out = run(
            &["simulate", "--config", &cfg, "--csv", "run.csv", "--summary", "run.json"],
            dir.path(),
        );
        assert!(out.status.success(), "{}", stdout(&out));
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap())
                .unwrap();
        assert_eq!(summary["status"], "completed");
        assert_eq!(summary["steps"], 100);
    }
}

#[test]
fn focus_output_document() {
    let dir = TempDir::new().unwrap();
    let out = run(
        &["focus", "--x", "5", "--y", "-3", "--p-des", "2000", "-o", "focus.json"],
        dir.path(),
    );
    assert!(out.status.success());
    // the human-readable report goes to stdout
    assert!(stdout(&out).contains("wrote"));

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("focus.json")).unwrap())
            .unwrap();
    assert_eq!(doc["phases_rad"].as_array().unwrap().len(), 64);
    assert_eq!(doc["phases_deg"].as_array().unwrap().len(), 64);
    for deg in doc["phases_deg"].as_array().unwrap() {
        let deg = deg.as_u64().unwrap();
        assert!(deg < 360);
    }
    let achieved = doc["achieved_pa"].as_f64().unwrap();
    assert!((achieved - 2000.0).abs() < 1.0);
    assert!(doc["residual"].as_f64().unwrap() < 1e-4);
    assert!(doc["local_max"].is_boolean());
}

#[test]
fn field_scan_shape_and_phase_input() {
    let dir = TempDir::new().unwrap();
    let out = run(
        &["focus", "--p-des", "2500", "-o", "focus.json"],
        dir.path(),
    );
    assert!(out.status.success());

    // a focus document is accepted directly as the phase input
    let out = run(
        &[
            "field-scan",
            "--phases",
            "focus.json",
            "--u-count",
            "31",
            "--v-count",
            "31",
            "-o",
            "scan.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,y,z,abs_p,re_p,im_p");
    assert_eq!(lines.len(), 1 + 31 * 31);

    // the scan magnitude at the focus row should be the achieved amplitude;
    // (0, 0, 65 mm) is on the grid since the counts are odd
    let focus_row = lines[1..]
        .iter()
        .find(|l| {
            l.split(',')
                .take(2)
                .all(|v| v.parse::<f64>().unwrap().abs() < 1e-12)
        })
        .expect("center row present");
    let abs: f64 = focus_row.split(',').nth(3).unwrap().parse().unwrap();
    assert!((abs - 2500.0).abs() < 1.0, "focus magnitude {abs}");

    // bare-array phase files work too
    let zeros = serde_json::to_string(&vec![0.0f64; 64]).unwrap();
    std::fs::write(dir.path().join("zeros.json"), zeros).unwrap();
    let out = run(
        &["field-scan", "--phases", "zeros.json", "--u-count", "3", "--v-count", "3", "-o", "z.csv"],
        dir.path(),
    );
    assert!(out.status.success());
}

#[test]
fn gradcheck_passes_and_fails_by_tolerance() {
    let dir = TempDir::new().unwrap();
    let out = run(&["gradcheck", "--instances", "20"], dir.path());
    assert!(out.status.success());
    assert!(stdout(&out).contains("PASS"));

    let out = run(&["gradcheck", "--instances", "20", "--tolerance", "1e-18"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();

    // 1: config fails validation
    std::fs::write(dir.path().join("bad.json"), "{\"scenario\":\"fb\"}").unwrap();
    let out = run(
        &["simulate", "--config", "bad.json", "--csv", "a.csv", "--summary", "a.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));

    // 1: amplitude above the reachable bound
    let out = run(&["focus", "--p-des", "1e9"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    // 1: usage error
    let out = run(&["focus", "--no-such-flag"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    // 1: phase file with the wrong length
    std::fs::write(dir.path().join("short.json"), "[0.0, 1.0]").unwrap();
    let out = run(&["field-scan", "--phases", "short.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    // 2: the run leaves the manipulation area
    let out = run(&["default-config", "--scenario", "bs", "-o", "bs.json"], dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("bs.json")).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["duration"] = serde_json::json!(10.0);
    value["initial_position"] = serde_json::json!([9.0e-3, 0.0]);
    value["reference"] = serde_json::json!({"kind": "setpoint", "point": [-9.0e-3, 0.0]});
    value["pid"]["kp"] = serde_json::json!(1.0);
    std::fs::write(dir.path().join("runaway.json"), value.to_string()).unwrap();
    let out = run(
        &["simulate", "--config", "runaway.json", "--csv", "r.csv", "--summary", "r.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "out_of_area");

    // 3: missing input file
    let out = run(
        &["simulate", "--config", "nope.json", "--csv", "a.csv", "--summary", "a.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));

    // 0: help
    let out = run(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}
