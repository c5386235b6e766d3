use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use uhlmann::cli::{ReportFile, SceneFile};

fn scene(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenes");
    root.join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uhlmann"))
        .args(args)
        .env_remove("UHLMANN_EQ_TOL")
        .output()
        .expect("binary runs")
}

fn json_report(args: &[&str]) -> (Value, i32) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = run(&full);
    let value = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    (value, out.status.code().unwrap())
}

fn verdicts(report: &Value) -> Vec<(String, String)> {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            (
                c["name"].as_str().unwrap().to_owned(),
                c["verdict"].as_str().unwrap().to_owned(),
            )
        })
        .collect()
}

fn verdict<'a>(report: &'a Value, name: &str) -> &'a str {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .and_then(|c| c["verdict"].as_str())
        .unwrap_or_else(|| panic!("no check named {name}"))
}

#[test]
fn tensor_split_passes_every_check() {
    let (report, code) = json_report(&["check", &scene("two_qubits.json"), "--a", "left", "--b", "right"]);
    assert_eq!(code, 0);
    for (name, v) in verdicts(&report) {
        assert_eq!(v, "pass", "{name}");
    }
}

#[test]
fn diagonal_inclusion_reports_witness() {
    let (report, code) = json_report(&["check", &scene("two_qubits.json"), "--a", "diag_left", "--b", "right"]);
    assert_eq!(code, 0);
    assert_eq!(verdict(&report, "commutation"), "pass");
    assert_eq!(verdict(&report, "haag_duality"), "fail");
    assert_eq!(verdict(&report, "uhlmann_property"), "fail");
}

#[test]
fn uhlmann_command_finds_zero_overlap() {
    let args = [
        "uhlmann",
        &scene("two_qubits.json"),
        "--a",
        "diag_left",
        "--b",
        "right",
        "--psi",
        "plus0",
        "--phi",
        "minus0",
    ];
    let (report, code) = json_report(&args);
    assert_eq!(code, 0);
    let check = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "max_overlap")
        .unwrap();
    assert!(check["residual"].as_f64().unwrap() > 1.0 - 1e-12);
}

#[test]
fn fidelity_matches_and_rejects_non_positive_input() {
    let path = scene("qubit_densities.json");
    let (report, code) = json_report(&["fidelity", &path, "--rho", "pure0", "--sigma", "mixed"]);
    assert_eq!(code, 0);
    assert_eq!(verdict(&report, "fidelity"), "pass");
    let (report, code) = json_report(&["fidelity", &path, "--rho", "pure0", "--sigma", "not_psd"]);
    assert_eq!(code, 2);
    assert!(report["checks"][0]["error"]["kind"] == "input");
}

#[test]
fn malformed_scene_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"hilbert_dim":2,"algebras":{"A":{"generators":[[[[1,0]],[[0,0],[1,0]]]]}}}"#,
    )
    .unwrap();
    let out = run(&["check", path.to_str().unwrap(), "--a", "A", "--b", "A"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("algebras.A.generators[0][0]"), "{stderr}");
}

#[test]
fn unknown_algebra_is_an_input_error() {
    let out = run(&["check", &scene("two_qubits.json"), "--a", "nope", "--b", "right"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_lattice_size_is_rejected() {
    let out = run(&["toric", "--L", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least 2"));
    let out = run(&["toric", "--L", "3", "--demo", "dense-crosscheck"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn toric_classes_report_sector_facts() {
    let (report, code) = json_report(&["toric", "--L", "4", "--demo", "classes"]);
    assert_eq!(code, 0);
    assert_eq!(verdict(&report, "gram_identity"), "pass");
    let (anyons, code) = json_report(&["toric", "--L", "3", "--demo", "anyons"]);
    assert_eq!(code, 0);
    assert_eq!(verdict(&anyons, "ground_state"), "pass");
}

#[test]
fn same_seed_gives_identical_reports() {
    let args = [
        "--seed",
        "7",
        "check",
        &scene("two_qubits.json"),
        "--a",
        "diag_left",
        "--b",
        "right",
    ];
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timing_ms");
        serde_json::to_string(&v).unwrap()
    };
    let (first, _) = json_report(&args);
    let (second, _) = json_report(&args);
    assert_eq!(strip(first), strip(second));
}

#[test]
fn report_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = run(&[
        "--format",
        "json",
        "--report",
        out_path.to_str().unwrap(),
        "check",
        &scene("two_qubits.json"),
        "--a",
        "left",
        "--b",
        "right",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let parsed: ReportFile = serde_json::from_str(&text).unwrap();
    let again = parsed.to_json();
    let reparsed: ReportFile = serde_json::from_str(&again).unwrap();
    assert_eq!(again, reparsed.to_json());
}

#[test]
fn scene_round_trips_through_canonical_json() {
    for name in ["two_qubits.json", "qubit_densities.json"] {
        let text = std::fs::read_to_string(scene(name)).unwrap();
        let file = SceneFile::parse(&text, name).unwrap();
        let canonical = file.to_canonical_json();
        let again = SceneFile::parse(&canonical, name).unwrap().to_canonical_json();
        assert_eq!(canonical, again);
    }
}

#[test]
fn tolerance_flag_overrides_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_uhlmann"))
        .args(["--format", "json", "--tol", "1e-7", "toric", "--L", "3"])
        .env("UHLMANN_EQ_TOL", "1e-5")
        .output()
        .unwrap();
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["tolerances"]["eq_tol"].as_f64(), Some(1e-7));
    let out = Command::new(env!("CARGO_BIN_EXE_uhlmann"))
        .args(["--format", "json", "toric", "--L", "3"])
        .env("UHLMANN_EQ_TOL", "1e-12")
        .output()
        .unwrap();
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["tolerances"]["eq_tol"].as_f64(), Some(1e-12));
    assert!(report["tolerances"]["rank_tol"].as_f64().unwrap() <= 1e-12);
}
