use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qnoise_core::channel::{Channel, Representation};
use serde_json::Value;

fn qnoise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnoise"))
        .args(args)
        .output()
        .expect("run qnoise")
}

fn bundled(name: &str) -> String {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    root.join(name).to_string_lossy().into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn run_ok(args: &[&str]) {
    let out = qnoise(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn error_report(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("error JSON on stderr")
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: PathBuf) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn ecc_columns_match_the_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ecc.json", r#"{"command":"ecc","grid":[0.0,0.1,0.2,0.5]}"#);
    let out = dir.path().join("out");
    run_ok(&["ecc", "--config", &cfg, "--out", out.to_str().unwrap(), "--plot"]);
    let text = std::fs::read_to_string(out.join("ecc.csv")).unwrap();
    assert!(text.starts_with("p,F_noise,F_code,F_code_simulated\n"));
    for row in csv_rows(out.join("ecc.csv")) {
        let v: Vec<f64> = row.iter().map(|x| x.parse().unwrap()).collect();
        let p = v[0];
        assert!((v[1] - (1.0 - p)).abs() < 1e-10);
        assert!((v[2] - (1.0 - 3.0 * p * p + 2.0 * p * p * p)).abs() < 1e-10);
        assert!((v[3] - v[2]).abs() < 1e-10);
    }
    let rows = csv_rows(out.join("ecc.csv"));
    assert!((rows[2][2].parse::<f64>().unwrap() - 0.896).abs() < 1e-12);
    assert!(out.join("ecc.svg").exists());
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let cfg = bundled("fig9.json");
    run_ok(&["noise-sweep", "--config", &cfg, "--out", a.to_str().unwrap(), "--jobs", "3"]);
    run_ok(&["noise-sweep", "--config", &cfg, "--out", b.to_str().unwrap()]);
    let first = std::fs::read(a.join("sweep.csv")).unwrap();
    assert_eq!(first, std::fs::read(b.join("sweep.csv")).unwrap());
    assert!(!a.join("sweep_negativity.svg").exists());
}

#[test]
fn bundled_depolarizing_sweep_crosses_at_critical_noise() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["noise-sweep", "--config", &bundled("fig8.json"), "--out", dir.path().to_str().unwrap()]);
    let summary = read_json(dir.path().join("summary.json"));
    let curves = summary["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 9);
    for (k, curve) in curves.iter().enumerate() {
        let s = (k + 2) as f64;
        let crossing = curve["zero_crossing"].as_f64().unwrap();
        assert!((crossing - s / (s + 1.0)).abs() < 1e-6, "s = {s}: {crossing}");
    }
}

#[test]
fn bundled_cnot_run_writes_chi_and_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["gate-sim", "--config", &bundled("fig3b.json"), "--out", dir.path().to_str().unwrap()]);
    let samples = read_json(dir.path().join("chi.json"));
    let samples = samples.as_array().unwrap();
    assert_eq!(samples.len(), 11);
    let last: Channel = serde_json::from_value(samples[10]["chi"].clone()).unwrap();
    assert_eq!(last.representation(), Representation::Chi);
    assert_eq!(last.dim(), 4);
    last.to_chi().unwrap();
    let summary = read_json(dir.path().join("summary.json"));
    let f = summary["fidelity"].as_f64().unwrap();
    assert!(f > 0.5 && f < 1.0, "{f}");
    let metrics = csv_rows(dir.path().join("metrics.csv"));
    assert!(metrics.iter().any(|r| r[2] == "negativity_chi" && r[4] == "channel_vs_channel"));
}

#[test]
fn dt_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sim.json",
        r#"{"gate":"SQiSW","noise":{"kind":"relaxation","T1":3,"T2":1.5}}"#,
    );
    let out = dir.path().join("out");
    run_ok(&["gate-sim", "--config", &cfg, "--out", out.to_str().unwrap(), "--dt", "0.005"]);
    assert_eq!(read_json(out.join("summary.json"))["dt"].as_f64(), Some(0.005));
    let bad = qnoise(&["gate-sim", "--config", &cfg, "--out", out.to_str().unwrap(), "--dt", "0.5"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn conversion_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    run_ok(&["convert", "--config", &bundled("convert_phase_flip.json"), "--out", out.to_str().unwrap()]);
    let kraus: Channel =
        serde_json::from_str(&std::fs::read_to_string(out.join("channel.kraus.json")).unwrap()).unwrap();
    assert_eq!(kraus.to_kraus().unwrap().len(), 2);
    let meta = read_json(out.join("convert.json"));
    assert!(meta["round_trip_chi_deviation"].as_f64().unwrap() < 1e-12);
    assert_eq!(meta["rank"], 2);

    let back = write_config(
        &out,
        "back.json",
        r#"{"command":"convert","input":"channel.kraus.json","to":"chi","output":"back.json"}"#,
    );
    run_ok(&["convert", "--config", &back, "--out", out.to_str().unwrap()]);
    let chi: Channel =
        serde_json::from_str(&std::fs::read_to_string(out.join("back.json")).unwrap()).unwrap();
    let original: Channel = serde_json::from_str(
        &std::fs::read_to_string(bundled("channels/phase_flip_chi.json")).unwrap(),
    )
    .unwrap();
    assert!(chi.to_chi().unwrap().max_abs_diff(&original.to_chi().unwrap()) < 1e-12);

    run_ok(&["convert", "--config", &bundled("convert_identity.json"), "--out", out.to_str().unwrap()]);
    let identity: Channel =
        serde_json::from_str(&std::fs::read_to_string(out.join("channel.chi.json")).unwrap()).unwrap();
    let chi = identity.to_chi().unwrap();
    assert!((chi.trace() - 2.0).abs() < 1e-15);
}

#[test]
fn non_cp_input_exits_with_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let result = qnoise(&["convert", "--config", &bundled("convert_not_cp.json"), "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(3));
    let report = error_report(&result);
    assert_eq!(report["error"], "numerical");
    assert!(report["message"].as_str().unwrap().contains("eigenvalue"));
    assert!(!out.exists());
}

#[test]
fn validation_failures_exit_with_code_two_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cases = [
        ("ecc", r#"{"grid":[]}"#),
        ("ecc", r#"{"grid":{"start":0,"stop":1,"count":0}}"#),
        ("ecc", r#"{"grid":[0.1],"colour":"red"}"#),
        ("ecc", r#"{"command":"gate-sim","grid":[0.1]}"#),
        ("ecc", r#"{"grid":[0.5,0.2]}"#),
        ("noise-sweep", r#"{"family":"depolarizing","grid":[],"dims":[2]}"#),
        ("noise-sweep", r#"{"family":"relaxation","grid":[0,1]}"#),
        ("noise-sweep", r#"{"family":"dephasing","grid":[0,1],"dims":[3]}"#),
        ("gate-sim", r#"{"gate":"Toffoli"}"#),
        ("gate-sim", r#"{"gate":"CNOT","noise":{"kind":"relaxation","T1":1,"T2":3}}"#),
        ("gate-sim", r#"{"gate":"CNOT","noise":{"kind":"phase_flip","p":0.1}}"#),
        ("gate-sim", r#"{"gate":"custom"}"#),
        ("negativity", r#"{"sample_times":[],"runs":[{"gate":"CNOT"}]}"#),
        ("negativity", r#"{"sample_times":[0,1],"runs":[]}"#),
        ("negativity", r#"{"sample_times":[0,0.0005],"runs":[{"gate":"CNOT"}]}"#),
    ];
    for (k, (command, body)) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("bad{k}.json"), body);
        let result = qnoise(&[command, "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(result.status.code(), Some(2), "{body}");
        error_report(&result);
        assert!(!out.exists(), "{body} wrote output");
    }
    let missing = qnoise(&["ecc", "--config", "/nonexistent/cfg.json", "--out", out.to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn negativity_runs_share_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "neg.json",
        r#"{
            "command": "negativity",
            "dt": 0.01,
            "sample_times": {"start": 0, "stop": 2, "count": 5},
            "sources": ["chi", "chi_tilde"],
            "runs": [
                {"gate": "SQiSW"},
                {"gate": "CNOT", "noise": {"kind": "relaxation", "T1": 7, "T2": 5}, "label": "noisy"}
            ]
        }"#,
    );
    let out = dir.path().join("out");
    run_ok(&["negativity", "--config", &cfg, "--out", out.to_str().unwrap(), "--jobs", "2", "--plot"]);
    let rows = csv_rows(out.join("negativity.csv"));
    // 2 runs x 2 sources x 2 splits x 5 samples
    assert_eq!(rows.len(), 40);
    let ideal_second: Vec<f64> = rows
        .iter()
        .filter(|r| r[2] == "negativity_chi" && r[3] == "SQiSW" && r[4] == "channel_vs_channel")
        .map(|r| r[1].parse().unwrap())
        .collect();
    assert_eq!(ideal_second[0], 0.0);
    assert!((ideal_second[4] - 1.5).abs() < 1e-8);
    assert!(rows.iter().any(|r| r[3] == "noisy"));
    assert!(out.join("negativity.svg").exists());
}

#[test]
fn depolarized_gates_come_from_the_finished_unitary() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["gate-sim", "--config", &bundled("fig5c.json"), "--out", dir.path().to_str().unwrap()]);
    let summary = read_json(dir.path().join("summary.json"));
    // 1 - p + p/s^2 for s = 4
    let expected = 1.0 - 0.4 + 0.4 / 16.0;
    assert!((summary["fidelity"].as_f64().unwrap() - expected).abs() < 1e-10);
    assert!(summary["dt"].is_null());
}
