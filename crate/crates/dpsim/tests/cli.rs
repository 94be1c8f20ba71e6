//! End-to-end checks of the installed binary: argument plumbing, config
//! precedence, error wording, and byte determinism of the written files.

use std::path::Path;
use std::process::{Command, Output};

fn dpsim() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dpsim"));
    // Keep the ambient environment from leaking into precedence tests.
    cmd.env_remove("DPSIM_OUTPUT_DIR");
    cmd
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn campaign_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|entry| entry.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|name| {
            let mut bytes = std::fs::read(dir.join(&name)).unwrap();
            if name == "resolved_config.json" {
                // The echo records where it was written; mask that one field
                // so runs into different directories stay comparable.
                let mut value: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
                value["output_dir"] = serde_json::json!("<dir>");
                bytes = serde_json::to_vec(&value).unwrap();
            }
            (name, bytes)
        })
        .collect()
}

/// Numbers (including inside arrays) compared to nine digits, everything
/// else exactly. The trace files round times to whole nanoseconds, so a
/// summary recomputed from disk can sit an ulp away from the original.
fn assert_close(key: &str, reference: &serde_json::Value, rerun: &serde_json::Value) {
    use serde_json::Value;
    match (reference, rerun) {
        (Value::Number(_), Value::Number(_)) => {
            let (x, y) = (reference.as_f64().unwrap(), rerun.as_f64().unwrap());
            let tol = 1e-9 * x.abs().max(1.0);
            assert!((x - y).abs() <= tol, "{key}: {x} vs {y}");
        }
        (Value::Array(a), Value::Array(b)) => {
            assert_eq!(a.len(), b.len(), "{key}: length mismatch");
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                assert_close(&format!("{key}[{i}]"), x, y);
            }
        }
        _ => assert_eq!(reference, rerun, "{key}"),
    }
}

fn simulate_into(dir: &Path, extra: &[&str]) -> Output {
    dpsim()
        .args([
            "simulate",
            "--n-trials",
            "40",
            "--master-seed",
            "9",
            "--output-dir",
            dir.to_str().unwrap(),
        ])
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn version_reports_the_config_schema() {
    let out = dpsim().arg("--version").output().unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("config-schema 1"), "{}", stdout(&out));
}

#[test]
fn selfenergy_prints_the_separated_regime_numbers() {
    let out = dpsim()
        .args(["selfenergy", "--mass", "1", "--radius", "1", "--displacement", "2e12"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    for expected in ["1.0000e12", "8.0088e-11", "1.3168e-24", "5.2394e-26"] {
        assert!(text.contains(expected), "missing {expected} in:\n{text}");
    }
}

#[test]
fn table_prints_rows_and_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dpsim()
        .args(["table", "--output-dir", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    for label in ["proton", "dust", "mirror", "cat"] {
        assert!(text.contains(label), "missing {label} in:\n{text}");
    }
    assert!(dir.path().join("benchmark.txt").exists());
    let csv = std::fs::read_to_string(dir.path().join("benchmark.csv")).unwrap();
    assert!(csv.starts_with("label,"), "{csv}");
    assert_eq!(csv.lines().count(), 5, "{csv}");
}

#[test]
fn simulate_is_byte_deterministic_between_runs() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    assert!(simulate_into(first.path(), &[]).status.success());
    assert!(simulate_into(second.path(), &[]).status.success());

    let a = campaign_files(first.path());
    let b = campaign_files(second.path());
    let names: Vec<&str> = a.iter().map(|(name, _)| name.as_str()).collect();
    assert_eq!(
        names,
        [
            "control_traces.csv",
            "control_trials.json",
            "resolved_config.json",
            "summary.json",
            "superposed_traces.csv",
            "superposed_trials.json",
        ]
    );
    assert_eq!(a, b);
}

#[test]
fn parallelism_flag_does_not_change_the_bytes() {
    let serial = tempfile::tempdir().unwrap();
    let threaded = tempfile::tempdir().unwrap();
    assert!(simulate_into(serial.path(), &["--parallelism", "1"]).status.success());
    assert!(simulate_into(threaded.path(), &["--parallelism", "8"]).status.success());
    assert_eq!(campaign_files(serial.path()), campaign_files(threaded.path()));
}

#[test]
fn set_overrides_beat_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bench.cfg");
    std::fs::write(
        &config_path,
        "# bench overrides\n[apparatus]\ncooling_delta = 30\nn_trials = 5\nmode = control\n",
    )
    .unwrap();

    let out_dir = dir.path().join("run");
    let out = dpsim()
        .args([
            "simulate",
            "--config",
            config_path.to_str().unwrap(),
            "--set",
            "cooling_delta=0",
            "--output-dir",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    let resolved: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("resolved_config.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(resolved["cooling_delta"], serde_json::json!(0.0));
    assert_eq!(resolved["n_trials"], serde_json::json!(5));
    assert_eq!(resolved["mode"], serde_json::json!("control"));
    // Control-only run: no superposed arm, no summary.
    assert!(out_dir.join("control_traces.csv").exists());
    assert!(!out_dir.join("superposed_traces.csv").exists());
    assert!(!out_dir.join("summary.json").exists());
}

#[test]
fn invalid_values_are_rejected_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate_into(dir.path(), &["--set", "spad_efficiency=1.5"]);
    assert!(!out.status.success());
    let text = stderr(&out);
    assert!(text.contains("spad_efficiency"), "{text}");
    assert!(text.contains("[0, 1]"), "{text}");
}

#[test]
fn unknown_keys_get_a_nearest_match_suggestion() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate_into(dir.path(), &["--set", "sample_intervall=1e-4"]);
    assert!(!out.status.success());
    let text = stderr(&out);
    assert!(text.contains("sample_intervall"), "{text}");
    assert!(text.contains("sample_interval"), "{text}");
}

#[test]
fn output_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out = dpsim()
        .args(["simulate", "--n-trials", "3", "--mode", "control"])
        .env("DPSIM_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("resolved_config.json").exists());
    assert!(dir.path().join("control_traces.csv").exists());
}

#[test]
fn estimate_reruns_the_analysis_from_files() {
    let dir = tempfile::tempdir().unwrap();
    assert!(simulate_into(dir.path(), &[]).status.success());
    let before = std::fs::read(dir.path().join("summary.json")).unwrap();

    let out = dpsim()
        .args(["estimate", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("gamma"), "{text}");

    // The re-derived summary agrees with the one written at simulate time.
    let before: serde_json::Value = serde_json::from_slice(&before).unwrap();
    let after: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("summary.json")).unwrap(),
    )
    .unwrap();
    for (key, reference) in before.as_object().unwrap() {
        assert_close(key, reference, &after[key]);
    }
}

#[test]
fn estimate_fails_cleanly_without_a_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let out = dpsim()
        .args(["estimate", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).contains("resolved_config.json"), "{}", stderr(&out));
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dpsim()
        .args([
            "sweep",
            "--param",
            "gamma",
            "--values",
            "0.0397887,1.0",
            "--n-trials",
            "30",
            "--master-seed",
            "11",
            "--output-dir",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3, "{csv}");
    assert!(lines[0].starts_with("param,value,"), "{csv}");
    assert!(lines[1].starts_with("gamma,0.0397887,"), "{csv}");
    assert!(lines[2].starts_with("gamma,1.0,"), "{csv}");
    for value in ["0.0397887", "1.0"] {
        let point = dir.path().join(format!("gamma_{value}"));
        assert!(point.join("summary.json").exists(), "missing {point:?}");
    }
}
