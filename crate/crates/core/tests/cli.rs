//! End-to-end runs of the command-line tool.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn twistbeam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twistbeam"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn missing_reference_is_a_config_error_naming_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "fit.json", r#"{"kind": "fit", "fit": {"reference_csv": "nowhere/markers.csv"}}"#);
    let out = dir.path().join("out");
    let o = twistbeam(&["fit", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("markers.csv"), "{}", stderr(&o));
}

#[test]
fn bad_configs_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), "a.json", r#"{"kind": "free-sweep", "drive_hz": 3}"#);
    let o = twistbeam(&["free-sweep", "--config", &unknown]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("drive_hz"), "{}", stderr(&o));

    let wrong_kind = write_config(dir.path(), "b.json", r#"{"kind": "walker"}"#);
    let o = twistbeam(&["free-sweep", "--config", &wrong_kind]);
    assert_eq!(o.status.code(), Some(2));

    let contact = write_config(dir.path(), "c.json", r#"{"kind": "free-sweep", "contact": {}}"#);
    let o = twistbeam(&["free-sweep", "--config", &contact]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let o = twistbeam(&["plot", "--out", dir.path().join("absent").to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn fit_is_reproducible_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "fit.json",
        r#"{"kind": "fit", "fit": {"noise_rms_mm": 0.5, "optimizer": {"max_generations": 3}}}"#,
    );
    let mut outputs = Vec::new();
    for (run, jobs) in [("a", "1"), ("b", "2")] {
        let out = dir.path().join(run);
        let o = twistbeam(&["fit", "--config", &cfg, "--seed", "4", "--jobs", jobs, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push((
            fs::read(out.join("fit_report.json")).unwrap(),
            fs::read(out.join("fit_convergence.csv")).unwrap(),
            fs::read(out.join("fit_reference.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
    let report: serde_json::Value = serde_json::from_slice(&outputs[0].0).unwrap();
    assert!(report["report"]["parameters"]["k_nm_per_rad"].is_f64());

    // a stored reference fits to the same answer as the synthetic one it came from
    let reference = dir.path().join("a").join("fit_reference.csv");
    let cfg2 = write_config(
        dir.path(),
        "fit2.json",
        &format!(
            r#"{{"kind": "fit", "fit": {{"reference_csv": {:?}, "optimizer": {{"max_generations": 3}}}}}}"#,
            reference.to_str().unwrap()
        ),
    );
    let out = dir.path().join("c");
    let o = twistbeam(&["fit", "--config", &cfg2, "--seed", "4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let again: serde_json::Value = serde_json::from_slice(&fs::read(out.join("fit_report.json")).unwrap()).unwrap();
    assert_eq!(again["report"]["parameters"], report["report"]["parameters"]);
}

#[test]
fn sweep_then_analyze_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "free.json",
        r#"{"kind": "free-sweep", "drive": {"f_lo_hz": 5, "f_hi_hz": 25, "f_step_hz": 10, "amplitude_mm": 2}}"#,
    );
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let o = twistbeam(&["free-sweep", "--config", &cfg, "--out", out_s]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(out.join("free_sweep.csv")).unwrap();
    assert!(table.contains("# config_sha256:"));
    assert_eq!(table.lines().filter(|l| !l.starts_with('#')).count(), 4);

    let o = twistbeam(&["analyze", "--out", out_s]);
    assert!(o.status.success(), "{}", stderr(&o));
    let analysis = fs::read_to_string(out.join("free_sweep_analysis.csv")).unwrap();
    // recomputed from the stored orbits, the shape columns agree with the sweep table
    let pick = |text: &str, col: &str| -> Vec<String> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        let idx = rows[0].split(',').position(|c| c == col).unwrap();
        rows[1..].iter().map(|r| r.split(',').nth(idx).unwrap().to_string()).collect()
    };
    assert_eq!(pick(&table, "class"), pick(&analysis, "class"));
    assert_eq!(pick(&table, "crossings"), pick(&analysis, "crossings"));

    fs::remove_file(out.join("free_sweep_axes.svg")).ok();
    let o = twistbeam(&["plot", "--out", out_s]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(fs::read_dir(&out).unwrap().any(|e| e.unwrap().path().extension().is_some_and(|x| x == "svg")));
}
