//! End-to-end checks of the command-line contract: exit codes, artifact
//! shapes, and byte-identical reruns.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stringlab"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("stringlab-cli-{}-{}", name, std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn no_arguments_is_a_usage_error() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("Usage"), "{text}");
}

#[test]
fn unknown_flags_are_usage_errors() {
    let out = run(&["spectrum", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_writes_json_and_csv_mirrors_deterministically() {
    let dir = scratch("spectrum");
    let out_a = dir.join("a.json");
    let out_b = dir.join("b.json");
    for path in [&out_a, &out_b] {
        let out = run(&[
            "spectrum",
            "--d",
            "8",
            "--max-level",
            "2",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert_eq!(a, b, "reruns must be byte-identical");

    let parsed: serde_json::Value = serde_json::from_slice(&a).unwrap();
    let rows = parsed.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1]["dim_total"], serde_json::json!(8));
    assert!(rows[0]["r"].as_str().unwrap().contains('/'));

    let csv = std::fs::read_to_string(out_a.with_extension("csv")).unwrap();
    assert!(csv.starts_with("d,level,r,dim_total"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn spectrum_rejects_off_shell_momentum() {
    let out = run(&[
        "spectrum",
        "--d",
        "4",
        "--max-level",
        "1",
        "--momentum",
        "7,0,0,0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_accepts_on_shell_momentum_override() {
    let dir = scratch("momentum");
    let path = dir.join("table.json");
    // Lightlike (2, 2, 0, 0) sits on the level-1 shell.
    let out = run(&[
        "spectrum",
        "--d",
        "4",
        "--max-level",
        "1",
        "--momentum",
        "2,2,0,0",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rows = parsed.as_array().unwrap();
    assert_eq!(rows[1]["momentum"][0], serde_json::json!("2/1"));
    // The level-0 row keeps its default shell point.
    assert_eq!(rows[0]["momentum"][0], serde_json::json!("1/2"));
}

#[test]
fn noghost_exit_codes() {
    let dir = scratch("noghost");
    let ok = run(&[
        "noghost",
        "--d",
        "26",
        "--level",
        "1",
        "--out",
        dir.join("ok.json").to_str().unwrap(),
    ]);
    assert_eq!(ok.status.code(), Some(0));

    let fault = run(&[
        "noghost",
        "--d",
        "26",
        "--level",
        "1",
        "--fault-inject",
        "--out",
        dir.join("fault.json").to_str().unwrap(),
    ]);
    assert_eq!(fault.status.code(), Some(1), "injected fault must fail");

    let ghost = run(&[
        "noghost",
        "--d",
        "27",
        "--level",
        "2",
        "--out",
        dir.join("ghost.json").to_str().unwrap(),
    ]);
    assert_eq!(ghost.status.code(), Some(1), "d=27 carries a ghost");
}

#[test]
fn virasoro_check_reports_closure() {
    let dir = scratch("virasoro");
    let path = dir.join("closure.json");
    let out = run(&[
        "virasoro-check",
        "--d",
        "4",
        "--mmax",
        "2",
        "--level",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(parsed["all_match"], serde_json::json!(true));
    // The (−2, 2) pair measures d(m³−m)/12 at m = −2, i.e. −d/2 = −2.
    let pair = parsed["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["m"] == serde_json::json!(-2) && p["n"] == serde_json::json!(2))
        .unwrap();
    assert_eq!(pair["central_coefficient"], serde_json::json!("-2/1"));
}

#[test]
fn measure_checks_pass() {
    let dir = scratch("measure");
    for (check, nodes) in [("invariance", "160"), ("lightcone", "140"), ("fiber", "120")] {
        let out = run(&[
            "measure",
            "--d",
            "2",
            "--r",
            "1",
            "--check",
            check,
            "--nodes",
            nodes,
            "--out",
            dir.join(format!("{check}.json")).to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{check}");
    }
}

#[test]
fn commutator_single_and_scan() {
    let dir = scratch("commutator");
    let cfg = dir.join("pair.json");
    std::fs::write(
        &cfg,
        r#"{
            "d": 2,
            "level": 2,
            "f": {"kind": "bump", "center": [0.0, 0.0], "widths": [0.5, 0.5]},
            "g": {"kind": "bump", "center": [3.0, 0.5], "widths": [0.5, 0.5]},
            "sampling": {"half_width": 80.0, "nodes": 512},
            "direction": [0.45, 1.0],
            "radii": [2, 4],
            "epsilon": 0.1
        }"#,
    )
    .unwrap();
    let single = run(&[
        "commutator",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("value.json").to_str().unwrap(),
    ]);
    assert_eq!(single.status.code(), Some(0));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("value.json")).unwrap()).unwrap();
    assert!(parsed["abs"].as_f64().unwrap() > 0.0);

    let scan = run(&[
        "commutator",
        "--config",
        cfg.to_str().unwrap(),
        "--scan",
        "spacelike",
        "--out",
        dir.join("scan.csv").to_str().unwrap(),
    ]);
    assert_eq!(scan.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("scan.csv")).unwrap();
    assert!(csv.starts_with("radius,re,im,reference_scale"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn decay_scan_writes_table() {
    let dir = scratch("decay");
    let out = run(&[
        "decay-scan",
        "--nodes",
        "256",
        "--momentum-box",
        "12",
        "--radii",
        "2,4,8",
        "--out",
        dir.join("decay.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("decay.csv")).unwrap();
    assert!(csv.contains("# log-log slope:"));
}

#[test]
fn field_layer_commands_pass() {
    let dir = scratch("field");
    let ccr = run(&["field-ccr", "--out", dir.join("ccr.json").to_str().unwrap()]);
    assert_eq!(ccr.status.code(), Some(0), "{}", String::from_utf8_lossy(&ccr.stderr));

    let obs = run(&[
        "observable-check",
        "--d",
        "4",
        "--level",
        "1",
        "--out",
        dir.join("obs.json").to_str().unwrap(),
    ]);
    assert_eq!(obs.status.code(), Some(0));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("obs.json")).unwrap()).unwrap();
    assert_eq!(parsed["pass"], serde_json::json!(true));
}

#[test]
fn out_dir_env_var_sets_default_location() {
    let dir = scratch("envvar");
    let out = bin()
        .args(["noghost", "--d", "10", "--level", "1"])
        .env("STRINGLAB_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.join("noghost.json").exists());
}
