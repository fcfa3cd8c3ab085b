use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fraclab"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("fraclab-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn run(cmd: &str, cfg: &Path, out: &Path) -> (i32, String) {
    let o = bin().args([cmd, "--config"]).arg(cfg).arg("--out").arg(out).output().unwrap();
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn bootstrap_reports_closing_index() {
    let out = scratch("bootstrap");
    let (code, _) = run("bootstrap", &config("bootstrap.json"), &out);
    assert_eq!(code, 0);
    assert_eq!(report(&out)["result"]["plan"]["m0"], 3);
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["pass"], true);
    assert!(manifest["outputs"].as_array().unwrap().iter().any(|f| f == "bootstrap.csv"));
}

#[test]
fn eval_bubble_at_origin() {
    let out = scratch("eval");
    let (code, _) = run("eval", &config("eval_bubble.json"), &out);
    assert_eq!(code, 0);
    let v = report(&out)["result"]["values"][0]["value"].as_f64().unwrap();
    assert!((v - 2.0).abs() < 1e-6, "{v}");
    let csv = std::fs::read_to_string(out.join("eval.csv")).unwrap();
    assert!(csv.starts_with("x0,x1,x2,value,abs_error\n"));
    let dat = std::fs::read_to_string(out.join("eval.dat")).unwrap();
    assert!(dat.lines().take(3).all(|l| l.starts_with('#')));
}

#[test]
fn out_of_range_gamma_is_rejected() {
    let dir = scratch("invalid");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.json");
    std::fs::write(&cfg, r#"{"problem": {"n": 3, "gamma": 2.0, "p": 1.2}}"#).unwrap();
    let (code, err) = run("bootstrap", &cfg, &dir.join("out"));
    assert_eq!(code, 2);
    assert!(err.contains("gamma"), "{err}");
    assert!(!dir.join("out").join("report.json").exists());
}

#[test]
fn sigma_at_or_above_gamma_is_rejected() {
    let dir = scratch("sigma");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"problem": {"n": 3, "gamma": 0.8, "sigma_list": [0.8]},
            "field": {"dim": 3, "kind": "ball_indicator", "params": {"radius": 1.0}},
            "sweeps": {"points": [[2.0, 0.0, 0.0]]}}"#,
    )
    .unwrap();
    let (code, err) = run("superharmonic", &cfg, &dir.join("out"));
    assert_eq!(code, 2);
    assert!(err.contains("sigma"), "{err}");
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = scratch("unknown");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.json");
    std::fs::write(&cfg, r#"{"problem": {"n": 3, "gama": 0.5}}"#).unwrap();
    assert_eq!(run("bootstrap", &cfg, &dir.join("out")).0, 2);
}

#[test]
fn manifold_cutoff_scale_restriction_is_a_config_error() {
    let dir = scratch("eps");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"problem": {"n": 3, "sigma": 0.5},
            "set": {"dim": 3, "variant": "circle_in_r3", "center": [0, 0, 0], "radius": 1.0, "normal": [0, 0, 1]},
            "cutoff": {"kind": "manifold", "rho": 0.25},
            "sweeps": {"eps": [0.01, 0.1], "probes": [{"scaled": 4.0}]}}"#,
    )
    .unwrap();
    let (code, err) = run("cutoff-bound", &cfg, &dir.join("out"));
    assert_eq!(code, 2, "{err}");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    for (cmd, cfg) in [("cutoff-bound", "cutoff_point.json"), ("tube", "tube_circle.json")] {
        assert_eq!(run(cmd, &config(cfg), &a).0, 0);
        assert_eq!(run(cmd, &config(cfg), &b).0, 0);
        let ra = std::fs::read(a.join("report.json")).unwrap();
        let rb = std::fs::read(b.join("report.json")).unwrap();
        assert_eq!(ra, rb, "{cmd}");
    }
}

#[test]
fn every_example_config_validates() {
    use fraclab_cli::ExperimentConfig;
    for entry in std::fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let cmd = cfg.command.expect("example configs name their command");
        cfg.validate(cmd).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
