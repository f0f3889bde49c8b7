use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn thinplate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thinplate")).args(args).env("RUST_LOG", "error").output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const COARSE: &str = r#"
[material.isotropic]
lambda = 1.0
mu = 1.0

[domain.disk]
radius = 1.0

[mesh]
target_h = 0.2
levels = 3

[load]
g1 = []
g2 = []
g3 = [[0, 0, 1.0]]

[capacity]
default_zero = true

[output]
fields = []
"#;

#[test]
fn golden_solve_is_clean_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("golden.toml");
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = thinplate(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        reports.push(std::fs::read(out.join("report.json")).unwrap());
        assert!(out.join("field.csv").exists() && out.join("field.vtk").exists());
    }
    assert_eq!(reports[0], reports[1]);
    let v: serde_json::Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(v["status"], "ok");
    assert_eq!(v["extension"].as_array().map(Vec::len), Some(1));
}

#[test]
fn asymmetric_capacity_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = COARSE.replace(
        "default_zero = true",
        "c_sharp = [[1.0, 0.5, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]",
    );
    let cfg = write_config(dir.path(), "c.toml", &text);
    let o = thinplate(&["solve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("symmetric"), "{}", stderr(&o));
}

#[test]
fn empty_h_list_skips_the_extension() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", COARSE);
    let o = thinplate(&["solve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(matches!(o.status.code(), Some(0) | Some(2)), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(v.get("extension").is_none());
    assert!(v["regular"].is_object());
}

#[test]
fn sweep_needs_four_values() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{COARSE}\n[model]\nln_h = [8.0, 10.0, 12.0]\n");
    let cfg = write_config(dir.path(), "c.toml", &text);
    let o = thinplate(&["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("at least 4"), "{}", stderr(&o));
}

#[test]
fn bad_arguments_exit_with_one() {
    assert_eq!(thinplate(&["solve", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(thinplate(&["solve"]).status.code(), Some(1));
    assert_eq!(thinplate(&["--help"]).status.code(), Some(0));
}

#[test]
fn unknown_config_key_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &format!("{COARSE}\n[extra]\nx = 1\n"));
    let o = thinplate(&["reduce", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("extra"), "{}", stderr(&o));
}

#[test]
fn reduce_writes_plate_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let o = thinplate(&["reduce", "--config", configs().join("golden.toml").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("reduce.json")).unwrap()).unwrap();
    assert!(v["material"]["a0"].is_array());
}
