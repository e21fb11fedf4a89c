use std::fs;
use std::process::Command;

const TINY: &str = r#"
[grid]
nx = 16
ny = 16
nz = 8
zmax = 4.0

[init]
kind = "two-mode"
amplitude = 1.0

[solver]
dt = 0.02
T = 0.1
eps = 0.1
delta = 0.4
"#;

fn qghs(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qghs")).args(args).output().unwrap()
}

#[test]
fn every_subcommand_runs() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("c.toml");
    fs::write(&cfg, TINY).unwrap();
    let out = d.path().join("o");
    let (c, o) = (cfg.to_str().unwrap(), out.to_str().unwrap());
    for sub in [
        vec!["run", "--config", c, "--out", o, "--threads", "2"],
        vec!["sqg-run", "--config", c, "--out", o],
        vec!["probe-picard", "--config", c, "--out", o, "--pairs", "2", "--span-count", "6"],
        vec!["stability-sweep", "--config", c, "--out", o, "--levels", "3"],
        vec!["check", "--config", c, "--out", o, "--samples", "2", "--seed", "5"],
    ] {
        let r = qghs(&sub);
        assert!(r.status.success(), "{sub:?}: {}", String::from_utf8_lossy(&r.stderr));
    }
    for f in ["diagnostics.csv", "sqg_diagnostics.csv", "picard.json", "stability.json", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let p: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("picard.json")).unwrap()).unwrap();
    assert_eq!(p["contraction"].as_array().unwrap().len(), 6);
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("stability.json")).unwrap()).unwrap();
    assert_eq!(s["gaps"].as_array().unwrap().len(), 2);
}

#[test]
fn errors_exit_with_status_two() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("c.toml");
    fs::write(&cfg, TINY.replace("dt = 0.02", "dt = 0.02\nwat = 3")).unwrap();
    let r = qghs(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("wat"));
    let r = qghs(&["resume", "--config", cfg.to_str().unwrap(), "--checkpoint", "/nonexistent"]);
    assert_eq!(r.status.code(), Some(2));
}
