use std::fs;
use std::path::Path;

use qg_cli::checkpoint::Checkpoint;
use qg_cli::config::{Config, InitKind, SchemeSpec};
use qg_cli::run::{resume, run_simulation, CHECKPOINT, DIAGNOSTICS};
use qg_cli::{parse_config, CliError};
use qg_core::C64;

const SMALL: &str = r#"
[grid]
nx = 16
ny = 16
nz = 8
zmax = 4.0

[solver]
dt = 0.02
T = 0.2
eps = 0.001
"#;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn minimal_file_gets_defaults() {
    let c = Config::parse("[grid]\nnx = 8\nny = 8\nnz = 4\n[solver]\ndt = 0.1\nT = 1.0\n", "t").unwrap();
    assert_eq!((c.solver.eps, c.solver.delta, c.solver.beta), (0.0, 0.0, 0.0));
    assert_eq!(c.solver.cfl, 0.5);
    assert_eq!(c.solver.scheme, SchemeSpec::Reformulated);
    assert_eq!(c.grid.zmax, 8.0);
    assert_eq!(c.init.kind, InitKind::TwoMode);
    assert_eq!(c.output.diagnostics_every, 1);
    let m = c.manifest().unwrap();
    assert_eq!(m.hash.len(), 64);
}

#[test]
fn zero_dt_is_a_range_error() {
    let c = Config::parse("[grid]\nnx = 8\nny = 8\nnz = 4\n[solver]\ndt = 0.0\nT = 1.0\n", "t").unwrap();
    assert!(matches!(c.manifest(), Err(CliError::Core(qg_core::QgError::InvalidParameter(_)))));
}

#[test]
fn unknown_key_is_named() {
    let e = Config::parse("[grid]\nnx = 8\nny = 8\nnz = 4\nbogus = 1\n[solver]\ndt = 0.1\nT = 1.0\n", "t").unwrap_err();
    let msg = e.to_string();
    assert!(matches!(e, CliError::Parse(_)));
    assert!(msg.contains("bogus"), "{msg}");
    assert!(msg.contains("line 5"), "{msg}");
}

#[test]
fn hash_tracks_numerics_only() {
    let base = Config::parse(SMALL, "t").unwrap();
    let h = base.clone().manifest().unwrap().hash;
    let mut c = base.clone();
    c.output.dir = Some("elsewhere".into());
    c.output.checkpoint_every = 3;
    assert_eq!(c.manifest().unwrap().hash, h);
    let mut c = base.clone();
    c.solver.eps = 0.002;
    assert_ne!(c.manifest().unwrap().hash, h);
    let mut c = base;
    c.seed = 1;
    assert_ne!(c.manifest().unwrap().hash, h);
}

#[test]
fn checkpoint_bytes_round_trip() {
    let ck = Checkpoint {
        hash: [7; 32],
        step: 12,
        t: 0.24,
        scheme: 1,
        blocks: vec![vec![C64::new(1.0, -2.0)], vec![]],
        csv: "a,b\n1,2\n".into(),
    };
    let b = ck.to_bytes();
    assert_eq!(&b[..4], b"QGCK");
    assert_eq!(Checkpoint::from_bytes(&b).unwrap(), ck);
    assert!(Checkpoint::from_bytes(&b[..b.len() - 1]).is_err());
    let mut bad = b.clone();
    bad[0] = b'X';
    assert!(matches!(Checkpoint::from_bytes(&bad), Err(CliError::Checkpoint(_))));
}

#[test]
fn empty_schedule_writes_only_final_snapshots() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", SMALL);
    let m = parse_config(&cfg, None).unwrap();
    let out = d.path().join("out");
    let s = run_simulation(&m, &out).unwrap();
    assert_eq!(s.steps, 10);
    assert_eq!(s.rows, 11);
    let mut names: Vec<String> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, vec!["diagnostics.csv", "manifest.json", "psi_final.qghs", "theta_final.qghs"]);
    let csv = fs::read_to_string(out.join(DIAGNOSTICS)).unwrap();
    assert_eq!(csv.lines().count(), 12);
    assert!(csv.starts_with("t,norm_grad_lambda_L2,"));
}

fn split_run(text: &str) -> (String, String) {
    let d = tempfile::tempdir().unwrap();
    let full = parse_config(&write(d.path(), "a.toml", text), None).unwrap();
    let a = d.path().join("a");
    run_simulation(&full, &a).unwrap();
    let split_text = format!("{text}\n[output]\ncheckpoint_every = 5\n");
    let split = parse_config(&write(d.path(), "b.toml", &split_text), None).unwrap();
    assert_eq!(split.hash, full.hash);
    let b = d.path().join("b");
    run_simulation(&split, &b).unwrap();
    let c = d.path().join("c");
    fs::create_dir_all(&c).unwrap();
    fs::copy(b.join(CHECKPOINT), c.join(CHECKPOINT)).unwrap();
    resume(&split, &c, &c.join(CHECKPOINT)).unwrap();
    (fs::read_to_string(a.join(DIAGNOSTICS)).unwrap(), fs::read_to_string(c.join(DIAGNOSTICS)).unwrap())
}

#[test]
fn resume_reproduces_uninterrupted_run() {
    let (a, c) = split_run(SMALL);
    assert_eq!(a, c);
    let classical = SMALL.replace("eps = 0.001", "eps = 0.001\nscheme = \"classical\"");
    let (a, c) = split_run(&classical);
    assert_eq!(a, c);
}

#[test]
fn edited_config_is_rejected_on_resume() {
    let d = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}\n[output]\ncheckpoint_every = 5\n");
    let m = parse_config(&write(d.path(), "a.toml", &text), None).unwrap();
    let out = d.path().join("o");
    run_simulation(&m, &out).unwrap();
    let edited = parse_config(&write(d.path(), "b.toml", &text.replace("0.001", "0.002")), None).unwrap();
    assert!(matches!(resume(&edited, &out, &out.join(CHECKPOINT)), Err(CliError::HashMismatch { .. })));
    let reseeded = parse_config(&write(d.path(), "a.toml", &text), Some(99)).unwrap();
    assert!(matches!(resume(&reseeded, &out, &out.join(CHECKPOINT)), Err(CliError::HashMismatch { .. })));
}

#[test]
fn thread_count_does_not_change_results() {
    let d = tempfile::tempdir().unwrap();
    let text = SMALL.replace("[solver]", "[init]\nkind = \"random-seeded\"\namplitude = 0.5\n\n[solver]");
    let m = parse_config(&write(d.path(), "a.toml", &text), None).unwrap();
    let mut out = Vec::new();
    for n in [1, 3] {
        let dir = d.path().join(format!("t{n}"));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        pool.install(|| run_simulation(&m, &dir)).unwrap();
        out.push(fs::read(dir.join(DIAGNOSTICS)).unwrap());
    }
    assert_eq!(out[0], out[1]);
}

#[test]
fn snapshot_schedule_and_initial_data_from_snapshot() {
    let d = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}\n[output]\nsnapshot_every = 5\n");
    let m = parse_config(&write(d.path(), "a.toml", &text), None).unwrap();
    let out = d.path().join("o");
    run_simulation(&m, &out).unwrap();
    assert!(out.join("psi_000005.qghs").exists() && out.join("theta_000005.qghs").exists());
    assert!(!out.join("psi_000010.qghs").exists());
    let snap = out.join("psi_final.qghs");
    let from = SMALL.replace("[solver]", &format!("[init]\nkind = \"from-snapshot\"\npath = {:?}\n\n[solver]", snap.display().to_string()));
    let m2 = parse_config(&write(d.path(), "b.toml", &from), None).unwrap();
    assert_eq!(m2.inputs.len(), 1);
    run_simulation(&m2, &d.path().join("p")).unwrap();
    let bad = SMALL.replace("[solver]", "[init]\nkind = \"from-snapshot\"\n\n[solver]");
    assert!(matches!(parse_config(&write(d.path(), "c.toml", &bad), None), Err(CliError::Range(_))));
}
