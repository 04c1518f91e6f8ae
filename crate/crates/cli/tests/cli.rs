use gauge_moduli_cli::artifacts::read_manifest;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gauge-moduli"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(config: &Path, out: &Path) -> Output {
    bin().arg("run").arg(config).arg("--out").arg(out).output().unwrap()
}

const IDENTITY: &str = "schema_version = 1\nchecks = [\"identity\"]\n[mesh]\ngenus = 1\n";

const CONTINUATION: &str = r#"schema_version = 1
seed = 5
[mesh]
genus = 2
[experiment]
system = "coupled_hitchin"
eps = -1.0
[solver]
schedule = [0.0, 0.05, 0.1]
"#;

#[test]
fn identity_config_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "id.toml", IDENTITY);
    let out = run(&cfg, &dir.path().join("run"));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}\n{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout.contains("[PASS] quaternion relations"));
    assert!(!stdout.contains("[FAIL]"));
    let m = read_manifest(&dir.path().join("run")).unwrap();
    assert_eq!(m.exit_code, 0);
    assert!(m.artifacts.contains(&"checks.json".to_string()));
}

#[test]
fn zero_eps_is_a_schema_error_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{IDENTITY}[experiment]\nsystem = \"coupled_harmonic\"\neps = 0.0\n");
    let cfg = write_config(dir.path(), "bad.toml", &text);
    let out = run(&cfg, &dir.path().join("run"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema error"));
    assert!(!dir.path().join("run").exists());
}

#[test]
fn seed_flag_overrides_config_and_changes_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", CONTINUATION);
    let a = dir.path().join("a");
    assert_eq!(run(&cfg, &a).status.code(), Some(0));
    let b = dir.path().join("b");
    let out = bin().arg("run").arg(&cfg).arg("--seed").arg("6").arg("--out").arg(&b).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let (ma, mb) = (read_manifest(&a).unwrap(), read_manifest(&b).unwrap());
    assert_eq!((ma.seed, mb.seed), (5, 6));
    assert_ne!(ma.config_hash, mb.config_hash);
}

#[test]
fn repeated_runs_write_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", CONTINUATION);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&cfg, &a).status.code(), Some(0));
    assert_eq!(run(&cfg, &b).status.code(), Some(0));
    let names = read_manifest(&a).unwrap().artifacts;
    assert!(names.len() >= 7, "{names:?}");
    for name in names.iter().chain([&"manifest.json".to_string()]) {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name} differs");
    }
}

#[test]
fn continuation_run_exports_table_and_nondegenerate_moduli() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", CONTINUATION);
    let runs = dir.path().join("runs");
    assert_eq!(run(&cfg, &runs.join("first")).status.code(), Some(0));

    let moduli: Value = serde_json::from_str(&std::fs::read_to_string(runs.join("first/moduli.json")).unwrap()).unwrap();
    let report = &moduli[0]["report"];
    assert_eq!(report["nondegenerate"], Value::Bool(true));
    assert_eq!(report["signature"]["zero"], 0);

    let out = bin().args(["export", "--format", "csv"]).arg(runs.join("first")).arg("--out").arg(dir.path().join("csv")).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dir.path().join("csv/first.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("alpha,residual,kernel_dim,signature"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("0.0,") && rows[0].ends_with(",,"));
    assert!(rows[2].starts_with("0.1,") && rows[2].contains(",0,"));

    assert_eq!(run(&cfg, &runs.join("second")).status.code(), Some(0));
    let out = bin().args(["export", "--format", "json"]).arg(&runs).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let all: Value = serde_json::from_str(&std::fs::read_to_string(runs.join("export/runs.json")).unwrap()).unwrap();
    let arr = all.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    assert_eq!(arr[0]["run"], "first");
    assert_eq!(arr[1]["manifest"]["seed"], 5);
    assert!(arr[0]["artifacts"]["table.csv"].is_array());
}

#[test]
fn export_of_a_directory_without_runs_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["export", "--format", "json"]).arg(dir.path()).output().unwrap();
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no manifest"));
}

#[test]
fn check_subcommand_reports_each_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["check", "hamiltonian", "--seed", "1", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.contains("[PASS]")).count(), 5);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("check_hamiltonian.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], Value::Bool(true));
    assert_eq!(report["seed"], 1);
}
