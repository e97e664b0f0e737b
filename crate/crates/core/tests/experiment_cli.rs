use std::path::Path;
use std::process::Command;

use mgtlab::experiment::{report, run_into, validate, Config, Manifest, MANIFEST_FILE};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mgtlab"))
}

const ROOTS: &str = r#"
name = "roots_smoke"
[params]
tau = 0.1
delta = 1.0
[experiment]
kind = "roots"
xi = { min = 0.1, max = 10.0, points = 5 }
"#;

const SWEEP: &str = r#"
name = "sweep_smoke"
[params]
tau = 0.1
delta = 1.0
[data]
psi0 = { profile = "gaussian", amplitude = 1.0, width = 0.5 }
compatible = true
[experiment]
kind = "limit-sweep"
taus = [0.1, 0.05]
sweep = { t_end = 5.0, points = 200, norms = ["l2"] }
[[experiment.grids]]
backend = "radial"
dim = 1
r_max = 8.0
panels = 4
order = 8
"#;

const ENERGY: &str = r#"
name = "energy_smoke"
[params]
tau = 0.1
delta = 1.0
[experiment]
kind = "energy-check"
taus = [0.1]
xi = { min = 0.1, max = 1.0, points = 3 }
t_end = 2.0
"#;

#[test]
fn unknown_keys_are_rejected() {
    let text = ROOTS.replace("[experiment]", "[experiment]\ncolour = 3");
    let err = Config::from_toml(&text).unwrap_err().to_string();
    assert!(err.contains("colour"), "{err}");
}

#[test]
fn energy_check_needs_tau_below_delta() {
    let cfg = Config::from_toml(&ENERGY.replace("taus = [0.1]", "taus = [1.5]")).unwrap();
    let err = validate(&cfg).unwrap_err().to_string();
    assert!(err.contains("tau < delta"), "{err}");
}

#[test]
fn roots_run_writes_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(&Config::from_toml(ROOTS).unwrap(), dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("roots.csv")).unwrap();
    assert!(csv.starts_with("xi,re_l1,im_l1,re_l2,im_l2,re_l3,im_l3,discriminant,degenerate\n"));
    assert_eq!(csv.lines().count(), 6);
    assert!(out.manifest.all_passed);
    let back = Manifest::read(&dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(back.name, "roots_smoke");
}

#[test]
fn sweep_reports_orders_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(&Config::from_toml(SWEEP).unwrap(), dir.path()).unwrap();
    let json = std::fs::read_to_string(dir.path().join("sweep_g0_n1.json")).unwrap();
    assert!(json.contains("\"orders\""));
    let rep = report(&out.manifest_path, true).unwrap();
    assert!(rep.missing.is_empty());
    assert!(!rep.svgs.is_empty());
    for svg in &rep.svgs {
        let text = std::fs::read_to_string(svg).unwrap();
        assert!(text.starts_with("<svg") || text.starts_with("<?xml"));
        assert!(!text.contains("NaN"));
    }
}

#[test]
fn energy_report_marks_the_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(&Config::from_toml(ENERGY).unwrap(), dir.path()).unwrap();
    let rep = report(&out.manifest_path, true).unwrap();
    let text = std::fs::read_to_string(&rep.svgs[0]).unwrap();
    assert!(text.contains("min "));
}

#[test]
fn report_lists_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(&Config::from_toml(SWEEP).unwrap(), dir.path()).unwrap();
    std::fs::remove_file(dir.path().join("sweep_g0_n1.csv")).unwrap();
    let rep = report(&out.manifest_path, true).unwrap();
    assert!(rep.missing.iter().any(|m| m == "sweep_g0_n1.csv"), "{:?}", rep.missing);
    assert!(rep.summary.contains("missing files"));
    assert!(Path::new(&dir.path().join("report.txt")).exists());
}

#[test]
fn cli_exit_codes_follow_the_checks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("roots.toml");
    std::fs::write(&cfg, ROOTS).unwrap();
    let ok = bin().arg("run").arg(&cfg).arg("--output-root").arg(dir.path()).status().unwrap();
    assert_eq!(ok.code(), Some(0));
    assert!(dir.path().join("roots_smoke").join(MANIFEST_FILE).exists());

    let bad = dir.path().join("energy.toml");
    std::fs::write(&bad, ENERGY.replace("taus = [0.1]", "taus = [2.0]")).unwrap();
    let out = bin().arg("run").arg(&bad).arg("--output-root").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tau < delta"));

    let env_root = dir.path().join("from_env");
    let status = bin()
        .args(["run"])
        .arg(&cfg)
        .args(["--set", "name=renamed", "--no-report"])
        .env("MGTLAB_OUTPUT_ROOT", &env_root)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(env_root.join("renamed").join(MANIFEST_FILE).exists());
}

#[test]
fn gn_check_shortcut_prints_json() {
    let out = bin().args(["gn-check", "--n", "3", "--s", "1/2"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.is_array() || v.is_object());
}
