//! End-to-end checks of the binary: exit codes, output files, overrides and
//! byte-level reproducibility.

use std::path::Path;
use std::process::Command;

fn linres() -> Command {
    Command::new(env!("CARGO_BIN_EXE_linres"))
}

#[test]
fn sweep_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = linres()
        .args(["sweep", "--ls", "50,100", "--etas", "0.2", "--omega", "3.0"])
        .args(["--out", dir.path().to_str().unwrap(), "--threads", "2"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("sweep.csv").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["sweep"]["l_values"][1], 100);
    assert_eq!(manifest["config"]["sweep"]["omegas"][0], 3.0);

    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "omega,eta,l,re_box,im_box,re_exact,im_exact,abs_err,status"
    );
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn runs_are_byte_reproducible() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        let out = linres()
            .args(["figure2", "--ls", "30", "--etas", "0.1"])
            .args(["--out", d.path().to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let a = std::fs::read(d1.path().join("figure2.csv")).unwrap();
    let b = std::fs::read(d2.path().join("figure2.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_file_drives_the_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(
        &cfg_path,
        r#"
seed = 7
[model]
kind = "lattice-impurity"
v = -4.0
[grids]
l_values = [20]
etas = [0.3]
omegas = { min = 0.0, max = 1.0, step = 0.5 }
"#,
    )
    .unwrap();
    let out = linres()
        .args(["--config", cfg_path.to_str().unwrap()])
        .args(["--out", dir.path().join("o").to_str().unwrap()])
        .args(["freq-response", "--ls", "25"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("o/manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["seed"], 7);
    // the flag overrode the file's box list
    assert_eq!(manifest["config"]["grids"]["l_values"][0], 25);
    assert_eq!(manifest["config"]["grids"]["etas"][0], 0.3);
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.toml");
    std::fs::write(&cfg_path, "definitely_not_a_key = 1\n").unwrap();
    let out = linres()
        .args(["--config", cfg_path.to_str().unwrap(), "sweep"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // missing file is also a configuration failure
    let out = linres()
        .args(["--config", dir.path().join("nope.toml").to_str().unwrap(), "sweep"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_domain_violation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = linres()
        .args(["lap-rate", "--omega", "99.0"])
        .args(["--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn ground_state_subcommand_prints_energies() {
    let dir = tempfile::tempdir().unwrap();
    let out = linres()
        .args(["ground-state", "--ls", "100"])
        .args(["--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("-4.472135955"), "stdout: {stdout}");
    assert!(Path::new(&dir.path().join("ground-state.csv")).exists());
}
