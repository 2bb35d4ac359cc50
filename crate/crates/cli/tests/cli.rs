use std::fs;
use std::process::Command;

fn swimale() -> Command {
    Command::new(env!("CARGO_BIN_EXE_swimale"))
}

#[test]
fn lists_bundled_scenarios() {
    let out = swimale().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "three_sphere_free"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn invalid_scenario_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "[time]\nt_final = 1.0\ndt = 0.0\n").unwrap();
    let out = swimale().arg("run").arg(&path).arg("--output-dir").arg(dir.path().join("out")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let missing = swimale().args(["run", "no_such_scenario"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn zero_length_run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = swimale()
        .args(["run", "squirmer_pair_neutral", "--t-final", "0", "--output-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["trajectory.csv", "series.pvd", "checkpoint.json", "snapshot_000000.vtu"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}
