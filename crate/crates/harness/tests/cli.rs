use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shiftlab"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("shiftlab-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn forster_check_on_the_cross() {
    let dir = scratch("cross");
    let file = dir.join("cross.csv");
    std::fs::write(&file, "1,0\n-1,0\n0,1\n0,-1\n").unwrap();
    let out = bin().args(["forster", "check"]).arg(&file).args(["--eps", "0.1"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "isotropic, eps=0");
}

#[test]
fn forster_check_rejects_zero_rows() {
    let dir = scratch("zero");
    let file = dir.join("zero.csv");
    std::fs::write(&file, "1,0\n0,0\n").unwrap();
    let out = bin().args(["forster", "check"]).arg(&file).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));
}

#[test]
fn run_writes_reports() {
    let dir = scratch("hybrid");
    let config = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/hybrid.json");
    let out = bin()
        .arg("hybrid")
        .arg("--config")
        .arg(&config)
        .args(["--trials", "4", "--workers", "2", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["trials.csv", "report.json", "timing.json"] {
        assert!(dir.join(f).exists(), "missing {f}");
    }
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(summary["trials"], 4);
}

#[test]
fn mode_mismatch_is_an_error() {
    let config = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/hybrid.json");
    let out = bin().arg("balance").arg("--config").arg(&config).output().unwrap();
    assert!(!out.status.success());
}
