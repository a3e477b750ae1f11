use std::process::Command;

use toric_rg::{Pauli, PauliOp, TorusLattice};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_toric-rg"))
}

#[test]
fn validate_succeeds() {
    let out = bin().args(["validate", "--max-ell", "32", "--dump-basis"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("basis ok"));
    assert!(text.contains("stabilizer A1 XIXIIIIXXIII"));
    assert!(text.contains("tiling ell=32: ok"));
}

#[test]
fn decode_prints_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let lat = TorusLattice::new(8).unwrap();
    let e = PauliOp::single(lat.n(), lat.v(2, 3), Pauli::Y);
    let path = dir.path().join("s.txt");
    std::fs::write(&path, lat.syndrome_of(&e).unwrap().to_string()).unwrap();
    let out = bin()
        .args(["decode", "--ell", "8", "--p", "0.05", "--syndrome"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["distribution"].as_array().unwrap().len(), 16);
    let correction: PauliOp = v["correction"].as_str().unwrap().parse().unwrap();
    assert_eq!(lat.homology_class(&(&e * &correction)).unwrap(), 0);
}

#[test]
fn missing_file_is_an_io_error() {
    let out = bin()
        .args(["decode", "--ell", "8", "--p", "0.1", "--syndrome", "/nonexistent/s.txt"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_syndrome_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.txt");
    let mut bits = vec!['0'; 128];
    bits[0] = '1';
    std::fs::write(&path, bits.iter().collect::<String>()).unwrap();
    let out = bin()
        .args(["decode", "--ell", "8", "--p", "0.1", "--syndrome"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    std::fs::write(&spec, "ells = [4, 8]\nps = [0.05]\ntrials = 20\nseed = 3\n").unwrap();
    let prefix = dir.path().join("out");
    let out = bin().arg("sweep").arg("--spec").arg(&spec).arg("--output").arg(&prefix).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("out.json").exists());
}
