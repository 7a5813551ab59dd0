use std::process::{Command, Output};

fn fmtk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmtk")).args(args).output().expect("fmtk runs")
}

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exit_codes() {
    let p4 = fixture("p4.txt");
    assert_eq!(fmtk(&["th", &p4, "-n", "1"]).status.code(), Some(0));
    assert_eq!(fmtk(&["eq", &p4, &p4, "--tuple-a", "0", "--tuple-b", "3", "-n", "2"]).status.code(), Some(0));
    assert_eq!(fmtk(&["eq", &p4, &p4, "--tuple-a", "0", "--tuple-b", "1", "-n", "2"]).status.code(), Some(1));
    assert_eq!(fmtk(&["th", &p4, "--tuple", "9", "-n", "1"]).status.code(), Some(2));
    assert_eq!(fmtk(&["th", "/nonexistent", "-n", "1"]).status.code(), Some(2));
    assert_eq!(fmtk(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(fmtk(&["th", &p4, "--tuple", "0", "-n", "4", "--max-nodes", "5"]).status.code(), Some(3));
}

#[test]
fn endpoint_and_midpoint() {
    let p4 = fixture("p4.txt");
    let one = |t: &str, n: &str| stdout(&fmtk(&["th", &p4, "--tuple", t, "-n", n]));
    assert_eq!(one("0", "1"), one("1", "1"));
    assert_ne!(one("0", "2"), one("1", "2"));
    let report = stdout(&fmtk(&["eq", &p4, &p4, "--tuple-a", "0", "--tuple-b", "1", "-n", "2"]));
    assert!(report.contains("equal: false"));
    assert!(report.contains("ef_agrees: true"));
}

#[test]
fn sums_and_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("witness.json");
    let o = fmtk(&["dsum", "verify", &fixture("violating_a.txt"), &fixture("violating_b.txt"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let w: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(w["first"]["tuple"], serde_json::json!([0, 1]));
    assert_eq!(fmtk(&["dsum", "verify", &fixture("p4_sum.txt")]).status.code(), Some(0));
    let lemma = fmtk(&["dsum", "check-lemma", &fixture("disjoint_sum.txt"), "-n", "2", "-l", "2", "--json"]);
    assert_eq!(lemma.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&lemma.stdout).unwrap();
    assert_eq!(report["outcome"], "pass");
    // a plain structure is not a sum
    assert_eq!(fmtk(&["dsum", "verify", &fixture("p4.txt")]).status.code(), Some(2));
}

#[test]
fn locality_commands() {
    let o = fmtk(&["locality", "gaifman-params", "--variant", "improved", "-n", "2", "-m", "1"]);
    assert!(stdout(&o).contains("r=12 s=3 t=12"));
    let o = fmtk(&["locality", "gaifman-params", "--variant", "classical", "-n", "2", "-m", "1"]);
    assert!(stdout(&o).contains("r=7 s=3 t=24"));

    let dir = tempfile::tempdir().unwrap();
    let export = dir.path().join("ex.txt");
    let o = fmtk(&["locality", "example23", "--export", export.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"radius2_equal\":true"));
    // the exported graph reads back and a, b (elements 0 and 1) differ at depth 1
    let g = export.to_str().unwrap();
    assert_eq!(fmtk(&["eq", g, g, "--tuple-a", "0", "--tuple-b", "1", "-n", "1"]).status.code(), Some(1));
    let o = fmtk(&["locality", "min-radius", g, "-n", "1"]);
    assert!(stdout(&o).contains("radius: 3"));

    let clique = dir.path().join("k3.txt");
    std::fs::write(&clique, "signature E/2\nuniverse x y z\nedge E x y\nedge E y z\nedge E x z\n").unwrap();
    let o = fmtk(&["locality", "scattered", clique.to_str().unwrap(), "--c-formula", "true", "-m", "1"]);
    assert!(stdout(&o).contains("scattered: 1"));
}
