use std::path::PathBuf;
use std::process::{Command, Output};

use ktri_core::corpus::{builtin_descriptors, Fixture, MANIFEST};
use ktri_core::setfun::{SetFunction, WeightRule};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

fn ktri(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ktri")).args(args).output().expect("ktri runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ktri-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn check_measuroid_reports_non_monotonicity() {
    let out = ktri(&["check", "--fixture", &fixture("measuroid-3.json"), "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("m({1,3}) = 10/9 > m({1,2,3}) = 31/36"), "{text}");
    assert!(text.starts_with("# config: {\"command\":\"check\""));
}

#[test]
fn check_zero_and_hump() {
    assert_eq!(ktri(&["check", "--fixture", &fixture("zero-5.json"), "--k", "1"]).status.code(), Some(0));
    let out = ktri(&["check", "--fixture", &fixture("hump-10.json"), "--k", "0", "--format", "records"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let witness = text
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .find(|v| v["violation_witness"].is_object())
        .expect("witness record");
    assert_eq!(witness["violation_witness"]["A"], "{}");
}

#[test]
fn semivar_table() {
    let out = ktri(&["semivar", "--fixture", &fixture("measuroid-3.json"), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("m,{},0/1,0/1,{}"));
    assert!(text.contains("m,\"{1,2,3}\",31/36,10/9,\"{1,3}\""), "{text}");
}

#[test]
fn semivar_rejects_large_ground_sets() {
    let dir = scratch("semivar");
    let path = dir.join("zero-17.json");
    let m = SetFunction::from_rule(&WeightRule::Zero, 17).unwrap();
    std::fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    let out = ktri(&["semivar", "--fixture", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn harness_exit_codes() {
    let scaled = ktri(&["harness", "--fixture", &fixture("harness-scaled-measuroid-3.json"), "--theorem", "S"]);
    assert_eq!(scaled.status.code(), Some(0));
    assert!(stdout(&scaled).contains("schur gap: 1:10/9 2:5/9 3:10/27"));
    let constant = ktri(&["harness", "--fixture", &fixture("constant-measuroid-4.json"), "--theorem", "VHS"]);
    assert_eq!(constant.status.code(), Some(0));
    let hump = ktri(&["harness", "--fixture", &fixture("hump-10.json"), "--theorem", "BJ"]);
    assert_eq!(hump.status.code(), Some(3));
    assert!(stdout(&hump).contains("failed: BJ: pointwise convergence"));
    let bad = ktri(&["harness", "--fixture", &fixture("hump-10.json"), "--theorem", "XYZ"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn drewnowski_traces() {
    let out = ktri(&["drewnowski", "--weights", "alternating-power 2", "--levels", "4", "--format", "records"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("HOLDS-AT-HORIZON"));
    let zero = ktri(&["drewnowski", "--weights", "zero", "--levels", "3"]);
    assert_eq!(zero.status.code(), Some(0));
    let harmonic = ktri(&["drewnowski", "--weights", "harmonic", "--levels", "3"]);
    assert_eq!(harmonic.status.code(), Some(2));
    let targets = ktri(&["drewnowski", "--levels", "2", "--targets", "1,1/2"]);
    assert_eq!(targets.status.code(), Some(0));
}

#[test]
fn schur_gap_csv() {
    let out = ktri(&["schur-gap", "--fixture", &fixture("scaled-measuroid-3.json"), "--n", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<String> = stdout(&out).lines().map(str::to_string).collect();
    assert_eq!(lines[1], "j,gap,witness");
    assert_eq!(lines[2], "1,10/9,\"{1,3}\"");
    assert_eq!(lines[3], "2,5/9,\"{1,3}\"");
    let constant = ktri(&["schur-gap", "--fixture", &fixture("constant-measuroid-4.json"), "--format", "csv"]);
    assert!(stdout(&constant).lines().skip(2).all(|l| l.contains(",0/1,")));
    let big = ktri(&["schur-gap", "--fixture", &fixture("scaled-measuroid-3.json"), "--n", "21"]);
    assert_eq!(big.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let args = [
        "harness",
        "--fixture",
        &fixture("scaled-measuroid-3.json"),
        "--theorem",
        "N",
        "--seed",
        "7",
        "--format",
        "records",
    ];
    assert_eq!(stdout(&ktri(&args)), stdout(&ktri(&args)));
}

#[test]
fn missing_fixture_is_input_error() {
    assert_eq!(ktri(&["check", "--fixture", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(ktri(&["check", "--fixture", &fixture("measuroid-3.json"), "--k", "x"]).status.code(), Some(2));
}

#[test]
fn shipped_corpus_matches_builtin_descriptors() {
    let manifest = std::fs::read_to_string(fixtures().join(MANIFEST)).unwrap();
    for d in builtin_descriptors() {
        let fx = Fixture::generate(d).unwrap();
        let shipped = std::fs::read_to_string(fixtures().join(fx.file_name())).unwrap();
        assert_eq!(shipped, fx.to_json().unwrap(), "{}", fx.file_name());
        assert!(manifest.contains(&fx.file_name()));
    }
}

#[test]
fn corpus_verify_detects_tampering() {
    let dir = scratch("corpus");
    let out = ktri(&["corpus-verify", "--regenerate", "--dir", dir.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let path = dir.join("measuroid-3.json");
    let text = std::fs::read_to_string(&path).unwrap().replace("\"10/9\"", "\"10/8\"");
    std::fs::write(&path, text).unwrap();
    let out = ktri(&["corpus-verify", "--dir", dir.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("measuroid-3.json,false"));
}
