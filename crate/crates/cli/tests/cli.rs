use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const T_GATE: &str =
    r#"{"n":1,"re":[[1,0],[0,0.7071067811865476]],"im":[[0,0],[0,0.7071067811865476]]}"#;
const HADAMARD: &str = r#"{"n":1,"re":[[0.7071067811865476,0.7071067811865476],[0.7071067811865476,-0.7071067811865476]],"im":[[0,0],[0,0]]}"#;
const STRATEGY: &str = r#"{"rounds":[
    {"state":{"re":[[1,0],[0,0]]},"povm":[{"re":[[1,0],[0,0]]},{"re":[[0,0],[0,1]]}]},
    {"state":{"re":[[0.5,0.5],[0.5,0.5]]},"povm":[{"re":[[0.5,0.5],[0.5,0.5]]},{"re":[[0.5,-0.5],[-0.5,0.5]]}]}]}"#;

fn clifftest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clifftest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is a manifest")
}

fn strip_timestamps(mut v: Value) -> Value {
    let obj = v.as_object_mut().unwrap();
    obj.remove("started_unix_ms");
    obj.remove("finished_unix_ms");
    v
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&clifftest(&["verify", "--suite", "nonsense"])), 2);
    assert_eq!(code(&clifftest(&["verify", "--suite", ""])), 2);
    assert_eq!(code(&clifftest(&["verify"])), 2);
    assert_eq!(code(&clifftest(&["frobnicate"])), 2);
    assert_eq!(code(&clifftest(&["pacc", "--input", "/nonexistent/u.json"])), 2);
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"n":1,"re":[[1,1],[1,1]],"im":[[0,0],[0,0]]}"#);
    assert_eq!(code(&clifftest(&["pacc", "--input", s(&bad)])), 2);
    let huge = write(&dir, "huge.json", r#"{"n":60,"re":[],"im":[]}"#);
    assert_eq!(code(&clifftest(&["pacc", "--input", s(&huge)])), 2);
    let u = write(&dir, "t.json", T_GATE);
    assert_eq!(code(&clifftest(&["test4", "--input", s(&u), "--seed", "1"])), 2);
    assert_eq!(code(&clifftest(&["sctest", "--input", s(&u), "--epsilon", "1.5", "--seed", "1"])), 2);
}

#[test]
fn budget_guards_exit_three() {
    assert_eq!(code(&clifftest(&["verify", "--suite", "fidelity", "--n", "9"])), 3);
    assert_eq!(code(&clifftest(&["commutant", "enum", "--t", "9"])), 3);
    let dir = TempDir::new().unwrap();
    let id3 = {
        let d = 8;
        let rows: Vec<Vec<u8>> = (0..d).map(|i| (0..d).map(|j| u8::from(i == j)).collect()).collect();
        let zeros = vec![vec![0u8; d]; d];
        serde_json::json!({"n": 3, "re": rows, "im": zeros}).to_string()
    };
    let u = write(&dir, "id3.json", &id3);
    assert_eq!(
        code(&clifftest(&["sctest", "--input", s(&u), "--epsilon", "0.1", "--seed", "1"])),
        3
    );
}

#[test]
fn appendix_suite_passes() {
    let o = clifftest(&["verify", "--suite", "appendixA"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&o);
    assert_eq!(m["command"], "verify");
    assert_eq!(m["passed"], true);
    assert!(!m["results"]["checks"].as_array().unwrap().is_empty());
}

#[test]
fn seeded_runs_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let u = write(&dir, "t.json", T_GATE);
    for args in [
        vec!["test4", "--input", s(&u), "--shots", "200", "--seed", "7"],
        vec!["sctest", "--input", s(&u), "--epsilon", "0.2", "--seed", "7"],
        vec!["verify", "--suite", "testers", "--n", "1", "--seeds", "3"],
    ] {
        let a = clifftest(&args);
        let b = clifftest(&args);
        assert_eq!(code(&a), 0);
        assert_eq!(strip_timestamps(manifest(&a)), strip_timestamps(manifest(&b)), "{args:?}");
    }
    let a = manifest(&clifftest(&["test4", "--input", s(&u), "--shots", "200", "--seed", "7"]));
    let b = manifest(&clifftest(&["test4", "--input", s(&u), "--shots", "200", "--seed", "8"]));
    assert_ne!(a["results"]["log"], b["results"]["log"]);
    assert_ne!(a["input_hash"], b["input_hash"]);
}

#[test]
fn jobs_do_not_change_results() {
    let dir = TempDir::new().unwrap();
    let u = write(&dir, "t.json", T_GATE);
    let args = ["test4", "--input", s(&u), "--shots", "300", "--seed", "11"];
    let one = clifftest(&[&["--jobs", "1"][..], &args[..]].concat());
    let four = clifftest(&[&["--jobs", "4"][..], &args[..]].concat());
    assert_eq!(strip_timestamps(manifest(&one)), strip_timestamps(manifest(&four)));
}

#[test]
fn output_flag_writes_the_manifest() {
    let dir = TempDir::new().unwrap();
    let u = write(&dir, "h.json", HADAMARD);
    let out = dir.path().join("m.json");
    let o = clifftest(&["pacc", "--input", s(&u), "--output", s(&out)]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!((m["results"]["pacc"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn pacc_of_the_t_gate() {
    let dir = TempDir::new().unwrap();
    let u = write(&dir, "t.json", T_GATE);
    let m = manifest(&clifftest(&["pacc", "--input", s(&u), "--exact"]));
    let r = &m["results"];
    assert!((r["pacc"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert!((r["pacc_pi4"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert!((r["pacc_gnw_choi"].as_f64().unwrap() - 13.0 / 16.0).abs() < 1e-12);
}

#[test]
fn report_round_trips_json_and_flattens_csv() {
    let dir = TempDir::new().unwrap();
    let u = write(&dir, "t.json", T_GATE);
    let saved = dir.path().join("run.json");
    let o = clifftest(&["test4", "--input", s(&u), "--shots", "25", "--seed", "3", "--output", s(&saved)]);
    assert_eq!(code(&o), 0);
    let original: Value = serde_json::from_str(&std::fs::read_to_string(&saved).unwrap()).unwrap();

    let json = clifftest(&["report", "--input", s(&saved), "--format", "json"]);
    assert_eq!(code(&json), 0);
    assert_eq!(manifest(&json), original);

    let csv = clifftest(&["report", "--input", s(&saved), "--format", "csv"]);
    assert_eq!(code(&csv), 0);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().count(), 26);
    assert_eq!(text.lines().next().unwrap(), "accepted,x,y,y_prime");

    assert_eq!(code(&clifftest(&["report", "--input", s(&saved), "--format", "yaml"])), 2);
    let junk = write(&dir, "junk.json", "[1, 2, 3]");
    assert_eq!(code(&clifftest(&["report", "--input", s(&junk)])), 2);
}

#[test]
fn chardist_csv_has_one_row_per_label() {
    let dir = TempDir::new().unwrap();
    let psi = write(&dir, "psi.json", r#"{"n":2,"re":[0.5,0.5,0.5,0.5]}"#);
    let saved = dir.path().join("cd.json");
    assert_eq!(code(&clifftest(&["chardist", "--input", s(&psi), "--output", s(&saved)])), 0);
    let csv = clifftest(&["report", "--input", s(&saved), "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 16);
    let total: f64 = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);

    let u = write(&dir, "t.json", T_GATE);
    let m = manifest(&clifftest(&["chardist", "--input", s(&u)]));
    assert_eq!(m["results"]["rows"].as_array().unwrap().len(), 16);
}

#[test]
fn commutant_enumeration_counts_codes() {
    for (t, count) in [(1, 1), (2, 3), (3, 15), (4, 135)] {
        let o = clifftest(&["commutant", "enum", "--t", &t.to_string(), "--check-all"]);
        assert_eq!(code(&o), 0);
        let r = &manifest(&o)["results"];
        assert_eq!(r["count"], count);
        assert_eq!(r["invariants_passed"], true);
        assert_eq!(r["per_code"].as_array().unwrap().len(), count);
    }
}

#[test]
fn discriminate_reports_agreeing_leaves() {
    let dir = TempDir::new().unwrap();
    let st = write(&dir, "st.json", STRATEGY);
    let o = clifftest(&["discriminate", "--t", "2", "--strategy", s(&st)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = &manifest(&o)["results"];
    assert!(r["agreement_gap"].as_f64().unwrap() <= 1e-8);
    assert_eq!(r["rows"].as_array().unwrap().len(), 4);
    assert_eq!(code(&clifftest(&["discriminate", "--t", "3", "--strategy", s(&st)])), 2);
}

#[test]
fn norms_agree_between_unitary_and_choi_state() {
    let dir = TempDir::new().unwrap();
    let u = write(&dir, "t.json", T_GATE);
    let m = manifest(&clifftest(&["norms", "--input", s(&u), "--k", "3"]));
    let r = &m["results"];
    let q = r["qk"]["value"].as_f64().unwrap();
    assert!((q - r["choi_uk"]["value"].as_f64().unwrap()).abs() < 1e-12);
    assert!((q - 0.75f64.powf(0.125)).abs() < 1e-12);
}
