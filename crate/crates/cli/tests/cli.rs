use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_trimoment");
const PINNED_S: f64 = 0.07014146471871166;
const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().expect("wait")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn dicke_file(dir: &Path, name: &str, coeffs: &[f64]) -> String {
    let c: Vec<[f64; 2]> = coeffs.iter().map(|&x| [x, 0.0]).collect();
    let doc = serde_json::json!({ "n_atoms": coeffs.len() - 1, "representation": "dicke", "coeffs": c });
    let path = dir.join(name);
    std::fs::write(&path, doc.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

fn strip_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("generated_unix");
    v
}

#[test]
fn compute_all_up() {
    let dir = tempfile::tempdir().unwrap();
    let p = dicke_file(dir.path(), "up.json", &[1.0, 0.0, 0.0, 0.0]);
    let o = run(&["compute", "--input", &p, "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["seed"], 9);
    assert_eq!(v["result"]["s_parameter"].as_f64().unwrap(), 0.0);
    assert_eq!(v["result"]["angles"]["theta"].as_f64().unwrap(), 0.0);
    assert_eq!(v["tolerances"]["rel"].as_f64().unwrap(), 1e-9);
}

#[test]
fn compute_pinned_state() {
    let dir = tempfile::tempdir().unwrap();
    let p = dicke_file(dir.path(), "pin.json", &[H, H, 0.0, 0.0]);
    let o = run(&["compute", "-i", &p]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let s = v["result"]["s_parameter"].as_f64().unwrap();
    assert!((s - PINNED_S).abs() <= 1e-12, "{s}");
    assert_eq!(v["result"]["routes"]["within_tolerance"], true);
    let digest = v["input_sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
}

#[test]
fn compute_ghz_is_frame_undefined() {
    let dir = tempfile::tempdir().unwrap();
    let p = dicke_file(dir.path(), "ghz.json", &[H, 0.0, 0.0, H]);
    let o = run(&["compute", "-i", &p]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&o)["error"]["kind"], "frame_undefined");
}

#[test]
fn compute_from_stdin_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let doc = r#"{"n_atoms":3,"representation":"product","coeffs":[[[1,0],[1,0]],[[1,0],[1,0]],[[1,0],[1,0]]],"normalize":true}"#;
    let o = run_stdin(&["compute", "-i", "-", "-o", out.to_str().unwrap()], doc);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["result"]["s_parameter"].as_f64().unwrap() <= 1e-12);
    assert!((v["result"]["mean_spin"]["jx"].as_f64().unwrap() - 1.5).abs() < 1e-12);
}

#[test]
fn compute_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let unnormalized = dicke_file(dir.path(), "un.json", &[1.0, 1.0, 0.0, 0.0]);
    assert_eq!(run(&["compute", "-i", &unnormalized]).status.code(), Some(2));
    assert_eq!(run(&["compute", "-i", &unnormalized, "--normalize"]).status.code(), Some(0));
    assert_eq!(run(&["compute", "-i", &unnormalized, "--normalize", "--n", "4"]).status.code(), Some(2));
    let o = run_stdin(&["compute", "-i", "-"], "{not json");
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["error"]["kind"], "invalid_state");
    assert_eq!(run(&["compute", "-i", "/nonexistent/state.json"]).status.code(), Some(2));
    let asym = r#"{"n_atoms":3,"representation":"product","coeffs":[[[1,0],[0,0]],[[0,0],[1,0]],[[1,0],[0,0]]]}"#;
    let o = run_stdin(&["compute", "-i", "-"], asym);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["error"]["kind"], "not_symmetric");
}

#[test]
fn verify_default_passes() {
    let o = run(&["verify"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let ids = v["result"]["identities"].as_array().unwrap();
    assert!(ids.len() >= 27);
    assert!(ids.iter().all(|r| r["passed"] == true));
    assert_eq!(v["result"]["passed"], true);
    assert_eq!(v["result"]["sum_route"].as_array().unwrap().len(), 4);
    assert!(v["result"]["sum_route"].as_array().unwrap().iter().all(|r| r["skipped"] == 1));
}

#[test]
fn verify_is_deterministic() {
    let a = run(&["verify", "--trials", "1000", "--seed", "5"]);
    let b = run(&["verify", "--trials", "1000", "--seed", "5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(strip_timestamp(json(&a)), strip_timestamp(json(&b)));
}

#[test]
fn verify_detects_corruption() {
    let o = run(&["verify", "--trials", "5", "--corrupt-identity", "JxJxJy"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    let failed: Vec<&Value> =
        v["result"]["identities"].as_array().unwrap().iter().filter(|r| r["passed"] == false).collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["identity_id"], "JxJxJy");
    assert_eq!(run(&["verify", "--corrupt-identity", "nope"]).status.code(), Some(2));
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

const SWEEP: &str = r#"{"n_atoms":3,"indices":[0,1],"alpha":{"start":0,"stop":1.5707963267948966,"points":101}}"#;

#[test]
fn scan_sweep() {
    let a = run(&["scan", "--grid", SWEEP]);
    let b = run(&["scan", "--grid", SWEEP]);
    assert_eq!(a.status.code(), Some(0));
    let text = String::from_utf8(a.stdout).unwrap();
    let strip = |t: &str| t.lines().filter(|l| !l.starts_with("# generated_unix")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&text), strip(&String::from_utf8(b.stdout).unwrap()));
    assert!(text.contains("# input_sha256="));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "index,alpha,s,m3_xp,m3_yp,var_xp,var_yp,jx,jy,jz,theta,phi,frame_undefined");
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 101);
    let s: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(s[0], 0.0);
    // alpha = pi/4 is the pinned state
    assert!((s[50] - PINNED_S).abs() <= 1e-12);
    let (k, max) = s.iter().enumerate().fold((0, f64::MIN), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
    assert_eq!(k, 92);
    assert!((max - 0.19931442096959018).abs() <= 1e-12);
    // values survive a text round trip exactly
    let alpha: f64 = rows[37][1].parse().unwrap();
    assert_eq!(format!("{alpha:?}"), rows[37][1]);
}

#[test]
fn scan_flags_undefined_frame() {
    let grid = r#"{"n_atoms":3,"indices":[0,3],"alphas":[0.0,0.7853981633974483]}"#;
    let o = run(&["scan", "--grid", grid]);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(rows[0][12], "0");
    assert_eq!(rows[1][12], "1");
    assert_eq!(rows[1][2], "");
}

#[test]
fn scan_rejects_malformed_grid() {
    assert_eq!(run(&["scan", "--grid", "{"]).status.code(), Some(2));
    assert_eq!(run(&["scan", "--grid", r#"{"n_atoms":3}"#]).status.code(), Some(2));
    assert_eq!(run(&["scan", "--grid", r#"{"n_atoms":3,"alphas":[0]}"#, "--n", "2"]).status.code(), Some(2));
}

fn sample_result(path: &str, seed: &str) -> Value {
    let o = run(&["sample", "-i", path, "--shots", "100000", "--seed", seed]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    json(&o)
}

#[test]
fn sample_product_state() {
    let dir = tempfile::tempdir().unwrap();
    let p = dicke_file(dir.path(), "up.json", &[1.0, 0.0, 0.0, 0.0]);
    let v = sample_result(&p, "1");
    assert_eq!(v["seed"], 1);
    let r = &v["result"];
    assert!(r["s_hat"].as_f64().unwrap() <= 5.0 * r["standard_error"].as_f64().unwrap() + 1e-12);
    let records = r["records"].as_array().unwrap();
    assert_eq!(records.len(), 2);
    for rec in records {
        assert_eq!(rec["M"], 100000);
        assert_eq!(rec["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum::<u64>(), 100000);
    }
}

#[test]
fn sample_pinned_state_seeds_agree() {
    let dir = tempfile::tempdir().unwrap();
    let p = dicke_file(dir.path(), "pin.json", &[H, H, 0.0, 0.0]);
    let a = sample_result(&p, "1");
    let b = sample_result(&p, "2");
    let (sa, ea) = (a["result"]["s_hat"].as_f64().unwrap(), a["result"]["standard_error"].as_f64().unwrap());
    let (sb, eb) = (b["result"]["s_hat"].as_f64().unwrap(), b["result"]["standard_error"].as_f64().unwrap());
    assert!((sa - sb).abs() <= 5.0 * ea.hypot(eb));
    assert!((a["result"]["s_exact"].as_f64().unwrap() - PINNED_S).abs() <= 1e-12);
    assert_eq!(strip_timestamp(a), strip_timestamp(sample_result(&p, "1")));
}

#[test]
fn sample_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dicke_file(dir.path(), "pin.json", &[H, H, 0.0, 0.0]);
    let o = run(&["sample", "-i", &p, "--shots", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["error"]["kind"], "insufficient_shots");
    let g = dicke_file(dir.path(), "ghz.json", &[H, 0.0, 0.0, H]);
    assert_eq!(run(&["sample", "-i", &g]).status.code(), Some(3));
}
