use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn qht(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qht"))
        .args(args)
        .current_dir(dir)
        .env_remove("QHT_DIM_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn diag_state(dir: &Path, name: &str, diag: &[f64]) -> PathBuf {
    let d = diag.len();
    let matrix: Vec<Vec<[f64; 2]>> = (0..d)
        .map(|i| (0..d).map(|j| [if i == j { diag[i] } else { 0.0 }, 0.0]).collect())
        .collect();
    let path = dir.join(name);
    fs::write(&path, serde_json::json!({ "dim": d, "matrix": matrix }).to_string()).unwrap();
    path
}

fn setup() -> (TempDir, String, String) {
    let dir = tempfile::tempdir().unwrap();
    let rho = diag_state(dir.path(), "rho.json", &[0.25, 0.75]);
    let sigma = diag_state(dir.path(), "sigma.json", &[0.75, 0.25]);
    (
        dir,
        rho.to_string_lossy().into_owned(),
        sigma.to_string_lossy().into_owned(),
    )
}

#[test]
fn chernoff_json_has_expected_keys_and_values() {
    let (dir, rho, sigma) = setup();
    let o = qht(&["chernoff", "--rho", &rho, "--sigma", &sigma, "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let q = v["q_star"].as_f64().unwrap();
    assert!((q - 3f64.sqrt() / 2.0).abs() < 1e-12);
    assert!((v["xi_qcb"].as_f64().unwrap() + q.ln()).abs() < 1e-12);
    assert!((v["s_star"].as_f64().unwrap() - 0.5).abs() < 1e-8);
    assert!(v["curve"].as_array().unwrap().len() > 2);
}

#[test]
fn orthogonal_states_print_inf() {
    let dir = tempfile::tempdir().unwrap();
    let rho = diag_state(dir.path(), "a.json", &[1.0, 0.0]);
    let sigma = diag_state(dir.path(), "b.json", &[0.0, 1.0]);
    let o = qht(
        &["chernoff", "--rho", rho.to_str().unwrap(), "--sigma", sigma.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l.starts_with("xi_qcb") && l.ends_with("inf")));
}

#[test]
fn missing_file_exits_2() {
    let (dir, _, sigma) = setup();
    let o = qht(&["chernoff", "--rho", "nope.json", "--sigma", &sigma], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_file_exits_3() {
    let (dir, _, sigma) = setup();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"dim\": 2, \"matrix\": [[[1, 0]]]}").unwrap();
    let o = qht(&["chernoff", "--rho", bad.to_str().unwrap(), "--sigma", &sigma], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let not_state = diag_state(dir.path(), "neg.json", &[1.5, -0.5]);
    let o = qht(
        &["chernoff", "--rho", not_state.to_str().unwrap(), "--sigma", &sigma],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn dimension_mismatch_exits_4() {
    let (dir, rho, _) = setup();
    let sigma3 = diag_state(dir.path(), "s3.json", &[0.2, 0.3, 0.5]);
    let o = qht(&["chernoff", "--rho", &rho, "--sigma", sigma3.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn tensor_cap_exits_5() {
    let (dir, rho, sigma) = setup();
    let o = qht(&["simulate", "--rho", &rho, "--sigma", &sigma, "--n-max", "13"], dir.path());
    assert_eq!(o.status.code(), Some(5));
    let o = Command::new(env!("CARGO_BIN_EXE_qht"))
        .args(["simulate", "--rho", &rho, "--sigma", &sigma, "--n-max", "3"])
        .env("QHT_DIM_CAP", "4")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn hoeffding_csv_rows_match_steps() {
    let (dir, rho, sigma) = setup();
    let o = qht(&["hoeffding", "--rho", &rho, "--sigma", &sigma, "--steps", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "r,e_q,s_achieving");
    assert_eq!(rows.len(), 3);
    let e0: f64 = rows[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((e0 - 3f64.ln() / 2.0).abs() < 1e-9);
}

#[test]
fn simulate_writes_ten_rows() {
    let (dir, rho, sigma) = setup();
    let out = dir.path().join("sim.csv");
    let o = qht(
        &["simulate", "--rho", &rho, "--sigma", &sigma, "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,p_e_n,rate,upper_bound,lower_bound,sandwich_ok");
    assert_eq!(lines.len(), 11);
    assert!(lines[1..].iter().all(|l| l.ends_with("true")));
}

#[test]
fn verify_all_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = qht(&["verify", "all", "--seed", "42", "--trials", "200"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn map_and_stein() {
    let (dir, rho, sigma) = setup();
    let o = qht(&["map", "--rho", &rho, "--sigma", &sigma], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("i,j,p,q"));
    assert_eq!(text.lines().count(), 5);
    let o = qht(&["stein", "--rho", &rho, "--sigma", &sigma], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let s: f64 = stdout(&o).trim().parse().unwrap();
    assert!((s - 3f64.ln() / 2.0).abs() < 1e-12);
}

#[test]
fn random_then_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = qht(
        &["random", "--dim", "3", "--rank", "2", "--seed", "7", "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let again = dir.path().join("again.json");
    let o = qht(
        &["dump", "--rho", out.to_str().unwrap(), "--out", again.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let a = qht::cli::load_state(&out).unwrap();
    let b = qht::cli::load_state(&again).unwrap();
    let diff = (a.as_matrix() - b.as_matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(diff <= 1e-15);
}

#[test]
fn usage_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = qht(&["chernoff"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
