use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn mur(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mur")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn distance(out: &Output) -> f64 {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    stdout(out).trim().parse().unwrap()
}

#[test]
fn constant_in_one_dimension() {
    let out = mur(&["constant", "--dim", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert!((v["C"].as_f64().unwrap() - 0.304745).abs() < 1e-4);
    assert_eq!(v["convergence"].as_array().unwrap().len(), 3);
}

#[test]
fn constant_is_invariant_under_a_and_b() {
    let base = json(&mur(&["constant", "--dim", "1", "--basis", "48"]))["C"].as_f64().unwrap();
    let skew = json(&mur(&["constant", "--dim", "1", "--basis", "48", "--a", "4", "--b", "0.25"]))["C"]
        .as_f64()
        .unwrap();
    assert!((base - skew).abs() < 1e-10);
}

#[test]
fn ground_energy_decreases_with_basis() {
    let e = |n: &str| json(&mur(&["constant", "--dim", "3", "--basis", n]))["E0"].as_f64().unwrap();
    assert!(e("128") <= e("32"));
}

#[test]
fn constant_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let out = mur(&["constant", "--dim", "2", "--basis", "40", "--output", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn table_reproduces_reference_rows() {
    let out = mur(&["table"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("1,128,0.3047"));
    assert!(rows[1].starts_with("2,128,0.7628") && rows[1].contains(",0.785398,"));
    assert!(rows[3].starts_with("42,256,20.710") && rows[3].contains(",20.751"));
    assert!(rows.iter().all(|r| r.ends_with(",ok")));
}

#[test]
fn wasserstein_examples() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.csv", "0,0.5\n1,0.5\n");
    let a2 = write(&dir, "a2.csv", "0,0.5\n1,0.5\n");
    assert_eq!(distance(&mur(&["wasserstein", &a, &a2, "--oracle"])), 0.0);

    let p0 = write(&dir, "p0.csv", "0,1\n");
    let p3 = write(&dir, "p3.csv", "3,1\n");
    assert!((distance(&mur(&["wasserstein", &p0, &p3])) - 3.0).abs() < 1e-15);

    // half the mass moves from 0 to 1
    let b = write(&dir, "b.csv", "1,1\n");
    assert!((distance(&mur(&["wasserstein", &a, &b, "--oracle"])) - 0.5).abs() < 1e-12);
}

#[test]
fn wasserstein_in_two_dimensions() {
    let dir = TempDir::new().unwrap();
    let o = write(&dir, "o.csv", "0,0,1\n");
    let p = write(&dir, "p.csv", "3,4,1\n");
    assert!((distance(&mur(&["wasserstein", &o, &p])) - 5.0).abs() < 1e-12);
    assert!((distance(&mur(&["wasserstein", &o, &p, "--metric", "l1"])) - 7.0).abs() < 1e-12);
    assert!((distance(&mur(&["wasserstein", &o, &p, "--metric", "linf"])) - 4.0).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = write(&dir, "good.csv", "0,1\n");
    let bad = write(&dir, "bad.csv", "0,1\nx,oops\n");
    assert_eq!(mur(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(mur(&["constant", "--dim", "0"]).status.code(), Some(1));
    assert_eq!(mur(&["constant", "--hbar", "-1"]).status.code(), Some(1));
    assert_eq!(mur(&["wasserstein", &good, "/nonexistent/file.csv"]).status.code(), Some(3));
    let parse = mur(&["wasserstein", &good, &bad]);
    assert_eq!(parse.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&parse.stderr).contains("line 2"));
    let out = dir.path().join("sim");
    let unknown = mur(&["simulate", "--state", "bogus", "--output-dir", out.to_str().unwrap()]);
    assert_eq!(unknown.status.code(), Some(1));
    // a grid far too short for the state cannot cover it
    let short = mur(&["simulate", "--basis", "16", "--x-min", "-1", "--x-max", "1", "--output-dir", out.to_str().unwrap()]);
    assert_eq!(short.status.code(), Some(2));
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn simulate_ground_with_ground_noise() {
    let dir = TempDir::new().unwrap();
    let out = mur(&["simulate", "--basis", "32", "--output-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path());
    assert_eq!(s["schema"], 1);
    assert!((s["product"].as_f64().unwrap() - 1.0 / std::f64::consts::PI).abs() < 1e-6);
    assert!(s["residualQ"].as_f64().unwrap() <= 2e-4 && s["residualP"].as_f64().unwrap() <= 2e-4);
    for name in ["ideal_q", "ideal_p", "noise_q", "noise_p", "marginal_q", "marginal_p", "husimi"] {
        assert!(dir.path().join(format!("{name}.csv")).exists(), "{name}");
    }
    let grid = fs::read_to_string(dir.path().join("ideal_q.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 1537);
    let husimi = fs::read_to_string(dir.path().join("husimi.csv")).unwrap();
    assert_eq!(husimi.lines().next(), Some("p,q,value"));
    assert_eq!(husimi.lines().count(), 1 + 257 * 257);
}

#[test]
fn simulate_with_optimal_noise_attains_constant() {
    let dir = TempDir::new().unwrap();
    let out = mur(&["simulate", "--noise", "optimal", "--format", "json", "--output-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let c = json(&mur(&["constant", "--dim", "1"]))["C"].as_f64().unwrap();
    assert!((summary(dir.path())["product"].as_f64().unwrap() - c).abs() < 1e-9);
    let h: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("husimi.json")).unwrap()).unwrap();
    assert_eq!(h["schema"], 1);
}

#[test]
fn simulate_reads_coefficient_files() {
    let dir = TempDir::new().unwrap();
    let coeffs = write(&dir, "state.txt", "# h0 + h2\n1\n0\n1\n");
    let out_dir = dir.path().join("out");
    let out = mur(&["simulate", "--basis", "24", "--state-file", &coeffs, "--noise", "squeezed-1.3", "--output-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    // noise only: the pair does not depend on the state
    let p = summary(&out_dir)["deltaQ"].as_f64().unwrap();
    assert!((p - 1.3 / std::f64::consts::PI.sqrt()).abs() < 1e-9);
}

#[test]
fn simulate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = mur(&["simulate", "--basis", "16", "--state", "excited-1", "--noise", "squeezed-0.8", "--output-dir", d.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["marginal_q.csv", "husimi.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn region_rows_and_bound() {
    let out = mur(&["region", "--samples", "12", "--seed", "5", "--basis", "48"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("deltaQ,deltaP,product,kind,lambda"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 12 + 21);
    let dilation: Vec<f64> = rows.iter().filter(|r| r[3] == "dilation").map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(dilation.len(), 21);
    assert!(dilation.iter().all(|p| (p - dilation[10]).abs() < 1e-6));
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() >= dilation[10] - 1e-6));
    assert_eq!(stdout(&mur(&["region", "--samples", "12", "--seed", "5", "--basis", "48"])), text);
}

#[test]
fn groundstate_table() {
    let out = mur(&["groundstate", "--dim", "1", "--basis", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("x,psi,density"));
    assert_eq!(text.lines().count(), 1 + 1537);
    let radial = stdout(&mur(&["groundstate", "--dim", "3", "--basis", "32"]));
    assert!(radial.lines().nth(1).unwrap().starts_with("0.0000000000000000e0,"));
}
