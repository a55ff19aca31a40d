use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qpf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpf"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Theta sum on the integers, summed outward until the terms vanish.
fn theta_1d(c: f64) -> f64 {
    let mut s = 1.0;
    let mut n = 1.0f64;
    loop {
        let t = 2.0 * (-c * n * n).exp();
        if t < 1e-300 {
            return s;
        }
        s += t;
        n += 1.0;
    }
}

#[test]
fn single_particle_report() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "one.cfg",
        "N = 1\nd = 3\nL = 2\nbeta = 1\nlambda = 0.9\npotential = gaussian\nstrength = 2\nrange = 0.4\n",
    );
    let o = qpf(dir.path(), &["--config", "one.cfg", "--out", "one.json", "evaluate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json = read_json(&dir.path().join("one.json"));
    let c = std::f64::consts::PI * 0.81 / 4.0;
    let expect = theta_1d(c).powi(3);
    let q = json["Q"].as_f64().unwrap();
    assert!((q - expect).abs() <= 1e-13 * expect, "{q} vs {expect}");
    assert_eq!(json["breakdown"].as_array().unwrap().len(), 1);
    assert!((json["log_Q"].as_f64().unwrap() - expect.ln()).abs() < 1e-13);
    let csv = std::fs::read_to_string(dir.path().join("one.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("p,alpha,value\n1,0,"));
}

#[test]
fn zero_potential_flags_oracle_match() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "free.cfg", "N=4\nd=2\nL=1\nbeta=1\nlambda=0.6\nstatistics=fermi\n");
    let o = qpf(dir.path(), &["--config", "free.cfg", "evaluate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("matches ideal-gas oracle"));
}

#[test]
fn nonpositive_beta_names_field() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "bad.cfg", "N=2\nd=1\nL=1\nbeta=-1\nlambda=1\n");
    let o = qpf(dir.path(), &["--config", "bad.cfg", "evaluate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`beta`"), "{}", stderr(&o));
}

#[test]
fn unknown_key_and_missing_file() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "bad.cfg", "N=2\nd=1\nL=1\nbeta=1\nlambda=1\ntemperature=3\n");
    let o = qpf(dir.path(), &["--config", "bad.cfg", "evaluate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`temperature`"));
    let o = qpf(dir.path(), &["--config", "nothere.cfg", "evaluate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn table_potential_is_read_relative_to_config() {
    let dir = TempDir::new().unwrap();
    let mut table = String::from("# z value\n");
    for z in -12i64..=12 {
        let v = 0.3 * 0.3 * (-std::f64::consts::PI * 0.09 * (z * z) as f64).exp();
        table.push_str(&format!("{z} {v:e}\n"));
    }
    std::fs::create_dir(dir.path().join("sub")).unwrap();
    write(&dir.path().join("sub"), "u.txt", &table);
    write(
        &dir.path().join("sub"),
        "t.cfg",
        "N=2\nd=1\nL=1\nbeta=1\nlambda=1\npotential=table\ntable=u.txt\n",
    );
    write(
        dir.path(),
        "g.cfg",
        "N=2\nd=1\nL=1\nbeta=1\nlambda=1\npotential=gaussian\nstrength=0.3\nrange=0.3\n",
    );
    let t = qpf(dir.path(), &["--config", "sub/t.cfg", "--out", "t.json", "evaluate"]);
    let g = qpf(dir.path(), &["--config", "g.cfg", "--out", "g.json", "evaluate"]);
    assert_eq!(t.status.code(), Some(0), "{}", stderr(&t));
    assert_eq!(g.status.code(), Some(0), "{}", stderr(&g));
    let qt = read_json(&dir.path().join("t.json"))["Q"].as_f64().unwrap();
    let qg = read_json(&dir.path().join("g.json"))["Q"].as_f64().unwrap();
    assert!((qt - qg).abs() < 1e-12 * qg, "{qt} vs {qg}");
}

#[test]
fn repeated_runs_are_identical() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "g.cfg",
        "N=3\nd=1\nL=1.2\nbeta=1\nlambda=0.8\npotential=gaussian\nstrength=0.5\nrange=0.3\nalpha_max=2\nz_radius=5\ncoeff_bound=5\nquad_nodes=6\n",
    );
    let a = qpf(dir.path(), &["--config", "g.cfg", "--out", "a.json", "evaluate"]);
    let b = qpf(dir.path(), &["--threads", "3", "--config", "g.cfg", "--out", "b.json", "evaluate"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let ja = std::fs::read(dir.path().join("a.json")).unwrap();
    let jb = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(ja, jb);
    assert_eq!(
        std::fs::read(dir.path().join("a.csv")).unwrap(),
        std::fs::read(dir.path().join("b.csv")).unwrap()
    );
}

#[test]
fn matrix_a_small() {
    let dir = TempDir::new().unwrap();
    let o = qpf(dir.path(), &["oracle", "matrix-a", "--m", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("pass  true"));
    write(dir.path(), "m.cfg", "N=2\nd=1\nL=1\nbeta=1\nlambda=1\nmatrix_m=1\n");
    let o = qpf(dir.path(), &["--config", "m.cfg", "oracle", "matrix-a"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ideal_gas_oracle_fermions() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "f.cfg", "N=6\nd=1\nL=1\nbeta=1\nlambda=0.5\nstatistics=fermi\n");
    let o = qpf(dir.path(), &["--config", "f.cfg", "--out", "f.json", "oracle", "ideal-gas"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let json = read_json(&dir.path().join("f.json"));
    assert!(json["rel_diff"].as_f64().unwrap() < 1e-12);
}

#[test]
fn discrete2_differences_shrink() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "g.cfg",
        "N=2\nd=1\nL=1\nbeta=1\nlambda=1\npotential=gaussian\nstrength=0.3\nrange=0.3\nz_radius=12\ncoeff_bound=12\nquad_nodes=16\nm_list=8,16,32\n",
    );
    let o = qpf(dir.path(), &["--config", "g.cfg", "--out", "d.json", "oracle", "discrete2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let json = read_json(&dir.path().join("d.json"));
    let rows = json["differences"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for part in ["pair", "singles"] {
        let d: Vec<f64> = rows
            .iter()
            .filter(|r| r["partition"] == part)
            .map(|r| r["abs_diff"].as_f64().unwrap())
            .collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]), "{part}: {d:?}");
    }
    // a tolerance the m = 32 row cannot meet
    let o = qpf(dir.path(), &["--config", "g.cfg", "--tol", "1e-8", "oracle", "discrete2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exactdiag_agrees() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "g.cfg",
        "N=2\nd=1\nL=1\nbeta=1\nlambda=1\npotential=gaussian\nstrength=0.3\nrange=0.3\nz_radius=12\ncoeff_bound=12\nquad_nodes=16\nmomentum_cutoff=14\n",
    );
    let o = qpf(dir.path(), &["--config", "g.cfg", "oracle", "exactdiag"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    write(dir.path(), "three.cfg", "N=3\nd=1\nL=1\nbeta=1\nlambda=1\n");
    let o = qpf(dir.path(), &["--config", "three.cfg", "oracle", "exactdiag"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn graph_validation() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "tri.txt", "1 2\n2 3\n3 1\n");
    let o = qpf(dir.path(), &["--out", "tri.json", "graph-validate", "tri.txt"]);
    assert_eq!(o.status.code(), Some(0));
    let json = read_json(&dir.path().join("tri.json"));
    assert_eq!(json["valid"], true);
    assert_eq!(json["K"], 2);
    assert_eq!(json["N_I"], 1);
    let sol: Vec<i64> = json["solution"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["value"].as_i64().unwrap())
        .collect();
    assert_eq!(sol.len(), 3);
    assert!(sol.iter().all(|&v| v.abs() == sol[0].abs() && v != 0));

    write(dir.path(), "edge.txt", "1 2\n");
    let o = qpf(dir.path(), &["graph-validate", "edge.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("false"));

    write(dir.path(), "k4.txt", "1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n");
    let o = qpf(dir.path(), &["--out", "k4.json", "graph-validate", "k4.txt"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read_json(&dir.path().join("k4.json"))["N_I"], 3);

    write(dir.path(), "junk.txt", "1 x\n");
    let o = qpf(dir.path(), &["graph-validate", "junk.txt"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unity_check_exit_codes() {
    let dir = TempDir::new().unwrap();
    for n in ["1", "8", "12"] {
        let o = qpf(dir.path(), &["unity-check", n]);
        assert_eq!(o.status.code(), Some(0), "N = {n}");
    }
    let o = qpf(dir.path(), &["unity-check", "40"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn theta_command() {
    let dir = TempDir::new().unwrap();
    let o = qpf(dir.path(), &["--out", "t.json", "theta", "0.7", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&dir.path().join("t.json"))["theta"].as_f64().unwrap();
    let expect = theta_1d(0.7).powi(2);
    assert!((v - expect).abs() < 1e-13 * expect);
    let o = qpf(dir.path(), &["theta", "-1", "1"]);
    assert_eq!(o.status.code(), Some(2));
}
