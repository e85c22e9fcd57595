use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_solvcirc"))
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin()
        .args(args)
        .env_remove("SOLVCIRC_CAP")
        .output()
        .expect("spawn")
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    r.records()
        .map(|x| x.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn check_exit_codes() {
    let ok = run(&[
        "check",
        "--config",
        shipped("check_q2_qt1.json").to_str().unwrap(),
    ]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["left_residual"].as_f64().unwrap() < 1e-10);

    let haar = run(&[
        "check",
        "--config",
        shipped("check_haar.json").to_str().unwrap(),
    ]);
    assert_eq!(haar.status.code(), Some(1));

    let dir = TempDir::new().unwrap();
    let bad = write_config(&dir, "bad.json", "{ not json");
    assert_eq!(
        run(&["check", "--config", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let old = write_config(&dir, "old.json", r#"{"version":"0"}"#);
    assert_eq!(
        run(&["check", "--config", old.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let missing = dir.path().join("nope.json");
    assert_eq!(
        run(&["check", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn gen_gate_round_trips_through_a_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "gen.json",
        r#"{"version":"1","seed":9,"gate":{"family":"general_q_qt","q":4,"qt":2}}"#,
    );
    let gate_path = dir.path().join("gate.json");
    let out = run(&[
        "gen-gate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        gate_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&gate_path).unwrap()).unwrap();
    assert_eq!(v["q"], 4);
    assert_eq!(v["family"], "general_q_qt");
    assert_eq!(v["matrix"]["rows"], 16);

    let chk = write_config(
        &dir,
        "chk.json",
        r#"{"version":"1","gate":{"family":"file","path":"gate.json"},
            "mps":{"family":"ghz_cluster","theta":0.3,"q":4}}"#,
    );
    let out = run(&["check", "--config", chk.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // a different seed gives a different gate
    let other = dir.path().join("other.json");
    run(&[
        "gen-gate",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "10",
        "--out",
        other.to_str().unwrap(),
    ]);
    assert_ne!(fs::read(&gate_path).unwrap(), fs::read(&other).unwrap());
}

#[test]
fn evolve_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "e.json",
        r#"{"version":"1","seed":3,"gate":{"family":"general_q_qt","q":4,"qt":2},
            "mps":{"family":"ghz_cluster","theta":0.6,"q":4},
            "right_state":{"kind":"product","level":2},"l_r":3,"tmax":5,
            "observables":[{"site":0,"op":"proj:2"},{"site":1,"op":"diag:0,1,2,3"}]}"#,
    );
    let a = run(&["evolve", "--config", cfg.to_str().unwrap()]);
    let b = run(&["evolve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(a.stdout, b.stdout);
    let header = String::from_utf8_lossy(&a.stdout)
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(
        header,
        r#"t,S_ent,trace_residual,min_eig,proj:2@0,"diag:0,1,2,3@1""#
    );
    let rows = csv_rows(&a);
    assert_eq!(rows.len(), 6);
    assert!(rows[0][1].parse::<f64>().unwrap().abs() < 1e-12);
    assert!((rows[0][4].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn evolve_tmax_zero_gives_one_row() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "e.json",
        r#"{"version":"1","gate":{"family":"swap","q":2},"mps":{"family":"cluster"},
            "right_state":{"kind":"mps_tail"},"l_r":3,"tmax":0}"#,
    );
    let out = run(&["evolve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    assert!((rows[0][1].parse::<f64>().unwrap() - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn evolve_rejects_unsolvable_gate() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "e.json",
        r#"{"version":"1","gate":{"family":"haar","q":2},"mps":{"family":"cluster"},
            "right_state":{"kind":"product","level":0},"l_r":2,"tmax":2}"#,
    );
    assert_eq!(
        run(&["evolve", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn cluster_entropy_saturates() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "f.json",
        r#"{"version":"1","seed":2024,"gate":{"family":"general_q_qt","q":4,"qt":2},
            "mps":{"family":"ghz_cluster","theta":0.7853981633974483,"q":4},
            "right_state":{"kind":"product","level":2},"l_r":4,"tmax":12}"#,
    );
    let out = run(&["evolve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    let last: f64 = rows.last().unwrap()[1].parse().unwrap();
    assert!((last - 4.0 * 2f64.ln()).abs() < 1e-3, "{last}");
}

#[test]
fn oracle_exit_codes() {
    let ok = run(&[
        "oracle",
        "--config",
        shipped("oracle_q2_dressed_swap.json").to_str().unwrap(),
    ]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    let rows = csv_rows(&ok);
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[1].parse::<f64>().unwrap() < 1e-10));

    let wrong = run(&[
        "oracle",
        "--config",
        shipped("oracle_q2_wrong_parity.json").to_str().unwrap(),
    ]);
    assert_eq!(wrong.status.code(), Some(1));

    let dir = TempDir::new().unwrap();
    let short = write_config(
        &dir,
        "s.json",
        r#"{"version":"1","seed":1,"gate":{"family":"q2_qt2"},"mps":{"family":"cluster"},
            "right_state":{"kind":"random"},"l_r":2,"tmax":3,"l_left":6,
            "oracle":{"closure":{"kind":"fixed_vector","index":0}}}"#,
    );
    assert_eq!(
        run(&["oracle", "--config", short.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn capacity_override_gives_exit_three() {
    let out = bin()
        .args([
            "oracle",
            "--config",
            shipped("oracle_q2_dressed_swap.json").to_str().unwrap(),
        ])
        .env("SOLVCIRC_CAP", "64")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let bad = bin()
        .args([
            "oracle",
            "--config",
            shipped("oracle_q2_dressed_swap.json").to_str().unwrap(),
        ])
        .env("SOLVCIRC_CAP", "lots")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn renyi_tables() {
    let prod = run(&[
        "renyi",
        "--config",
        shipped("renyi_product.json").to_str().unwrap(),
    ]);
    assert_eq!(prod.status.code(), Some(0));
    for r in csv_rows(&prod) {
        assert_eq!(r[5].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[3], "");
    }
    let cl = run(&[
        "renyi",
        "--config",
        shipped("renyi_cluster.json").to_str().unwrap(),
    ]);
    assert_eq!(
        cl.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&cl.stderr)
    );
    for r in csv_rows(&cl) {
        let via: f64 = r[2].parse().unwrap();
        let chain: f64 = r[3].parse().unwrap();
        assert!((via - chain).abs() < 1e-8);
        let v: f64 = r[5].parse().unwrap();
        assert!((0.0..=2.0 + 1e-8).contains(&v));
    }
}

#[test]
fn fixed_point_pass_and_fail() {
    let ok = run(&[
        "fixed-point",
        "--config",
        shipped("fixed_point_q2.json").to_str().unwrap(),
    ]);
    assert_eq!(ok.status.code(), Some(0));
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "h.json",
        r#"{"version":"1","seed":2,"gate":{"family":"haar","q":2},"mps":{"family":"cluster"}}"#,
    );
    let bad = run(&["fixed-point", "--config", cfg.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert!(v["residual"].as_f64().unwrap() > 1e-3);
}
