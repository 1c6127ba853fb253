use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hdqchain::runner::{csv_string, RunReport, CSV_HEADER, GOLDEN_TRANSCRIPT_HASH};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hdqchain"));
    c.env_remove("HDQCHAIN_SEED");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run_to(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg("--config").arg(config).arg("--out").arg(out).args(extra).output().unwrap()
}

fn report(out: &Path) -> RunReport {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn honest_default_matches_golden_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_to(&configs().join("honest_default.json"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path());
    assert_eq!(r.transcript_hash, GOLDEN_TRANSCRIPT_HASH);
    assert_eq!(r.rows.len(), 1);
    assert_eq!(r.rows[0].stats.detection_rate, 0.0);
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("honest,2,4,1,200,0,0,"));
}

#[test]
fn transcript_verb_prints_the_committed_file() {
    let o = bin().arg("transcript").output().unwrap();
    assert!(o.status.success());
    let committed = std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/transcript_n4_N2_m1_seed0.json")).unwrap();
    assert_eq!(o.stdout, committed);
}

#[test]
fn intercept_sweep_rates_increase() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_to(&configs().join("intercept_sweep.json"), dir.path(), &["--trials", "2000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path());
    let dims: Vec<usize> = r.rows.iter().map(|row| row.qudit_dim).collect();
    assert_eq!(dims, vec![2, 3, 5]);
    assert_eq!(r.config.trials, 2000);
    assert!(r.rows.windows(2).all(|w| w[0].stats.detection_rate < w[1].stats.detection_rate));
}

#[test]
fn runs_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = configs().join("all_attacks.json");
    for d in [&a, &b] {
        let o = run_to(&cfg, d.path(), &["--trials", "300"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ra, rb) = (report(a.path()), report(b.path()));
    assert_eq!(ra.without_wall_clock().to_json(), rb.without_wall_clock().to_json());
    let csv_a = std::fs::read(a.path().join("report.csv")).unwrap();
    assert_eq!(csv_a, std::fs::read(b.path().join("report.csv")).unwrap());
    assert_eq!(csv_string(&ra).as_bytes(), &csv_a[..]);
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("honest_default.json");
    let o = bin()
        .env("HDQCHAIN_SEED", "7")
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(report(dir.path()).config.seed, 7);
    assert_ne!(report(dir.path()).transcript_hash, GOLDEN_TRANSCRIPT_HASH);

    let o = bin().env("HDQCHAIN_SEED", "7").args(["run", "--seed", "0", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(o.status.success());
    assert_eq!(report(dir.path()).transcript_hash, GOLDEN_TRANSCRIPT_HASH);

    let o = bin().env("HDQCHAIN_SEED", "seven").args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_exit_2_and_name_every_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"qudit_dim": 1, "n_blocks": 2, "m_symbols": 1}"#);
    let o = bin().arg("run").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("qudit_dim") && err.contains("n_blocks"), "{err}");

    let o = bin().arg("run").arg("--config").arg(dir.path().join("missing.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let cfg = write_config(dir.path(), "syntax.json", "{ \"qudit_dim\": ");
    assert_eq!(bin().arg("run").arg("--config").arg(&cfg).output().unwrap().status.code(), Some(2));
}

#[test]
fn oversized_configs_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "big.json", r#"{"qudit_dim": 100, "n_blocks": 3, "m_symbols": 4, "amplitude_cap": 1000000}"#);
    let o = bin().arg("run").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missed_tolerance_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "tight.json",
        r#"{"qudit_dim": 2, "n_blocks": 3, "m_symbols": 1, "trials": 999, "tolerance_z": 1e-9,
            "scenarios": [{"kind": "intercept_resend"}]}"#,
    );
    let o = run_to(&cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!report(dir.path()).all_pass);
}

#[test]
fn empty_scenario_list_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "empty.json", r#"{"qudit_dim": 3, "n_blocks": 3, "m_symbols": 1, "scenarios": []}"#);
    let o = run_to(&cfg, dir.path(), &[]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(dir.path().join("report.csv")).unwrap(), format!("{CSV_HEADER}\n"));
}

#[test]
fn oracle_table() {
    let o = bin().args(["oracle", "--attack", "intercept_resend", "--dims", "2,3,5"]).output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,detection_probability"));
    let rows: Vec<(usize, f64)> = lines
        .map(|l| {
            let (n, p) = l.split_once(',').unwrap();
            (n.parse().unwrap(), p.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![2, 3, 5]);
    for (n, p) in rows {
        assert!((p - (1.0 - 1.0 / n as f64)).abs() < 1e-12, "N={n} p={p}");
    }

    let o = bin()
        .args(["oracle", "--attack", r#"{"kind":"intercept_resend","channel":{"chain_link":1},"basis":"fourier"}"#, "--dims", "3"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("3,unsupported"));

    assert_eq!(bin().args(["oracle", "--attack", "warp_drive"]).output().unwrap().status.code(), Some(2));
}
