//! Command-line behaviour: outputs, determinism and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use rician_fusion::config::ScenarioFile;
use rician_fusion::scenario::linear_to_db;

const HEADER: &str = "preset,jammer,rule,sigma_w2_dbm,n_antennas,target_pf0,gamma,achieved_pf0,pd0,pd0_stderr,trials,seed";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rician-fusion"))
        .args(args)
        .env_remove("RICIAN_FUSION_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_writes_preset_deployment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("los.toml");
    let o = run(&["generate", "--preset", "los", "--k", "14", "--n", "6", "--seed", "7", "--out", path_str(&out)]);
    assert!(o.status.success());
    let file = ScenarioFile::load(&out).unwrap();
    let sensors = &file.wsn.as_ref().unwrap().sensors;
    assert_eq!(sensors.len(), 14);
    for s in sensors {
        let k = linear_to_db(s.kappa);
        assert!((10.0..=20.0).contains(&k), "{k}");
    }
    let table = stdout(&o);
    assert!(table.starts_with("sensor  theta_deg  beta_dbm  los_power_dbm"));
    assert_eq!(table.lines().count(), 15);
}

#[test]
fn generate_jammer_block_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.toml");
    let b = dir.path().join("b.toml");
    for p in [&a, &b] {
        let o = run(&["generate", "--preset", "nlos", "--jammer", "weak-los-jam", "--r", "2", "--out", path_str(p)]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let file = ScenarioFile::load(&a).unwrap();
    assert_eq!(file.jammer.unwrap().emitters.len(), 2);
    assert_eq!(file.deployment.jammer.unwrap().rank, 2);
}

#[test]
fn run_table_shape_and_header() {
    let o = run(&[
        "run", "--preset", "los", "--rules", "llr,is,nlos,wl0,wl1,igmm", "--sigma-grid", "-10:2:10", "--n", "2,6",
        "--pf0", "0.1", "--trials", "1000", "--k", "6",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * 11 * 6);
    assert!(rows[0].starts_with("los,none,llr,-10,2,0.1,"));
    assert!(rows[0].ends_with(",1000,1"));
    assert!(rows.iter().all(|r| r.split(',').count() == 12));
}

#[test]
fn run_is_deterministic_across_threads_and_seed_sources() {
    let base = ["run", "--jammer", "los-jam", "--rules", "is-glrt,nlos-glrt,igmm-glrt,clairvoyant", "--pf0", "0.1", "--trials", "1000", "--k", "5"];
    let one = run(&[&base[..], &["--threads", "1", "--seed", "9"]].concat());
    let two = run(&[&base[..], &["--threads", "2", "--seed", "9"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_rician-fusion"))
        .args(base)
        .env("RICIAN_FUSION_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(env.stdout, one.stdout);
    let other = run(&[&base[..], &["--seed", "10"]].concat());
    assert_ne!(other.stdout, one.stdout);
}

#[test]
fn run_writes_series_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let series = dir.path().join("series");
    let o = run(&[
        "run", "--rules", "is", "--sigma-grid", "0:5:10", "--pf0", "0.1", "--trials", "1000", "--k", "4",
        "--out", path_str(&csv), "--series-dir", path_str(&series),
    ]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 4);
    let vs_sigma = std::fs::read_to_string(series.join("los_none_is_n6.csv")).unwrap();
    assert_eq!(vs_sigma.lines().next(), Some("sigma_w2_dbm,pd0,pd0_stderr"));
    assert_eq!(vs_sigma.lines().count(), 4);
}

#[test]
fn usage_errors_exit_with_two() {
    let empty = run(&["run", "--rules", ""]);
    assert_eq!(empty.status.code(), Some(2));
    let unknown = run(&["run", "--rules", "is,bogus"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("igmm-glrt"));
    let needs_jammer = run(&["run", "--rules", "is-glrt", "--trials", "1000", "--pf0", "0.1"]);
    assert_eq!(needs_jammer.status.code(), Some(2));
    let too_few = run(&["run", "--rules", "is", "--trials", "50", "--pf0", "0.01"]);
    assert_eq!(too_few.status.code(), Some(2));
    assert_eq!(run(&["run"]).status.code(), Some(2));
}

#[test]
fn io_errors_exit_with_three() {
    let o = run(&["generate", "--out", "/nonexistent-dir/scenario.toml"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["run", "--rules", "is", "--scenario", "/nonexistent-dir/scenario.toml"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_reports_equivalences() {
    let o = run(&["verify", "--preset", "nlos", "--trials", "2000", "--k", "8"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("lemma1: equivalent is,nlos"));
    assert!(text.contains("lemma1: equivalent igmm,nlos"));

    let o = run(&["verify", "--preset", "los", "--jammer", "los-jam", "--is-assumption", "--trials", "2000", "--k", "8"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("lemma3: equivalent igmm,is"));
    assert!(text.contains("wl-pair: equivalent wl0,wl1"));
    assert!(text.contains("jam-lemma: equivalent igmm-glrt,is-glrt"));
    assert!(text.lines().all(|l| l.split(' ').count() == 4));
}

#[test]
fn scenario_file_replays_run() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.toml");
    assert!(run(&["generate", "--k", "5", "--seed", "3", "--out", path_str(&file)]).status.success());
    let args = ["run", "--rules", "igmm", "--pf0", "0.1", "--trials", "1000", "--seed", "3"];
    let from_file = run(&[&args[..], &["--scenario", path_str(&file)]].concat());
    let from_preset = run(&[&args[..], &["--k", "5"]].concat());
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, from_preset.stdout);
}

#[test]
fn roc_emits_one_row_per_rule_and_level() {
    let o = run(&["roc", "--rules", "is,nlos", "--pf0-grid", "0.05,0.1", "--trials", "2000", "--k", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("preset,jammer,rule,sigma_w2_dbm,n_antennas,target_pf0,pf0,pd0,trials,seed"));
    assert_eq!(text.lines().count(), 5);
}
