use std::path::Path;
use std::process::{Command, Output};

fn purex(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_purex")).args(args).current_dir(dir).env("PUREX_THREADS", "1").output().unwrap()
}

const CONFIG: &str = r#"{
    "families": [{"family": "one_sparse_k", "k_rule": {"fixed": 2}}],
    "n_values": [6],
    "algorithms": ["lil_rand_lucb", "lucb"],
    "trials": 3,
    "timing": false,
    "output_path": "default.csv"
}"#;

#[test]
fn run_then_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), CONFIG).unwrap();
    let out = purex(&["run", "--config", "c.json", "--out", "r.csv", "--seed", "5", "--trials", "4"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "algorithm,family,n,k,mode,trial,seed,total_samples,correct,capped,wall_time_ns");
    assert_eq!(lines.count(), 8);
    let resolved = std::fs::read_to_string(dir.path().join("r.resolved.json")).unwrap();
    assert!(resolved.contains("\"master_seed\": 5"));

    let again = purex(&["run", "--config", "c.json", "--out", "r2.csv", "--seed", "5", "--trials", "4"], dir.path());
    assert!(again.status.success());
    assert_eq!(csv, std::fs::read_to_string(dir.path().join("r2.csv")).unwrap());

    let agg = purex(&["aggregate", "--in", "r.csv", "--out", "s.csv"], dir.path());
    assert!(agg.status.success());
    let summary = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(summary.starts_with("algorithm,family,n,k,mode,trials,mean_samples,stderr_samples,accuracy,capped\n"));
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn mode_override_writes_faithful_rows() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), CONFIG).unwrap();
    let out = purex(&["run", "--config", "c.json", "--mode", "faithful", "--trials", "1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("default.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.contains(",faithful,")));
    let resolved = std::fs::read_to_string(dir.path().join("default.resolved.json")).unwrap();
    assert!(resolved.contains("linear_delta"));
}

#[test]
fn unknown_config_key_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), CONFIG.replace("\"trials\"", "\"trails\"")).unwrap();
    let out = purex(&["run", "--config", "c.json"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("trails"));
}

#[test]
fn validate_lil_prints_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = purex(&["validate-lil", "--epsilon", "0.01", "--delta", "0.01", "--horizon", "200", "--paths", "200"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    let rate: f64 = text.lines().next().unwrap().strip_prefix("violation_rate ").unwrap().parse().unwrap();
    assert!((0.0..=0.02).contains(&rate));
    assert!(text.contains("bound "));
}

#[test]
fn aggregate_rejects_wrong_header() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "algo,n\nlucb,4\n").unwrap();
    let out = purex(&["aggregate", "--in", "bad.csv", "--out", "s.csv"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not match"));
}
