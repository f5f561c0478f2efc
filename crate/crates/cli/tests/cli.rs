use std::fs;
use std::process::Command;

use gv_cli::{execute, run_with, RunConfig, EXIT_CHECK, EXIT_CONFIG, EXIT_COVERAGE, EXIT_OK};

fn gv() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gv"));
    c.env_remove("GV_CACHE");
    c
}

#[test]
fn csv_output_is_byte_identical_across_runs() {
    let args = ["count-hyperboloid", "--d", "4", "--h", "3", "--grid", "2^6..2^10"];
    let a = gv().args(args).output().unwrap();
    let b = gv().args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr, "summary, including bootstrap output, is seeded");
}

#[test]
fn tau_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let first = gv()
        .args(["tau", "--table-size", "300", "--cache"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(first.status.success());
    assert!(dir.path().join("delta-300.gvct").exists());
    let second = gv()
        .args(["tau", "--table-size", "300", "--cache"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(first.stdout, second.stdout);
    let summary = String::from_utf8(second.stderr).unwrap();
    assert!(summary.contains("\"source\": \"cache\""), "{summary}");
    let fresh = execute(&RunConfig::new("tau").param("table-size", 300)).unwrap();
    assert_eq!(fresh.csv, first.stdout);
}

#[test]
fn environment_cache_overrides_flag() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let out = gv()
        .env("GV_CACHE", env_dir.path())
        .args(["tau", "--table-size", "40", "--cache"])
        .arg(flag_dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(env_dir.path().join("delta-40.gvct").exists());
    assert!(!flag_dir.path().join("delta-40.gvct").exists());
}

#[test]
fn config_errors_exit_two() {
    let bad_grid = gv().args(["count-circle", "--grid", "5,3"]).output().unwrap();
    assert_eq!(bad_grid.status.code(), Some(EXIT_CONFIG));
    let wrong_key = gv().args(["tau", "--d", "3"]).output().unwrap();
    assert_eq!(wrong_key.status.code(), Some(EXIT_CONFIG));
    let integer_radius = gv().args(["hardy", "--grid", "20", "--terms", "1000"]).output().unwrap();
    assert_eq!(integer_radius.status.code(), Some(EXIT_CONFIG));
    let mut sink = Vec::new();
    let code = run_with(&RunConfig::new("no-such-thing"), &mut Vec::new(), &mut sink);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn short_table_exits_three() {
    let out = gv()
        .args(["second-moment", "--grid", "100,200,400", "--table-size", "1000"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_COVERAGE));
    let capped = gv()
        .args(["smooth-hyperboloid", "--kernel", "cesaro:1", "--grid", "1e8"])
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(EXIT_COVERAGE));
}

#[test]
fn failed_check_exits_four_only_with_flag() {
    // S^nu of Delta stays positive on [1, 250], so this window has no change.
    let args = ["sign-scan", "--grid", "100"];
    assert_eq!(gv().args(args).output().unwrap().status.code(), Some(EXIT_OK));
    let out = gv().args(args).arg("--check").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CHECK));
    assert!(String::from_utf8_lossy(&out.stderr).contains("check failed"));
}

#[test]
fn out_flag_writes_json_sibling() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("div.csv");
    let out = gv().args(["divisor-identity", "--R", "30", "--out"]).arg(&csv_path).output().unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let csv = fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("R,lhs,rhs,lhsAllZ,identityEqual,direct,combined,combinationEqual\n"));
    assert_eq!(csv.lines().count(), 31);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("div.json")).unwrap()).unwrap();
    assert_eq!(json["schemaVersion"], 1);
    assert_eq!(json["subcommand"], "divisor-identity");
    assert_eq!(json["params"]["R"], "30");
    assert_eq!(json["results"]["allEqual"], true);
    assert_eq!(json["allChecksPass"], true);
}

#[test]
fn fit_reads_exported_counts() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("counts.csv");
    let status = gv()
        .args(["count-hyperboloid", "--grid", "2^8..2^14", "--out"])
        .arg(&data)
        .status()
        .unwrap();
    assert!(status.success());
    let out = gv()
        .args(["fit", "--model", "0.5:1,0.5:0", "--without", "0.5:0", "--input"])
        .arg(&data)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("term,exponent,logPower,coefficient\n"));
    assert_eq!(text.lines().count(), 3);
    let summary: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(summary["results"]["logTermVerdict"]["verdict"], "log");
}

#[test]
fn summary_keys_are_sorted() {
    let r = execute(&RunConfig::new("kernels-verify")).unwrap();
    let text = r.summary_json(&RunConfig::new("kernels-verify"));
    let top: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \""))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = top.clone();
    sorted.sort();
    assert_eq!(top, sorted);
    assert!(r.all_pass());
}
