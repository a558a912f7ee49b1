use std::process::{Command, Output};

use serde_json::Value;

fn cpw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpw")).args(args).env_remove("WORKBENCH_SEED").output().expect("cpw runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn data(name: &str) -> String {
    format!("{}/examples/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn steiner_cp_witness_passes() {
    let o = cpw(&["steiner", "cp-witness", "--k", "2", "--n", "3", "--lmax", "2", "--stages", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["schema"], "cpw-report/1");
    assert_eq!(r["verdict"], "PASS");
    assert!(r["timing"]["total_ms"].is_u64());
}

#[test]
fn unknown_command_is_a_usage_error() {
    assert_eq!(code(&cpw(&["frobnicate"])), 2);
    assert_eq!(code(&cpw(&["steiner", "cp-witness", "--k", "2"])), 2);
}

#[test]
fn even_n_is_rejected() {
    let o = cpw(&["ngon", "cp-witness", "--n", "4"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("even n = 4 is not supported"));
}

#[test]
fn small_stage_budget_exits_three() {
    assert_eq!(code(&cpw(&["ngon", "cp-witness", "--n", "3", "--lmax", "1", "--stages", "5"])), 3);
    assert_eq!(code(&cpw(&["steiner", "cp-witness", "--k", "2", "--n", "3", "--stages", "2"])), 3);
}

#[test]
fn fail_reports_name_the_first_failing_clause() {
    let o = cpw(&["cyclic", "cp-witness", "--order", "2", "--lmax", "2", "--inject-chain-fault", "1"]);
    assert_eq!(code(&o), 1);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["verdict"], "FAIL");
    assert_eq!(r["first_failure"], "ChainStep");
    assert!(String::from_utf8_lossy(&o.stderr).contains("ChainStep at 1"));
}

#[test]
fn other_domains() {
    assert_eq!(code(&cpw(&["cyclic", "cp-witness", "--order", "inf", "--lmax", "3", "--length-budget", "12"])), 0);
    assert_eq!(code(&cpw(&["tfab", "cp-witness", "--char", "2:0;3:inf;default:0", "--lmax", "6", "--height-budget", "64"])), 0);
    assert_eq!(code(&cpw(&["tfab", "cp-witness", "--char", "default:inf"])), 2);
    let o = cpw(&["plane", "hall", "--k", "5", "--stages", "2"]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["result"]["stage_sizes"], serde_json::json!([6, 13, 20]));
}

#[test]
fn file_inputs() {
    let dir = std::env::temp_dir().join(format!("cpw-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let dot = dir.join("c.dot");
    let out = dir.join("c.json");
    let o = cpw(&[
        "steiner", "complete", "--k", "2", "--n", "3", "--stages", "1",
        "--in", &data("steiner_three_points.json"),
        "--dot", dot.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("graph"));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["result"]["elements"].as_array().unwrap().len(), 9);

    let o = cpw(&["steiner", "verify-hf", "--k", "2", "--n", "3", "--in", &data("steiner_three_points.json"), "--order", "a1,a2 | a3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let o = cpw(&["plane", "canonicalize", "--in", &data("plane_generators.json")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"elements\": [").unwrap();
    let o = cpw(&["plane", "canonicalize", "--in", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn seed_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_cpw"))
        .args(["--no-timing", "cyclic", "cp-witness", "--order", "2"])
        .env("WORKBENCH_SEED", "41")
        .output()
        .unwrap();
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["config"]["seed"], 41);
}
