use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn model(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etopacity"))
        .args(args)
        .env_remove("ETOPACITY_MAX_STATES")
        .env_remove("ETOPACITY_MAX_DEPTH")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn synth_fos() {
    let r = json(&run(&["synth", &model("running.pta"), "--problem", "fos"]));
    assert_eq!(r["problem"], "fos");
    assert_eq!(r["status"], "complete");
    assert_eq!(r["result"].as_array().unwrap().len(), 1);
    assert!(r["timings"].is_null());
}

#[test]
fn check_exist_and_full() {
    let r = json(&run(&["check", &model("running.pta"), "--valuation", "p1=1,p2=4", "--mode", "exist"]));
    assert_eq!(r["result"]["opaque"], true);
    assert_eq!(r["result"]["duration"], "1");
    let r = json(&run(&["check", &model("running.pta"), "--valuation", "p1=1,p2=4", "--mode", "full"]));
    assert_eq!(r["result"]["opaque"], false);
    assert_eq!(r["result"]["side"], "public-only");
}

#[test]
fn bounded_foe_witness() {
    let r = json(&run(&["bounded", &model("running.pta"), "--problem", "foe", "--pmax", "5", "--jobs", "2"]));
    assert_eq!(r["status"], "bounded(5)");
    assert_eq!(r["result"]["verdict"], "non-empty");
    assert_eq!(r["result"]["witness"], serde_json::json!({ "p1": 0, "p2": 3 }));
}

#[test]
fn oracle_csv() {
    let out = run(&["oracle", &model("running.pta"), "--valuation", "p1=1,p2=4", "--bound", "4", "--csv"]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "duration,visibility\n0,public-only\n1,both\n2,both\n3,both\n4,private-only\n"
    );
}

#[test]
fn export_smt_and_dot() {
    let dir = std::env::temp_dir().join(format!("etopacity-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let smt = dir.join("q.smt2");
    let dot = dir.join("z.dot");
    json(&run(&["export", &model("running.pta"), "--smt", smt.to_str().unwrap()]));
    let text = std::fs::read_to_string(&smt).unwrap();
    assert!(text.starts_with("(set-logic ALL)") && text.contains("(check-sat)"));
    json(&run(&["pet", &model("self_loop.pta"), "--method", "zones", "--dot", dot.to_str().unwrap()]));
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["validate", "nosuch.pta"]).status.code(), Some(2));
    assert_eq!(run(&["check", &model("running.pta"), "--valuation", "p1=1", "--mode", "exist"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    // two clocks: no exact method
    assert_eq!(run(&["bounded", &model("two_clocks.pta"), "--problem", "eoe", "--pmax", "2"]).status.code(), Some(1));
}

#[test]
fn output_is_reproducible() {
    let args = ["synth", &model("running.pta"), "--problem", "d-fos"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn pretty_output() {
    let out = run(&["check", &model("running.pta"), "--valuation", "p1=0,p2=3", "--mode", "full", "--pretty"]);
    assert!(out.status.success());
    assert!(serde_json::from_slice::<Value>(&out.stdout).is_err());
}
