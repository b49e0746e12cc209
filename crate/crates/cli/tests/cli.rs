//! Runs the `covset` binary end to end.

use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn covset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covset")).args(args).output().unwrap()
}

fn covset_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_covset"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn temp_file(name: &str, contents: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("covset-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

const OPENING: &str = r#"{"classes": [[2,0],[3,0],[4,1],[6,1],[12,11]], "name": "opening"}"#;

#[test]
fn density_of_opening_system() {
    let path = temp_file("opening.json", OPENING);
    let r = json(&covset(&["density", "--input", path.to_str().unwrap()]));
    assert_eq!(r["command"], "density");
    assert_eq!(r["result"]["delta"], "0/1");
    assert_eq!(r["result"]["period"], 12);
    for method in ["scan", "inclusion-exclusion", "decomposition"] {
        let r = json(&covset(&["density", "--input", path.to_str().unwrap(), "--method", method]));
        assert_eq!(r["result"]["delta"], "0/1", "{method}");
    }
}

#[test]
fn text_input_from_stdin() {
    let r = json(&covset_stdin(&["--format", "text", "density", "--input", "-"], "0 mod 2\n0 mod 3 # comment\n"));
    assert_eq!(r["result"]["delta"], "1/3");
}

#[test]
fn construct_exact_round_trips() {
    let r = json(&covset(&["construct-exact", "--J", "2"]));
    assert_eq!(r["result"]["verified"], true);
    let system = &r["result"]["system"];
    assert_eq!(system.as_array().unwrap().len(), 10);
    assert!(system.as_array().unwrap().iter().all(|c| c[0] == 10));
    let doc = serde_json::json!({ "classes": system }).to_string();
    let path = temp_file("j2.json", &doc);
    let v = json(&covset(&["verify-exact-cover", "--input", path.to_str().unwrap()]));
    assert_eq!(v["result"]["is_exact_cover"], true);
    assert_eq!(&v["inputs"]["system"]["classes"], system);

    let r3 = json(&covset(&["construct-exact", "--J", "3"]));
    let doc = serde_json::json!({ "classes": r3["result"]["system"] }).to_string();
    let path = temp_file("j3.json", &doc);
    let d = json(&covset(&["density", "--input", path.to_str().unwrap()]));
    assert_eq!(d["result"]["delta"], "0/1");
    assert_eq!(d["inputs"]["system"]["classes"], r3["result"]["system"]);
}

#[test]
fn stats_enumerate_and_csv() {
    let r = json(&covset(&["stats", "--moduli", "2,4", "--mode", "enumerate"]));
    assert_eq!(r["result"]["mean"], "3/8");
    assert_eq!(r["result"]["variance"], "1/64");
    assert!(r.get("seed").is_none());
    let csv = covset(&["--format", "csv", "stats", "--moduli", "2,4"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "moduli,method,mean,second_moment,variance,sample_count,seed");
    assert!(text.contains("3/8"));
}

#[test]
fn randomized_commands_echo_seed_and_reproduce() {
    let args = ["stats", "--moduli", "3,4,5", "--mode", "monte-carlo", "--trials", "200", "--seed", "11"];
    let a = covset(&args);
    let b = covset(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["seed"], 11);
    let g = ["greedy", "--N", "3", "--K", "6", "--seed", "5"];
    let (a, b) = (covset(&g), covset(&g));
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a);
    assert_eq!(r["seed"], 5);
    assert_eq!(r["result"]["step_invariant"]["holds"], true);
}

#[test]
fn exit_codes() {
    // guard exceeded
    let out = covset(&["delta-plus", "--moduli", "2,3", "--guard", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = covset(&["construct-exact", "--J", "5"]);
    assert_eq!(out.status.code(), Some(2));
    // input errors
    let out = covset(&["density", "--input", "/nonexistent/system.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    let bad = temp_file("bad.json", r#"{"classes": [[0, 1]]}"#);
    assert_eq!(covset(&["density", "--input", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(covset(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(covset(&["stats", "--moduli", "x"]).status.code(), Some(1));
    assert_eq!(covset(&["--help"]).status.code(), Some(0));
}

#[test]
fn other_commands_report() {
    let path = temp_file("small.json", "[[7,3],[5,2],[6,1]]");
    let p = path.to_str().unwrap();
    let w = json(&covset(&["witness", "--input", p, "--B", "10"]));
    assert_eq!(w["result"]["witness"], "0");
    assert_eq!(w["result"]["verified"], true);
    let b = json(&covset(&["bounds", "--input", p, "--refined"]));
    assert_eq!(b["result"]["certificate"]["conclusion"], "positive");
    let c = json(&covset(&["certify", "--input", p, "--Q", "3"]));
    assert_eq!(c["result"]["kind"], "decomposed");
    let d = json(&covset(&["decompose", "--input", p, "--Q", "3", "--identity"]));
    assert_eq!(d["result"]["m"], 6);
    assert_eq!(d["result"]["identity"]["equal"], true);
    let m = json(&covset(&["delta-minus", "--moduli", "2,3,4"]));
    assert_eq!(m["result"]["value"], "1/6");
    let x = json(&covset(&["xineq", "--J", "4"]));
    assert_eq!(x["result"]["all_hold"], true);
    let h = json(&covset(&["haight", "--N", "100"]));
    assert_eq!(h["result"]["primes"].as_array().unwrap().len(), 13);
}
