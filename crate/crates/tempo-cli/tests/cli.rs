//! End-to-end tests of the command-line interface: exit codes, JSON
//! payloads, model round-trips and output stability.

use std::path::PathBuf;
use std::process::{Command, Output};

fn tempo(args: &[&str], dir: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tempo"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &std::path::Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tempo-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const PAIR_SMP: &str = "\
smp reactive
inputs a
outputs a
state s1 exp(4) {}
state s2 exp(2) {}
trans s1 a 1 s1
trans s2 a 1 s2
";

const FIGURE_WTS: &str = "\
wts
state s {a}
state sp {b}
state t {a}
state tp {b}
trans s 1 sp
trans s 2 sp
trans s 3 sp
trans t 1 tp
trans t 3 tp
";

#[test]
fn simdist_returns_the_distance_payload() {
    let dir = workdir("simdist");
    write(&dir, "pair.smp", PAIR_SMP);
    let out = tempo(&["simdist", "pair.smp", "s1", "s2", "--format", "json"], &dir);
    assert!(out.status.success());
    let payload: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(payload["distance"], serde_json::json!(2.0));
    let out = tempo(&["simdist", "pair.smp", "s2", "s1", "--format", "json"], &dir);
    let payload: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(payload["distance"], serde_json::json!(1.0));
}

#[test]
fn sat_wlwb_reads_a_formula_file_and_dumps_the_model() {
    let dir = workdir("sat");
    write(&dir, "formula.wlwb", "!( !(L 2 p1 & M 5 (L 1 p1)) & !(M 2 p2) )");
    let out = tempo(&["sat-wlwb", "formula.wlwb", "--format", "json"], &dir);
    assert!(out.status.success());
    let payload: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(payload["sat"], serde_json::json!(true));
    let model = payload["model"].as_str().unwrap();
    assert!(model.starts_with("wts\n"));
    // inline formulas work too
    let out = tempo(&["sat-wlwb", "p & !p", "--format", "json"], &dir);
    let payload: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(payload["sat"], serde_json::json!(false));
}

#[test]
fn bisim_commands_disagree_on_the_figure() {
    let dir = workdir("bisim");
    write(&dir, "fig.wts", FIGURE_WTS);
    let gen = tempo(&["gen-bisim", "fig.wts", "s", "t", "--format", "json"], &dir);
    let exact = tempo(&["bisim", "fig.wts", "s", "t", "--format", "json"], &dir);
    let gen: serde_json::Value = serde_json::from_slice(&gen.stdout).unwrap();
    let exact: serde_json::Value = serde_json::from_slice(&exact.stdout).unwrap();
    assert_eq!(gen["bisimilar"], serde_json::json!(true));
    assert_eq!(exact["bisimilar"], serde_json::json!(false));
}

#[test]
fn exit_codes() {
    let dir = workdir("exit");
    // missing file -> 2
    let out = tempo(&["simdist", "missing.smp", "a", "b"], &dir);
    assert_eq!(out.status.code(), Some(2));
    // unknown state -> 2
    write(&dir, "pair.smp", PAIR_SMP);
    let out = tempo(&["simdist", "pair.smp", "nope", "s2"], &dir);
    assert_eq!(out.status.code(), Some(2));
    // bad formula -> 2 with a diagnostic on stderr
    let out = tempo(&["sat-wlwb", "L -1 p"], &dir);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    // resource guard -> 3
    write(
        &dir,
        "wide.smp",
        "smp reactive\ninputs a,b,c\noutputs a,b,c\n\
         state s0 exp(1) {}\nstate s1 exp(1) {}\nstate s2 exp(1) {}\nstate s3 exp(1) {}\n\
         trans s0 a 1 s1\ntrans s0 b 1 s2\ntrans s0 c 1 s3\n\
         trans s1 a 1 s2\ntrans s1 b 1 s3\ntrans s1 c 1 s0\n\
         trans s2 a 1 s3\ntrans s2 b 1 s0\ntrans s2 c 1 s1\n\
         trans s3 a 1 s0\ntrans s3 b 1 s1\ntrans s3 c 1 s2\n",
    );
    let out = tempo(
        &["faster-than", "wide.smp", "wide.smp", "--approx", "0.001", "4.0", "--horizon", "6"],
        &dir,
    );
    // identical models short-circuit, so compare distinct copies
    write(&dir, "wide2.smp", &std::fs::read_to_string(dir.join("wide.smp")).unwrap().replace("s0", "z0"));
    let out2 = tempo(
        &["faster-than", "wide.smp", "wide2.smp", "--approx", "0.001", "4.0", "--horizon", "6"],
        &dir,
    );
    assert!(out.status.code() == Some(0));
    assert_eq!(out2.status.code(), Some(3), "{}", String::from_utf8_lossy(&out2.stderr));
}

#[test]
fn compose_round_trips_and_is_byte_stable() {
    let dir = workdir("compose");
    write(&dir, "pair.smp", PAIR_SMP);
    let out = tempo(
        &["compose", "pair.smp", "pair.smp", "--star", "product", "-o", "out.smp"],
        &dir,
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.join("out.smp")).unwrap();
    // the written model re-parses and re-serialises identically
    let again = tempo(
        &["compose", "pair.smp", "pair.smp", "--star", "product", "-o", "out2.smp"],
        &dir,
    );
    assert!(again.status.success());
    assert_eq!(text, std::fs::read_to_string(dir.join("out2.smp")).unwrap());
    assert!(text.contains("exp(16)")); // 4 * 4
    // identical runs give identical stdout
    let a = tempo(&["simdist", "pair.smp", "s1", "s2", "--format", "json"], &dir);
    let b = tempo(&["simdist", "pair.smp", "s1", "s2", "--format", "json"], &dir);
    assert_eq!(a.stdout, b.stdout);
    let s = tempo(&["axioms", "--models", "20", "--seed", "5", "--format", "json"], &dir);
    let s2 = tempo(&["axioms", "--models", "20", "--seed", "5", "--format", "json"], &dir);
    assert_eq!(s.stdout, s2.stdout);
}

#[test]
fn selftest_reports_all_pass() {
    let dir = workdir("selftest");
    let out = tempo(&["selftest", "--format", "json"], &dir);
    assert!(out.status.success());
    let payload: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(payload["all_pass"], serde_json::json!(true), "{payload:#}");
    assert!(payload["checks"].as_array().unwrap().len() >= 15);
}

#[test]
fn grid_env_var_is_honoured() {
    let dir = workdir("env");
    write(&dir, "pair.smp", PAIR_SMP);
    let out = Command::new(env!("CARGO_BIN_EXE_tempo"))
        .args(["eps-sim", "pair.smp", "s1", "s2", "2", "--format", "json"])
        .env("TEMPO_GRID_POINTS", "64")
        .current_dir(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let payload: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(payload["simulates"], serde_json::json!(true));
    // a bad value is rejected up front
    let out = Command::new(env!("CARGO_BIN_EXE_tempo"))
        .args(["eps-sim", "pair.smp", "s1", "s2", "2"])
        .args(["--grid-points", "4"])
        .current_dir(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
