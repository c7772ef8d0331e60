use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

const BIN: &str = env!("CARGO_BIN_EXE_softac");

fn softac(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gac_output_passes_check_gac() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("gac.toml");
    let out = softac(&["gac", "fig1a", "--verify", "-o", path(&out_file)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"]["gac"], json!(true));
    assert_eq!(r["results"]["f_min"], json!(0));
    assert_eq!(r["results"]["oracle_equivalent"], json!(true));
    assert_eq!(r["results"]["oracle_optimum"], json!(0));
    assert!(r["counters"]["iterations"].is_u64());

    let check = softac(&["check-gac", path(&out_file)]);
    assert_eq!(check.status.code(), Some(0));
    let equiv = softac(&["equiv", "fig1a", path(&out_file)]);
    assert_eq!(equiv.status.code(), Some(0));
}

#[test]
fn dac_then_fmin() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("dac.json");
    let out = softac(&["dac", "fig5a", "--order", "2,1", "-o", path(&out_file)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"]["dac"], json!(true));
    assert_eq!(r["counters"]["ext_calls"].as_u64().unwrap() + r["counters"]["proj_calls"].as_u64().unwrap(), 4);

    let fmin = softac(&["fmin", path(&out_file)]);
    assert_eq!(fmin.status.code(), Some(0));
    assert_eq!(report(&fmin)["results"]["f_min"], json!(1));
    assert_eq!(softac(&["check-dac", path(&out_file), "--order", "2,1"]).status.code(), Some(0));
    assert_eq!(softac(&["check-dac", "fig5a", "--order", "2,1"]).status.code(), Some(1));
}

#[test]
fn single_step_trace() {
    let dir = tempfile::tempdir().unwrap();
    let step1 = dir.path().join("step1.toml");
    let step2 = dir.path().join("step2.toml");
    let out = softac(&["proj", "fig1a", "--scope", "1,2", "--var", "1", "--value", "b", "-o", path(&step1)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["moved"], json!(1));
    assert_eq!(softac(&["equiv", path(&step1), "fig1b"]).status.code(), Some(0));

    let out = softac(&["proj", path(&step1), "--scope", "1,2", "--var", "2", "--value", "a", "-o", path(&step2), "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["moved"], json!("inf"));
    assert_eq!(softac(&["equiv", path(&step2), "fig1a", "--verify"]).status.code(), Some(0));

    let back = softac(&["ext", path(&step1), "--var", "1", "--value", "b", "--scope", "1,2"]);
    assert_eq!(back.status.code(), Some(0));
    let r = report(&back);
    assert_eq!(r["witnesses"]["move"], json!("ext(1,b, c(1,2))"));
}

#[test]
fn equiv_detects_differences() {
    let out = softac(&["equiv", "fig1a", "fig5a"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["results"]["equivalent"], json!(false));
    assert_eq!(softac(&["equiv", "fig1a", "fig2a"]).status.code(), Some(2));
}

#[test]
fn solve_tree_and_optimum() {
    let out = softac(&["solve-tree", "fig5a", "--root", "2", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"]["optimum"], json!(1));
    assert_eq!(r["witnesses"]["assignment"], json!({"1": "b", "2": "a"}));
    let out = softac(&["optimum", "fig5a"]);
    let r = report(&out);
    assert_eq!(r["witnesses"]["assignment"], json!({"1": "a", "2": "b"}));
    assert_eq!(r["counters"]["enumerated"], json!(4));
    assert_eq!(softac(&["optimum", "fig5a", "--cap", "3"]).status.code(), Some(2));
    assert_eq!(softac(&["solve-tree", "fig2a", "--root", "0"]).status.code(), Some(0));
}

#[test]
fn irreducibility_and_closures() {
    let out = softac(&["irreducible", "fig5a", "--depth", "2", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let moves = &report(&out)["witnesses"]["improving"];
    assert!(moves.as_array().unwrap().iter().any(|m| m["moves"] == json!(["ext(1,a, c(1,2))", "proj(c(1,2), 2,b)"])));
    assert_eq!(softac(&["irreducible", "fig5a"]).status.code(), Some(2));

    let out = softac(&["closures", "fig4", "--budget", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"]["min_f_min"], json!(0));
    assert_eq!(r["results"]["max_f_min"], json!(1));
}

#[test]
fn strict_path_and_structures() {
    let out = softac(&["sac-strict", "fig1a", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["counters"]["proj_calls"], json!(4));
    assert_eq!(r["counters"]["delta_storage"], json!(8));

    let out = softac(&["verify-structure", "--structure", "financial-life(3,3)"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["results"]["fair"], json!(false));
    assert_eq!(r["witnesses"]["fairness"], json!(["(0,1)", "(3,0)"]));
    let out = softac(&["verify-structure", "--structure", "weighted", "--sampled", "500", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(softac(&["verify-structure", "--structure", "bounded-sum(5)"]).status.code(), Some(0));
    assert_eq!(softac(&["verify-structure", "--structure", "nonsense"]).status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical() {
    for args in [
        &["gac", "fig2a"][..],
        &["sac-strict", "fig2a"],
        &["dac", "fig5a", "--order", "1,2"],
        &["closures", "fig4"],
        &["irreducible", "fig2a", "--seed", "9"],
        &["verify-structure", "--structure", "ordered-max(3)", "--sampled", "50", "--seed", "1"],
    ] {
        let a = softac(args);
        let b = softac(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn emitted_problems_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (k, args) in [&["gac", "fig2a"][..], &["sac-strict", "fig2a"], &["check", "fig4"]].iter().enumerate() {
        let r = report(&softac(args));
        let file = dir.path().join(format!("p{k}.json"));
        std::fs::write(&file, serde_json::to_string(&r["problem"]).unwrap()).unwrap();
        let again = report(&softac(&["check", path(&file)]));
        assert_eq!(again["problem"], r["problem"], "{args:?}");
    }
}

#[test]
fn bad_files_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("dup.toml");
    std::fs::write(
        &file,
        "structure = { kind = \"weighted\" }\n\
         variables = [{ name = \"x\", domain = [\"a\"] }, { name = \"y\", domain = [\"a\"] }]\n\
         constraints = [{ scope = [\"x\", \"y\"] }, { scope = [\"x\", \"y\"], default = 2 }]\n",
    )
    .unwrap();
    let out = softac(&["check", path(&file)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("constraints[1]") && err.contains("(x,y)"), "{err}");
    assert!(out.stdout.is_empty());
}
