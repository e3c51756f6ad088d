use std::process::{Command, Output};

use serde_json::Value;

fn eqkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eqkit"))
        .args(args)
        .current_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
        .env_remove("EQ_SEED")
        .output()
        .unwrap()
}

fn code(args: &[&str]) -> i32 {
    eqkit(args).status.code().expect("terminated by a signal")
}

fn json(args: &[&str]) -> Value {
    let out = eqkit(args);
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", String::from_utf8_lossy(&out.stderr)))
}

#[test]
fn exhaustive_law_sweeps_pass() {
    assert_eq!(code(&["laws", "--system", "atomicity", "--exhaustive"]), 0);
    assert_eq!(code(&["laws", "--system", "crit", "--exhaustive"]), 0);
    let v = json(&["laws", "--system", "atomicity-crit", "--exhaustive", "--json"]);
    assert!(v["laws"].as_array().unwrap().iter().all(|l| l["failures"].as_array().unwrap().is_empty()));
}

#[test]
fn sampled_sweeps_are_reproducible() {
    let args = ["laws", "--system", "lockset", "--samples", "1000", "--seed", "7", "--json"];
    let (a, b) = (eqkit(&args), eqkit(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let from_env = Command::new(env!("CARGO_BIN_EXE_eqkit"))
        .args(&args[..5])
        .arg("--json")
        .env("EQ_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(from_env.stdout, a.stdout);
}

#[test]
fn failing_laws_exit_with_two() {
    assert_eq!(code(&["laws", "--system", "deadlock", "--samples", "1000"]), 2);
}

#[test]
fn star_tables() {
    let v = json(&["star", "--system", "atomicity", "--json"]);
    assert_eq!(v["star"]["A"], "TOP");
    for x in ["B", "L", "R", "TOP"] {
        assert_eq!(v["star"][x], x);
    }
    let v = json(&["star", "--system", "crit", "--json"]);
    assert!(v["star"]["locking"].is_null());
    assert_eq!(v["star"]["entrant"], "entrant");
    let v = json(&["star", "--system", "lift", "--alphabet", "a,b", "--json"]);
    for (k, s) in v["star"].as_object().unwrap() {
        assert_eq!(s, k);
    }
}

#[test]
fn star_needs_an_enumerator_or_an_operator() {
    assert_eq!(code(&["star", "--system", "regex"]), 0);
    assert_eq!(code(&["laws", "--system", "regex", "--exhaustive"]), 1);
}

#[test]
fn check_atomic_read() {
    let v = json(&["check", "--system", "lockatom", "--json", "programs/atomic_read.eq"]);
    assert_eq!(v["effect"], "(∅,∅)⊗B");
    assert_eq!(v["latent"], "(∅,∅)⊗A");
}

#[test]
fn run_two_events() {
    let v = json(&["run", "--system", "history", "--json", "programs/ev2.eq"]);
    assert_eq!(v["status"], "value");
    assert_eq!(v["safety"], "pass");
    assert_eq!(v["interpretation"], "pass");
    assert_eq!(v["dynamic_effect"], "{ab}");
}

#[test]
fn audited_loop_runs_clean() {
    let v = json(&["run", "--system", "lockatom", "--audit", "--json", "programs/counter.eq"]);
    assert_eq!(v["safety"], "pass");
    assert_eq!(v["audit"], "pass");
}

#[test]
fn translation_round_trips_through_the_checker() {
    let v = json(&["translate", "--json", "programs/skalka.lt"]);
    assert_eq!(v["type"], "unit");
    let term = v["term"].as_str().unwrap();
    let c = json(&["check", "--system", "history", "--json", "-e", term]);
    assert_eq!(c["type"], "unit");
    assert_eq!(c["effect"].as_str().unwrap(), format!("{{{}}}", v["history"].as_str().unwrap()));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["laws", "--system", "nonsense"]), 1);
    assert_eq!(code(&["check", "--system", "history", "-e", "(ev a"]), 1);
    assert_eq!(code(&["check", "--system", "lockatom", "programs/missing.eq"]), 1);
    assert_eq!(code(&["check", "--system", "crit", "programs/double_enter.eq"]), 2);
    assert_eq!(code(&["run", "--system", "crit", "programs/double_enter.eq"]), 2);
    assert_eq!(code(&["run", "--system", "lockatom", "--unchecked", "-e", "(let (l (new_lock unit)) (seq (acquire l) (acquire l)))"]), 3);
    assert_eq!(code(&["run", "--system", "lockatom-faulty", "-e", "(let (l (new_lock unit)) (release l))"]), 3);
    assert_eq!(code(&["translate", "-e", "(mu f unit)"]), 1);
    assert_eq!(code(&["translate", "-e", "(if unit (ev a) (ev b))"]), 2);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn malformed_input_never_panics() {
    let inputs = ["", ")", "(((", "(lam)", "(app)", "(tyapp x)", "[I;", "(if true)", "(lam (x (pi)) x)", "(ev a b c)", "(let x)", "(S)"];
    for src in inputs {
        for sys in ["lockatom", "history", "crit", "atomicity"] {
            let c = code(&["run", "--system", sys, "-e", src]);
            assert!(c == 1 || c == 2, "{sys} {src:?} exited {c}");
        }
        let c = code(&["translate", "-e", src]);
        assert!(c == 1 || c == 2, "translate {src:?} exited {c}");
    }
}
