use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn rsld(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsld")).args(args).env_remove("RSLD_SEED").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn program_file(text: &str) -> tempfile::NamedTempFile {
    let f = tempfile::Builder::new().suffix(".lp").tempfile().unwrap();
    std::fs::write(f.path(), text).unwrap();
    f
}

fn check_trace_shape(v: &Value) {
    for key in ["initial", "mode", "rule", "status", "steps"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for (i, s) in v["steps"].as_array().unwrap().iter().enumerate() {
        assert_eq!(s["index"].as_u64(), Some(i as u64));
        // The last stage has no outgoing step.
        if !s["selected"].is_null() {
            assert!(s["selected"].as_str().unwrap().contains('['));
            assert!(s["clause"].as_str().unwrap().starts_with('c'));
            assert!(s["mgu"].is_object());
        }
        assert!(s["resolvent"].is_array());
        assert!(s["resultant"]["instance"].is_array() && s["resultant"]["reduced"].is_array());
        let r = &s["reduction"];
        assert!(r.is_null() || (r["tau"].is_object() && r["eliminated"].is_array() && r["advanced"].is_array()));
    }
}

#[test]
fn doubling_run_matches_golden_trace() {
    let p = data("doubling.lp");
    let o = rsld(&["run", "--program", p.to_str().unwrap(), "--goal", "q, p(x,x)", "--mode", "rsld", "--rule", "odd-even", "--max-steps", "50", "--trace", "json"]);
    assert_eq!(code(&o), 2);
    let got: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let want: Value = serde_json::from_str(&std::fs::read_to_string(data("doubling.golden.json")).unwrap()).unwrap();
    check_trace_shape(&got);
    assert_eq!(got, want);
}

#[test]
fn exit_codes() {
    let refute = program_file("a. b <- a.");
    let fail = program_file("a <- b. b <- c.");
    let looping = data("selfloop.lp");
    let rp = refute.path().to_str().unwrap();
    assert_eq!(code(&rsld(&["run", "--program", rp, "--goal", "b, a"])), 0);
    assert_eq!(code(&rsld(&["run", "--program", fail.path().to_str().unwrap(), "--goal", "a"])), 1);
    let lp = looping.to_str().unwrap();
    assert_eq!(code(&rsld(&["run", "--program", lp, "--goal", "p", "--max-steps", "5"])), 2);
    let o = rsld(&["run", "--program", lp, "--goal", "p", "--mode", "sld", "--loop-check", "evrl"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("(0, 1)"));
    assert_eq!(code(&rsld(&["run", "--program", lp])), 64);
    assert_eq!(code(&rsld(&["run", "--program", "/nonexistent.lp", "--goal", "p"])), 64);
    assert_eq!(code(&rsld(&["run", "--program", lp, "--goal", "p(", "--mode", "sld"])), 64);
    assert_eq!(code(&rsld(&["run", "--program", lp, "--goal", "p", "--mode", "psld", "--rule", "odd-even"])), 64);
    assert_eq!(code(&rsld(&["--help"])), 0);
}

#[test]
fn center_check_fails_with_counterexample() {
    let o = rsld(&["check", "spec-independence", "--rule", "center", "--seed", "7", "--trials", "100", "--json"]);
    assert_eq!(code(&o), 4);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let f = &v["failures"][0];
    assert!(f["seed"].is_u64() && f["instance"].is_object(), "{v}");
}

#[test]
fn stack_check_passes() {
    let o = rsld(&["check", "spec-independence", "--rule", "stack", "--trials", "100"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn seed_from_environment() {
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_rsld"))
            .args(["check", "spec-independence", "--rule", "center", "--trials", "40", "--json"])
            .env("RSLD_SEED", seed)
            .output()
            .unwrap()
    };
    let a: Value = serde_json::from_str(&stdout(&run("11"))).unwrap();
    assert_eq!(a["failures"][0]["seed"].as_u64(), Some(11));
}

#[test]
fn tree_and_dot_export() {
    let p = data("doubling.lp");
    let dot = tempfile::Builder::new().suffix(".dot").tempfile().unwrap();
    let o = rsld(&["tree", "--program", p.to_str().unwrap(), "--goal", "q, p(x,x)", "--mode", "sld", "--rule", "odd-even", "--depth", "10", "--dot", dot.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("finite: true"));
    let text = std::fs::read_to_string(dot.path()).unwrap();
    assert!(text.starts_with("digraph"));
}

#[test]
fn reduce_command() {
    let o = rsld(&["reduce", "--goal", "p(x), p(a), q(y)"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("p(a), q(y)"), "{}", stdout(&o));
    let o = rsld(&["reduce", "--goal", "p(x), p(a)", "--protect", "x"]);
    assert!(stdout(&o).contains("p(x), p(a)"), "{}", stdout(&o));
}
