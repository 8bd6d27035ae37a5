use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(name).display().to_string()
}

fn causa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_causa")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = args.to_vec();
    all.extend(["--format", "structured"]);
    let o = causa(&all);
    (serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(&o))), o.status.code().unwrap())
}

#[test]
fn trumping_fails_an_asserted_check() {
    let f = fixture("trumping.scm");
    let o = causa(&["check", &f, "Def2", "S=1 causes C=1", "--assert"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("does not cause"));
    // Without --assert a negative verdict is still a successful run.
    assert_eq!(causa(&["check", &f, "Def2", "S=1 causes C=1"]).status.code(), Some(0));
}

#[test]
fn late_preemption_reports_its_evidence() {
    let (doc, code) = json(&["check", &fixture("lp.scm"), "Def2", "ST=1 causes BS=1", "--assert"]);
    assert_eq!(code, 0);
    assert_eq!(doc["tool_version"], concat!("causa ", env!("CARGO_PKG_VERSION")));
    assert_eq!(doc["model_hash"].as_str().unwrap().len(), 64);
    let q = &doc["queries"][0];
    assert_eq!(q["definition"], "Def2");
    assert_eq!(q["is_cause"], true);
    assert_eq!(q["network"]["SH"], "1");
    assert_eq!(q["contrast"]["ST"], "0");
    assert!(q["witness"].is_object());
    assert!(!q["citations"].as_array().unwrap().is_empty());
}

#[test]
fn text_and_structured_output_agree() {
    let f = fixture("lp.scm");
    let text = stdout(&causa(&["check", &f]));
    let (doc, _) = json(&["check", &f]);
    let queries = doc["queries"].as_array().unwrap();
    assert_eq!(queries.len(), 2);
    for q in queries {
        let cause: Vec<String> = q["cause"].as_object().unwrap().iter().map(|(k, v)| format!("{k}={}", v.as_str().unwrap())).collect();
        let verb = if q["is_cause"].as_bool().unwrap() { "causes" } else { "does not cause" };
        let line = format!("{}: {} {verb} {}", q["definition"].as_str().unwrap(), cause.join(", "), q["effect"].as_str().unwrap());
        assert!(text.contains(&line), "{line} not in\n{text}");
    }
}

#[test]
fn named_queries_and_contexts() {
    let f = fixture("lp.scm");
    let (doc, code) = json(&["check", &f, "--query", "billy", "--assert"]);
    assert_eq!(code, 0);
    assert_eq!(doc["queries"][0]["definition"], "Def4");
    assert_eq!(causa(&["check", &f, "--query", "nope"]).status.code(), Some(2));
    assert_eq!(causa(&["check", &f, "--context", "nope"]).status.code(), Some(2));
    assert_eq!(causa(&["check", &f, "Def99", "ST=1 causes BS=1"]).status.code(), Some(2));
    assert_eq!(causa(&["check", &f, "Def2", "ST=1 makes BS=1"]).status.code(), Some(2));
}

#[test]
fn malformed_files_exit_2_with_spans() {
    let dir = std::env::temp_dir().join(format!("causa-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.scm");
    std::fs::write(&path, "var Y : {0,1}\nY := X\n").unwrap();
    let o = causa(&["parse", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.scm:2:6"), "{err}");
    assert_eq!(causa(&["parse", "/no/such/file.scm"]).status.code(), Some(2));
    assert_eq!(causa(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn parse_prints_the_canonical_form() {
    let o = causa(&["parse", &fixture("switch.scm")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("context"));
}

#[test]
fn voting_causes() {
    let f = fixture("voting.scm");
    let (doc, code) = json(&["causes", &f, "O=1", "--def", "ModifiedHP", "--parts"]);
    assert_eq!(code, 0);
    assert_eq!(doc["causes"], serde_json::json!(["A1=1", "A2=1", "A3=0", "A4=0", "A5=0"]));
    // Under the literal Def2 every vote is a size-1 cause; A1 and A2 are
    // among them.
    let (doc, _) = json(&["causes", &f, "O=1", "--def", "Def2", "--max-size", "1"]);
    let found: Vec<&str> = doc["causes"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(found.contains(&"A1=1") && found.contains(&"A2=1"));
    assert!(doc["queries"].as_array().unwrap().iter().all(|q| q["is_cause"] == true));
}

#[test]
fn constant_effects_have_no_causes() {
    let dir = std::env::temp_dir().join(format!("causa-cli-const-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("const.scm");
    std::fs::write(&path, "exo U : {0,1}\nvar X : {0,1}\nvar Y : {0,1}\nX := U\nY := 1\ncontext c { U=1 }\n").unwrap();
    let (doc, code) = json(&["causes", path.to_str().unwrap(), "Y=1"]);
    assert_eq!(code, 0);
    assert_eq!(doc["causes"], serde_json::json!([]));
}

#[test]
fn sufficiency_queries() {
    let lp = fixture("lp.scm");
    let (doc, code) = json(&["suffices", &lp, "direct", "SH=1", "BS=1", "--assert"]);
    assert_eq!((doc["sufficiency"][0]["holds"].as_bool(), code), (Some(true), 0));
    let (doc, code) = json(&["suffices", &lp, "direct", "ST=1", "BS=1", "--assert"]);
    assert_eq!((doc["sufficiency"][0]["holds"].as_bool(), code), (Some(false), 1));
    let (doc, _) = json(&["suffices", &fixture("switch.scm"), "strong", "F=0", "A=1"]);
    let s = &doc["sufficiency"][0];
    assert_eq!(s["holds"], true);
    let vars: Vec<&String> = s["network"].as_object().unwrap().keys().collect();
    assert_eq!(vars, ["A", "T"]);
    assert_eq!(causa(&["suffices", &lp, "sideways", "SH=1", "BS=1"]).status.code(), Some(2));
    assert_eq!(causa(&["suffices", &lp, "actual-weak", "BT=1", "BS=1", "--assert"]).status.code(), Some(0));
}

#[test]
fn corpus_exit_code_follows_the_asserted_checks() {
    let (doc, code) = json(&["corpus", "prisoner"]);
    assert_eq!(code, 0);
    assert!(doc["corpus"]["checks"].as_array().unwrap().iter().all(|c| c["outcome"] == "pass"));
    // The full corpus includes the voting rows the definition as written
    // disagrees with.
    let o = causa(&["corpus"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let failing: Vec<&str> = text.lines().filter(|l| l.starts_with("[FAIL]")).collect();
    assert_eq!(failing.len(), 2, "{failing:?}");
    assert!(failing.iter().all(|l| l.contains("voting: Def2")));
}

#[test]
fn fuzz_is_clean_and_reports_its_seed() {
    let o = causa(&["fuzz", "--quick", "--samples", "500", "--groups", "equivalence,implication"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert!(out.starts_with("seed: 0"));
    assert!(out.contains("counterexample coverage: 100%"), "{out}");
    // Coverage is reported, not asserted: a small sample may leave a pair
    // unseparated without failing the run.
    let o = causa(&["fuzz", "--quick", "--samples", "10", "--groups", "equivalence", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("seed: 5"));
}

#[test]
fn a_mutated_definition_is_caught_with_a_small_counterexample() {
    let dir = std::env::temp_dir().join(format!("causa-cli-fuzz-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let ce = dir.join("ce.scm");
    let o = causa(&["fuzz", "--quick", "--samples", "50", "--groups", "structural", "--mutate", "skip-minimality:Def8", "--counterexample", ce.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("minimized counterexample"));
    let src = std::fs::read_to_string(&ce).unwrap();
    assert!(src.starts_with("# minimal-singleton"));
    // The written model parses and its context is usable.
    let o = causa(&["parse", ce.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}
