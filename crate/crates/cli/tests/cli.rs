use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diaglogic")).args(args).output().expect("spawn diaglogic")
}

fn c(rel: &str) -> String {
    corpus(rel).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["validate", &c("graph.sk")]).status.code(), Some(0));
    assert_eq!(run(&["check-real", &c("magma.sk"), &c("magma_bad.sk")]).status.code(), Some(1));
    assert_eq!(run(&["validate", &c("no_such_file.sk")]).status.code(), Some(2));
    let o = run(&["break", &c("mp_theory.sk"), "--plan", "pi1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("projection"));
}

#[test]
fn violation_names_a_witness() {
    let o = run(&["check-real", &c("magma.sk"), &c("magma_bad.sk")]);
    let text = stdout(&o);
    assert!(text.contains("spec and3: violation"), "{text}");
    assert!(text.contains("witness: (1,1)"), "{text}");
}

#[test]
fn break_writes_the_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["break", &c("mp_theory.sk"), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["mp_theory_sp.sk", "mp_theory_sigma.sk", "mp_theory_cycles.txt"] {
        let got = std::fs::read_to_string(dir.path().join(f)).unwrap();
        let want = std::fs::read_to_string(corpus(&format!("golden/{f}"))).unwrap();
        assert_eq!(got, want, "{f}");
    }
    assert!(stdout(&o).contains("localiser mp_theory_sigma: ok"));
}

#[test]
fn saturate_modus_ponens() {
    let o = run(&["saturate", &c("mp.sk"), "--rules", "MP"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("status fixpoint after 1 round(s)"), "{text}");
    assert!(text.contains("Theo=3"), "{text}");
}

#[test]
fn saturate_json_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.json");
    let o = run(&["--format", "json", "saturate", &c("mp.sk"), "--rules", "MP", "--trace", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["status"], "fixpoint");
    assert_eq!(j["rounds"], 1);
    let t: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(trace).unwrap()).unwrap();
    assert_eq!(t["rounds"].as_array().unwrap().len(), 2);
}

#[test]
fn saturate_capped() {
    let o = run(&["saturate", &c("mp.sk"), "--rules", "IM,MP", "--max-rounds", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("status capped after 2 round(s)"));
}

#[test]
fn saturate_closed_spec_takes_no_rounds() {
    let dir = tempfile::tempdir().unwrap();
    let closed = dir.path().join("closed.sk");
    let o = run(&["saturate", &c("mp.sk"), "--rules", "MP", "--out", closed.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let again = run(&["saturate", closed.to_str().unwrap(), "--rules", "MP"]);
    assert!(stdout(&again).starts_with("status fixpoint after 0 round(s)"), "{}", stdout(&again));
}

#[test]
fn apply_and_prove() {
    let o = run(&["apply", &c("mp.sk"), "MP", "mp_t1=tp", "mp_t2=tipq"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("fire MP at"));
    let o = run(&["prove", &c("mp.sk"), &c("mp_proof.txt")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("step 1: MP"));
}

#[test]
fn yoneda_representables() {
    let o = run(&["yoneda", "mp_theory_sp", "For"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("For=1"));
    assert!(stdout(&o).contains("Theo=0"));
    assert_eq!(run(&["yoneda", "mp_theory", "For"]).status.code(), Some(2));
}

#[test]
fn transport_forget() {
    let o = run(&[
        "--lib",
        &c("bank/logics.sk"),
        "transport",
        &c("bank/morphisms.sk"),
        &c("bank/account.sk"),
        "--morphism",
        "forget",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("act dom(balance) = void"), "{text}");
    assert!(text.contains("act cod(deposit) = void"), "{text}");
}
