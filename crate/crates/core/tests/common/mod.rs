#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use diaglogic::dsl::{Env, SourceFile};
use diaglogic::engine::saturate_presentation;
use diaglogic::{break_cycles, rules_of, ChaseConfig, Localiser, Presentation, Realization, Rule, Sketch};

pub fn corpus(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel)
}

pub fn load(rel: &str, env: &Env) -> SourceFile {
    SourceFile::load(corpus(rel), env).unwrap_or_else(|e| panic!("{e}"))
}

/// Loads files in order, each seeing the sketches of the previous ones.
pub fn load_all(rels: &[&str]) -> (Env, Vec<SourceFile>) {
    let mut env = Env::default();
    let mut files = Vec::new();
    for r in rels {
        let f = load(r, &env);
        env.extend(f.iter());
        files.push(f);
    }
    (env, files)
}

pub fn spec(file: &SourceFile, name: &str) -> Presentation {
    file.specs().find(|p| p.name == name).cloned().unwrap_or_else(|| panic!("no spec {name}"))
}

pub fn mp_localiser() -> Localiser {
    let (env, _) = load_all(&[]);
    let th = env.get("mp_theory").unwrap();
    break_cycles(&th, None).unwrap().1
}

pub fn mp_rules() -> Vec<Rule> {
    rules_of(&mp_localiser(), &ChaseConfig::default()).unwrap()
}

pub fn mp_spec() -> Presentation {
    let f = load("mp.sk", &Env::default());
    spec(&f, "mp")
}

pub fn relations() -> (Localiser, Vec<Rule>) {
    let (env, _) = load_all(&["relations.sk"]);
    let th = env.get("relations").unwrap();
    let (_, loc) = break_cycles(&th, Some(&["comp".into(), "conv".into()])).unwrap();
    let rules = rules_of(&loc, &ChaseConfig::default()).unwrap();
    (loc, rules)
}

/// Cone repair only: the presentation as a realization.
pub fn repaired(p: &Presentation, rules: &[Rule]) -> Arc<Realization> {
    let cfg = ChaseConfig { rule_subset: Some(Vec::new()), ..ChaseConfig::default() };
    saturate_presentation(p, rules, &cfg).unwrap().result
}

pub fn sketch_of(env: &Env, name: &str) -> Arc<Sketch> {
    env.get(name).unwrap_or_else(|| panic!("no sketch {name}"))
}

/// Every corpus file, in an order where each file's references resolve.
pub const CORPUS: [&str; 13] = [
    "graph.sk",
    "magma.sk",
    "mp_theory.sk",
    "graph_specs.sk",
    "magma_and.sk",
    "magma_bad.sk",
    "mp.sk",
    "relations.sk",
    "golden/relations_sp.sk",
    "golden/relations_sigma.sk",
    "relations_spec.sk",
    "bank/logics.sk",
    "bank/morphisms.sk",
];

/// (source, line, column) of the first reported error.
pub const ERROR_CASES: [(&str, usize, usize); 12] = [
    ("sketch g {\n  object V\n  arrow s : E -> V\n}", 3, 13),
    ("sketch g {\n  object V\n  arrow s V -> V\n}", 3, 11),
    ("sketch g {\n  objekt V\n}", 2, 3),
    ("sketch g {\n  object V\n  object V\n}", 3, 10),
    ("sketch g {\n  object V\n", 3, 1),
    ("sketch g {\n  object V$\n}", 2, 11),
    ("spec s over nope {\n}", 1, 13),
    ("spec s over graph {\n  elem e : E\n  act s(e) = v\n}", 3, 14),
    ("morphism m : graph -> graph {\n  arr s => u\n}", 2, 12),
    ("config c {\n  max_rounds zero\n}", 2, 14),
    ("sketch g {\n  object \u{3a9}\n  arrow f : \u{3a9} -> X\n}", 3, 18),
    (
        "sketch m {\n  object M\n  arrow s : M -> M\n  cone M {\n    base\n      s -> t : s\n    ;\n    proj s\n  }\n}",
        6,
        12,
    ),
];

pub fn without_comments(text: &str) -> String {
    text.lines().filter(|l| !l.trim_start().starts_with("//")).map(|l| format!("{l}\n")).collect()
}
