mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::*;
use diaglogic::dsl::chase_result_json;
use diaglogic::engine::{saturate_presentation, unsatisfied_matches, ChaseStatus};
use diaglogic::{
    apply_rule, check_realization, extend_to_theory, is_isomorphic, is_theory, match_rule, saturate, ChaseConfig,
    EngineError, Fraction, ObjectId, Realization, Rule,
};

fn theorems(r: &Realization) -> BTreeSet<String> {
    r.action("inc").unwrap().pairs().map(|(_, y)| y.to_owned()).collect()
}

fn only(rules: &[&str]) -> ChaseConfig {
    ChaseConfig { rule_subset: Some(rules.iter().map(|s| s.to_string()).collect()), ..ChaseConfig::default() }
}

fn sizes(r: &Realization, objs: &[&str]) -> Vec<usize> {
    objs.iter().map(|o| r.size(o)).collect()
}

#[test]
fn rule_shapes() {
    let rules = mp_rules();
    let ids: Vec<&str> = rules.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids, ["IM", "MP"]);
    let im = &rules[0];
    assert_eq!(sizes(&im.hypothesis, &["For", "H_IM", "C_IM"]), [2, 4, 2]);
    assert_eq!(sizes(&im.conclusion, &["For", "H_IM", "C_IM"]), [1, 1, 1]);
    assert_eq!(sizes(&im.glue, &["For", "H_IM", "C_IM", "H_IM_part_c_IM"]), [3, 9, 3, 1]);
    assert!(check_realization(&im.glue).is_empty());
}

#[test]
fn modus_ponens_closes_the_example() {
    let rules = mp_rules();
    let res = saturate_presentation(&mp_spec(), &rules, &only(&["MP"])).unwrap();
    assert_eq!(res.status, ChaseStatus::Fixpoint);
    assert_eq!(res.rounds, 1);
    assert_eq!(theorems(&res.result), ["ipq", "p", "q"].map(String::from).into());
    assert!(check_realization(&res.result).is_empty());
    let firings: Vec<_> = res.trace.firings().collect();
    assert_eq!(firings.len(), 1);
    assert_eq!(firings[0].rule, "MP");

    let j = chase_result_json(&res);
    assert_eq!(j["status"], "fixpoint");
    assert_eq!(j["rounds"], 1);
    assert_eq!(j["trace"]["rounds"].as_array().unwrap().len(), 2);
    assert_eq!(j["trace"]["rounds"][1]["firings"][0]["rule"], "MP");
}

#[test]
fn closed_spec_is_a_fixpoint_at_round_zero() {
    let rules = mp_rules();
    let cfg = only(&["MP"]);
    let once = saturate_presentation(&mp_spec(), &rules, &cfg).unwrap().result;
    let sub: Vec<Rule> = rules.iter().filter(|r| r.id == "MP").cloned().collect();
    assert!(is_theory(&once, &sub));
    let again = saturate(&once, &rules, &cfg).unwrap();
    assert_eq!((again.status, again.rounds), (ChaseStatus::Fixpoint, 0));
    assert!(is_isomorphic(&once, &again.result).unwrap().is_some());

    let start = repaired(&mp_spec(), &rules);
    assert!(!is_theory(&start, &sub));
}

#[test]
fn implication_rule_never_closes() {
    let rules = mp_rules();
    let res = saturate_presentation(&mp_spec(), &rules, &ChaseConfig { max_rounds: 2, ..only(&["IM", "MP"]) }).unwrap();
    assert_eq!(res.status, ChaseStatus::Capped);
    let counts: Vec<usize> = res.trace.rounds.iter().map(|r| r.sizes[&ObjectId::from("For")]).collect();
    assert_eq!(counts, [3, 11, 123]);
}

#[test]
fn element_limit_is_an_error() {
    let rules = mp_rules();
    let cfg = ChaseConfig { max_rounds: 3, max_elements: 5_000, ..only(&["IM"]) };
    let err = saturate_presentation(&mp_spec(), &rules, &cfg).unwrap_err();
    assert!(matches!(err, EngineError::ElementLimit(5_000)));
}

#[test]
fn one_step_is_a_fraction() {
    let rules = mp_rules();
    let s = repaired(&mp_spec(), &rules);
    let mp = &rules[1];
    let m = match_rule(mp, &s).into_iter().find(|m| !m.satisfied).unwrap();
    let (next, step) = apply_rule(&s, mp, &m, &ChaseConfig::default()).unwrap();
    assert_eq!(theorems(&next), ["ipq", "p", "q"].map(String::from).into());
    let cfg = only(&["MP"]);
    let iso = step.verify(&rules, &cfg).unwrap();
    assert!(iso.is_iso());

    let again = match_rule(mp, &next).into_iter().find(|x| x.element == m.element).unwrap();
    assert!(matches!(apply_rule(&next, mp, &again, &cfg), Err(EngineError::RedundantStep { .. })));
}

#[test]
fn composed_proof_matches_saturation() {
    let (_, rules) = relations();
    let (env, _) = load_all(&["relations.sk", "golden/relations_sp.sk"]);
    let p = spec(&load("relations_spec.sk", &env), "chain");
    let cfg = ChaseConfig::default();
    let mut s = repaired(&p, &rules);
    let mut proof = Fraction::identity(s.clone());
    let mut steps = 0;
    loop {
        let pending: Vec<_> =
            rules.iter().flat_map(|r| unsatisfied_matches(r, &s).into_iter().map(move |m| (r, m))).collect();
        let Some((r, m)) = pending.into_iter().next() else { break };
        let (next, step) = apply_rule(&s, r, &m, &cfg).unwrap();
        proof = proof.compose(&step, &rules, &cfg).unwrap();
        s = next;
        steps += 1;
    }
    assert!(steps > 2);
    assert!(is_theory(&s, &rules));
    let full = saturate_presentation(&p, &rules, &cfg).unwrap();
    assert!(is_isomorphic(&s, &full.result).unwrap().is_some());
    assert!(proof.verify(&rules, &cfg).unwrap().is_iso());
    assert_eq!(full.result.size("E"), 9);
}

#[test]
fn saturated_relation_extends_to_a_theory() {
    let (loc, rules) = relations();
    let (env, _) = load_all(&["relations.sk", "golden/relations_sp.sk"]);
    let p = spec(&load("relations_spec.sk", &env), "chain");
    let res = saturate_presentation(&p, &rules, &ChaseConfig::default()).unwrap();
    let t = extend_to_theory(&loc, &res.result).unwrap();
    assert_eq!(t.over.name, "relations");
    assert!(check_realization(&t).is_empty());
}

#[test]
fn rule_order_does_not_matter_on_the_chain() {
    let (_, rules) = relations();
    let (env, _) = load_all(&["relations.sk", "golden/relations_sp.sk"]);
    let p = spec(&load("relations_spec.sk", &env), "chain");
    let a = saturate_presentation(&p, &rules, &only(&["comp", "conv"])).unwrap();
    let b = saturate_presentation(&p, &rules, &only(&["conv", "comp"])).unwrap();
    assert!(is_isomorphic(&a.result, &b.result).unwrap().is_some());
    let reversed: Vec<Rule> = rules.iter().rev().cloned().collect();
    let c = saturate_presentation(&p, &reversed, &ChaseConfig::default()).unwrap();
    assert!(is_isomorphic(&a.result, &c.result).unwrap().is_some());
}

#[test]
fn traces_are_reproducible() {
    let rules = mp_rules();
    let cfg = ChaseConfig { max_rounds: 2, ..ChaseConfig::default() };
    let a = saturate_presentation(&mp_spec(), &rules, &cfg).unwrap();
    let b = saturate_presentation(&mp_spec(), &rules, &cfg).unwrap();
    assert_eq!(a.trace.to_text(), b.trace.to_text());
    assert_eq!(serde_json::to_string(&a.trace).unwrap(), serde_json::to_string(&b.trace).unwrap());
}

#[test]
fn embedding_is_a_morphism() {
    let rules = mp_rules();
    let s = repaired(&mp_spec(), &rules);
    let res = saturate(&s, &rules, &only(&["MP"])).unwrap();
    let e = res.embedding_morphism(Arc::clone(&s)).unwrap();
    assert!(diaglogic::check_morphism(&e).unwrap().is_empty());
    assert!(e.is_injective());
}

#[test]
fn cone_completion_respects_the_element_limit() {
    let (_, loaded) = load_all(&["magma.sk", "magma_bad.sk"]);
    let p = spec(&loaded[1], "and3");
    let cfg = ChaseConfig { rule_subset: Some(Vec::new()), max_elements: 1_000, ..ChaseConfig::default() };
    let err = saturate_presentation(&p, &[], &cfg).unwrap_err();
    assert!(matches!(err, EngineError::ElementLimit(1_000)));
}
