use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Decl, Env, NamedConfig, ParseError};
use crate::engine::{ChaseConfig, ChaseResult, ChaseStatus, Trace};
use crate::ids::{ArrowId, ObjectId};
use crate::localizer::SketchMorphism;
use crate::realization::{Presentation, Realization};
use crate::sketch::{Path, Sketch};

/// The JSON mirror of a declaration. Field names are part of the file
/// format; see the README.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DeclJson {
    Sketch(Sketch),
    Spec(SpecJson),
    Morphism(MorphismJson),
    Config(ConfigJson),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecJson {
    pub name: String,
    pub over: String,
    pub elements: BTreeMap<ObjectId, Vec<String>>,
    #[serde(default)]
    pub actions: BTreeMap<ArrowId, BTreeMap<String, String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismJson {
    pub name: String,
    pub src: String,
    pub tgt: String,
    pub objects: BTreeMap<ObjectId, ObjectId>,
    pub arrows: BTreeMap<ArrowId, Path>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigJson {
    pub name: String,
    pub max_rounds: usize,
    #[serde(default)]
    pub rules: Option<Vec<String>>,
    pub max_elements: usize,
}

impl From<&Decl> for DeclJson {
    fn from(d: &Decl) -> Self {
        match d {
            Decl::Sketch(s) => DeclJson::Sketch(s.clone()),
            Decl::Spec(p) => DeclJson::Spec(spec_json(p)),
            Decl::Morphism(m) => DeclJson::Morphism(MorphismJson {
                name: m.name.clone(),
                src: m.src.name.clone(),
                tgt: m.tgt.name.clone(),
                objects: m.object_map.clone(),
                arrows: m.arrow_map.clone(),
            }),
            Decl::Config(c) => DeclJson::Config(ConfigJson {
                name: c.name.clone(),
                max_rounds: c.config.max_rounds,
                rules: c.config.rule_subset.clone(),
                max_elements: c.config.max_elements,
            }),
        }
    }
}

fn spec_json(p: &Presentation) -> SpecJson {
    SpecJson {
        name: p.name.clone(),
        over: p.over.name.clone(),
        elements: p.elements.clone(),
        actions: p.actions.clone(),
    }
}

pub fn to_json(decls: &[Decl]) -> serde_json::Value {
    let v: Vec<DeclJson> = decls.iter().map(DeclJson::from).collect();
    serde_json::to_value(v).unwrap_or_default()
}

/// Reads a JSON array (or a single object) of declarations. The result goes
/// through the text parser, so the same reference checks apply.
pub fn from_json(text: &str, env: &Env) -> Result<Vec<Decl>, Vec<ParseError>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| vec![json_error(e)])?;
    let items: Vec<DeclJson> = match value {
        serde_json::Value::Array(_) => serde_json::from_value(value),
        other => serde_json::from_value(other).map(|d| vec![d]),
    }
    .map_err(|e| vec![json_error(e)])?;

    // Specs and morphisms only carry sketch names; resolve them against the
    // sketches seen so far in the document, then the environment.
    let mut local: BTreeMap<String, std::sync::Arc<Sketch>> = BTreeMap::new();
    for d in &items {
        if let DeclJson::Sketch(s) = d {
            local.entry(s.name.clone()).or_insert_with(|| std::sync::Arc::new(s.clone()));
        }
    }
    let lookup = |n: &str| {
        env.lookup_with(n, &local).ok_or_else(|| vec![ParseError::new(0, 0, format!("unknown sketch `{n}`"))])
    };
    let mut decls = Vec::with_capacity(items.len());
    for d in items {
        decls.push(match d {
            DeclJson::Sketch(s) => Decl::Sketch(s),
            DeclJson::Spec(s) => {
                let mut p = Presentation::new(s.name, lookup(&s.over)?);
                p.elements = s.elements;
                p.actions = s.actions;
                Decl::Spec(p)
            }
            DeclJson::Morphism(m) => {
                let mut sm = SketchMorphism::new(m.name, lookup(&m.src)?, lookup(&m.tgt)?);
                sm.object_map = m.objects;
                sm.arrow_map = m.arrows;
                Decl::Morphism(sm)
            }
            DeclJson::Config(c) => Decl::Config(NamedConfig {
                name: c.name,
                config: ChaseConfig { max_rounds: c.max_rounds, rule_subset: c.rules, max_elements: c.max_elements },
            }),
        });
    }
    let text = super::serialize_all(&decls);
    let parsed = super::parse_with(&text, env)?;
    Ok(parsed)
}

fn json_error(e: serde_json::Error) -> ParseError {
    ParseError::new(e.line(), e.column(), format!("invalid JSON: {e}"))
}

/// JSON form of a chase run.
#[derive(Serialize)]
pub struct ChaseResultJson<'a> {
    pub status: ChaseStatus,
    pub rounds: usize,
    pub result: SpecJson,
    pub embedding: &'a BTreeMap<ObjectId, BTreeMap<String, String>>,
    pub trace: &'a Trace,
}

pub fn realization_json(r: &Realization) -> SpecJson {
    spec_json(&r.to_presentation())
}

pub fn chase_result_json(res: &ChaseResult) -> serde_json::Value {
    let doc = ChaseResultJson {
        status: res.status,
        rounds: res.rounds,
        result: realization_json(&res.result),
        embedding: &res.embedding,
        trace: &res.trace,
    };
    serde_json::to_value(doc).unwrap_or_default()
}
