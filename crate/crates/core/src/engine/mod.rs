//! Rules, rule firing and the chase computing free theories.
//!
//! Every arrow broken by [`break_cycles`](crate::localizer::break_cycles)
//! gives a [`Rule`]. A specification is a theory when every rule is
//! satisfied, i.e. every broken mono acts bijectively. [`saturate`] alternates
//! cone repair with rounds that fire every unsatisfied match.

pub(crate) mod store;

mod fraction;
mod trace;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::ids::{ArrowId, ObjectId};
use crate::localizer::{Localiser, SketchMorphism};
use crate::realization::{
    check_realization, restrict_along, Presentation, RealMorphism, Realization, RealizationError,
};
use crate::search::{SearchOptions, Searcher};
use crate::sketch::Sketch;
use crate::yoneda::{representable, yoneda_arrow, YonedaError};

pub use fraction::{Certificate, Fraction};
pub use trace::{Firing, Trace, TraceRound};

use store::Store;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Yoneda(#[from] YonedaError),
    #[error(transparent)]
    Realization(#[from] RealizationError),
    #[error("invalid chase configuration: {0}")]
    Config(String),
    #[error("specification is over `{found}` but the rules are over `{expected}`")]
    SketchMismatch { expected: String, found: String },
    #[error("redundant step: rule {rule} is already satisfied at `{element}`")]
    RedundantStep { rule: String, element: String },
    #[error("`{element}` is not an element of {object}")]
    UnknownElement { object: ObjectId, element: String },
    #[error("repair exceeded {0} elements")]
    ElementLimit(usize),
    #[error("invalid presentation: {0}")]
    Presentation(String),
    #[error("not a theory: {0}")]
    NotATheory(String),
    #[error("fractions do not compose: {0}")]
    FractionMismatch(String),
    #[error("fraction verification failed: {0}")]
    Verification(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChaseConfig {
    pub max_rounds: usize,
    /// Rule ids to use; `None` means all.
    pub rule_subset: Option<Vec<String>>,
    /// Upper bound on the number of elements during repair.
    pub max_elements: usize,
}

impl Default for ChaseConfig {
    fn default() -> Self {
        Self { max_rounds: 32, rule_subset: None, max_elements: 1 << 20 }
    }
}

impl ChaseConfig {
    pub fn with_rounds(max_rounds: usize) -> Self {
        Self { max_rounds, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.max_rounds == 0 {
            return Err(EngineError::Config("max_rounds must be at least 1".into()));
        }
        Ok(())
    }

    /// The rules this configuration selects, in the given order.
    pub fn select<'r>(&self, rules: &'r [Rule]) -> Result<Vec<&'r Rule>, EngineError> {
        match &self.rule_subset {
            None => Ok(rules.iter().collect()),
            Some(ids) => ids
                .iter()
                .map(|id| {
                    rules
                        .iter()
                        .find(|r| &r.id == id)
                        .ok_or_else(|| EngineError::Config(format!("unknown rule `{id}`")))
                })
                .collect(),
        }
    }
}

/// A rule: the fraction `Y(H) -> Y(H') <- Y(C)` of a broken arrow
/// `c: H -> C` with `h: H' >-> H` and `c': H' -> C`.
#[derive(Clone, Debug)]
pub struct Rule {
    pub id: String,
    pub original: ArrowId,
    pub mono: ArrowId,
    pub part_arrow: ArrowId,
    pub hyp_object: ObjectId,
    pub part_object: ObjectId,
    pub concl_object: ObjectId,
    pub hypothesis: Arc<Realization>,
    pub conclusion: Arc<Realization>,
    pub glue: Arc<Realization>,
    pub hyp_generator: String,
    pub glue_generator: String,
    /// `Y(h)`.
    pub hyp_to_glue: RealMorphism,
    /// `Y(c')`.
    pub concl_to_glue: RealMorphism,
}

impl Rule {
    pub fn sketch(&self) -> &Arc<Sketch> {
        &self.glue.over
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sizes = |r: &Realization| {
            r.carriers
                .iter()
                .filter(|(_, s)| !s.is_empty())
                .map(|(o, s)| format!("{o}:{}", s.len()))
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(
            f,
            "rule {}: {} <-{}- {} -{}-> {}",
            self.id, self.hyp_object, self.mono, self.part_object, self.part_arrow, self.concl_object
        )?;
        writeln!(f, "  hypothesis  {}", sizes(&self.hypothesis))?;
        writeln!(f, "  conclusion  {}", sizes(&self.conclusion))?;
        write!(f, "  glue        {}", sizes(&self.glue))
    }
}

/// Rule id of a broken arrow: its id without a leading `c_`.
pub fn rule_id(arrow: &str) -> String {
    arrow.strip_prefix("c_").filter(|s| !s.is_empty()).unwrap_or(arrow).to_owned()
}

/// One rule per broken arrow of the localiser, in record order.
pub fn rules_of(sigma: &Localiser, cfg: &ChaseConfig) -> Result<Vec<Rule>, EngineError> {
    let sk = sigma.src();
    let mut rules = Vec::new();
    for b in &sigma.broken {
        let hyp_object = sk.arrows[&b.mono].tgt.clone();
        let concl_object = sk.arrows[&b.part_arrow].tgt.clone();
        let hyp = representable(sk, hyp_object.as_str(), cfg)?;
        let concl = representable(sk, concl_object.as_str(), cfg)?;
        let glue = representable(sk, b.part_object.as_str(), cfg)?;
        let hyp_to_glue = yoneda_arrow(sk, b.mono.as_str(), cfg)?;
        let concl_to_glue = yoneda_arrow(sk, b.part_arrow.as_str(), cfg)?;
        rules.push(Rule {
            id: rule_id(b.original.as_str()),
            original: b.original.clone(),
            mono: b.mono.clone(),
            part_arrow: b.part_arrow.clone(),
            hyp_object,
            part_object: b.part_object.clone(),
            concl_object,
            hypothesis: hyp.spec,
            conclusion: concl.spec,
            glue: glue.spec,
            hyp_generator: hyp.generator,
            glue_generator: glue.generator,
            hyp_to_glue,
            concl_to_glue,
        });
    }
    Ok(rules)
}

/// An element of a specification at a rule's hypothesis object, i.e. a
/// morphism from the hypothesis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Match {
    pub rule: String,
    pub element: String,
    /// Projection components, when the hypothesis object is a cone apex.
    pub tuple: Vec<(ArrowId, String)>,
    pub satisfied: bool,
}

impl Match {
    pub fn tuple_string(&self) -> String {
        format!("({})", self.tuple.iter().map(|(_, x)| x.as_str()).collect::<Vec<_>>().join(","))
    }
}

impl fmt::Display for Match {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.rule, self.element)?;
        if !self.tuple.is_empty() {
            write!(f, " {}", self.tuple_string())?;
        }
        if self.satisfied {
            write!(f, " (satisfied)")?;
        }
        Ok(())
    }
}

fn check_over(rule: &Rule, s: &Realization) -> Result<(), EngineError> {
    if *s.over != **rule.sketch() {
        return Err(EngineError::SketchMismatch { expected: rule.sketch().name.clone(), found: s.over.name.clone() });
    }
    Ok(())
}

/// All matches of `rule` in `s`, sorted by projection tuple then element.
pub fn match_rule(rule: &Rule, s: &Realization) -> Vec<Match> {
    let Some(carrier) = s.carrier(rule.hyp_object.as_str()) else { return Vec::new() };
    let image: HashSet<&str> =
        s.action(rule.mono.as_str()).map(|f| f.pairs().map(|(_, y)| y).collect()).unwrap_or_default();
    let projections: Vec<&ArrowId> =
        s.over.cones.get(&rule.hyp_object).map(|c| c.projections.iter().collect()).unwrap_or_default();
    let mut out: Vec<Match> = carrier
        .iter()
        .map(|x| Match {
            rule: rule.id.clone(),
            element: x.to_owned(),
            tuple: projections
                .iter()
                .map(|p| ((*p).clone(), s.apply(p.as_str(), x).unwrap_or("?").to_owned()))
                .collect(),
            satisfied: image.contains(x),
        })
        .collect();
    out.sort_by(|a, b| {
        let ka: Vec<&str> = a.tuple.iter().map(|(_, x)| x.as_str()).collect();
        let kb: Vec<&str> = b.tuple.iter().map(|(_, x)| x.as_str()).collect();
        ka.cmp(&kb).then_with(|| a.element.cmp(&b.element))
    });
    out
}

pub fn unsatisfied_matches(rule: &Rule, s: &Realization) -> Vec<Match> {
    match_rule(rule, s).into_iter().filter(|m| !m.satisfied).collect()
}

/// True when no rule has an unsatisfied match.
pub fn is_theory(s: &Realization, rules: &[Rule]) -> bool {
    rules.iter().all(|r| match_rule(r, s).iter().all(|m| m.satisfied))
}

/// Glues a copy of the rule's glue onto the store along each match.
/// `snapshot` is the store realized, with `ids[o][k]` the store id of its
/// `k`-th element at object `o`.
fn fire(
    st: &mut Store,
    rule: &Rule,
    snapshot: &Realization,
    ids: &[Vec<usize>],
    matches: &[Match],
) -> Result<Vec<Firing>, EngineError> {
    let searcher = Searcher::new(&rule.hypothesis, snapshot);
    let objects: Vec<ObjectId> = searcher.objects().to_vec();
    let h_obj = objects.iter().position(|o| *o == rule.hyp_object).unwrap_or_default();
    let gen = rule.hypothesis.carriers[&rule.hyp_object]
        .index_of(&rule.hyp_generator)
        .unwrap_or_else(|| unreachable!("hypothesis contains its generator"));
    let mut firings = Vec::with_capacity(matches.len());
    for m in matches {
        let x = snapshot.carriers[&rule.hyp_object].index_of(&m.element).ok_or_else(|| {
            EngineError::UnknownElement { object: rule.hyp_object.clone(), element: m.element.clone() }
        })?;
        let sols = searcher.run(&[(h_obj, gen, x)], &SearchOptions { injective: false, max_solutions: 1 });
        let Some(mm) = sols.into_iter().next() else {
            return Err(EngineError::NotATheory(format!(
                "no morphism from the hypothesis of {} at `{}`",
                rule.id, m.element
            )));
        };
        let before = st.changes.added.len();
        let mut target: Vec<Vec<Option<usize>>> =
            objects.iter().map(|o| vec![None; rule.glue.size(o.as_str())]).collect();
        for (oi, o) in objects.iter().enumerate() {
            let iota = &rule.hyp_to_glue.components[o];
            for (e, &img) in mm[oi].iter().enumerate() {
                let s_id = ids[oi][img];
                let g = iota.at(e);
                match target[oi][g] {
                    Some(t) => st.union(t, s_id),
                    None => target[oi][g] = Some(s_id),
                }
            }
        }
        for (oi, o) in objects.iter().enumerate() {
            let store_obj = st.object_index(o.as_str()).unwrap_or_else(|| unreachable!("same sketch"));
            for slot in target[oi].iter_mut() {
                if slot.is_none() {
                    *slot = Some(st.fresh(store_obj));
                }
            }
        }
        for (a, f) in &rule.glue.actions {
            let d = &rule.glue.over.arrows[a];
            let (si, ti) = (
                objects.iter().position(|o| *o == d.src).unwrap_or_default(),
                objects.iter().position(|o| *o == d.tgt).unwrap_or_default(),
            );
            let ai = st.arrow_index(a.as_str()).unwrap_or_else(|| unreachable!("same sketch"));
            for (g, &img) in f.map().iter().enumerate() {
                let (x, y) = (target[si][g].unwrap_or_default(), target[ti][img].unwrap_or_default());
                st.set(ai, x, y);
            }
        }
        let added = st.changes.added[before..].iter().map(|&i| st.name(i).to_owned()).collect();
        firings.push(Firing {
            rule: rule.id.clone(),
            element: m.element.clone(),
            tuple: m.tuple.iter().map(|(_, x)| x.clone()).collect(),
            added,
        });
    }
    Ok(firings)
}

fn snapshot(st: &mut Store, name: &str) -> (Realization, Vec<Vec<usize>>) {
    let r = st.realize(name);
    let ids = (0..st.objects().len()).map(|o| st.members(o).to_vec()).collect();
    (r, ids)
}

fn name_map(st: &mut Store, input: &Presentation) -> BTreeMap<ObjectId, BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (o, names) in &input.elements {
        let oi = st.object_index(o.as_str()).unwrap_or_else(|| unreachable!("loaded from this presentation"));
        let mut m = BTreeMap::new();
        for n in names {
            let id = st.lookup(oi, n).unwrap_or_else(|| unreachable!("loaded from this presentation"));
            let rep = st.find(id);
            m.insert(n.clone(), st.name(rep).to_owned());
        }
        out.insert(o.clone(), m);
    }
    out
}

/// Fires one match of one rule, then repairs.
///
/// Returns the new specification and the step as a fraction `S ⇢ S'`.
pub fn apply_rule(
    s: &Arc<Realization>,
    rule: &Rule,
    m: &Match,
    cfg: &ChaseConfig,
) -> Result<(Arc<Realization>, Fraction), EngineError> {
    check_over(rule, s)?;
    let current = match_rule(rule, s)
        .into_iter()
        .find(|x| x.element == m.element)
        .ok_or_else(|| EngineError::UnknownElement { object: rule.hyp_object.clone(), element: m.element.clone() })?;
    if current.satisfied {
        return Err(EngineError::RedundantStep { rule: rule.id.clone(), element: m.element.clone() });
    }
    let mut st = Store::from_realization(s, cfg.max_elements);
    let ids: Vec<Vec<usize>> = (0..st.objects().len()).map(|o| st.members(o).to_vec()).collect();
    fire(&mut st, rule, s, &ids, std::slice::from_ref(&current))?;
    st.repair(true).map_err(|_| EngineError::ElementLimit(cfg.max_elements))?;
    let result = Arc::new(st.realize(&s.name));
    let maps = name_map(&mut st, &s.to_presentation());
    let h = RealMorphism::from_maps(s.clone(), result.clone(), &maps)?;
    let c = RealMorphism::identity(result.clone());
    let step = Fraction {
        src: s.clone(),
        tgt: result.clone(),
        mid: result.clone(),
        h,
        c,
        certificate: Certificate::ByConstruction,
    };
    Ok((result, step))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChaseStatus {
    Fixpoint,
    Capped,
}

impl fmt::Display for ChaseStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChaseStatus::Fixpoint => "fixpoint",
            ChaseStatus::Capped => "capped",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ChaseResult {
    pub result: Arc<Realization>,
    pub status: ChaseStatus,
    /// Rule rounds fired.
    pub rounds: usize,
    pub trace: Trace,
    /// Input element (per object) to its name in the result.
    pub embedding: BTreeMap<ObjectId, BTreeMap<String, String>>,
}

impl ChaseResult {
    pub fn embedding_morphism(&self, input: Arc<Realization>) -> Result<RealMorphism, RealizationError> {
        RealMorphism::from_maps(input, self.result.clone(), &self.embedding)
    }

    pub fn is_fixpoint(&self) -> bool {
        self.status == ChaseStatus::Fixpoint
    }
}

/// Saturates a specification under `rules`.
pub fn saturate(s: &Realization, rules: &[Rule], cfg: &ChaseConfig) -> Result<ChaseResult, EngineError> {
    saturate_presentation(&s.to_presentation(), rules, cfg)
}

/// Like [`saturate`], for a presentation whose actions may be partial.
pub fn saturate_presentation(p: &Presentation, rules: &[Rule], cfg: &ChaseConfig) -> Result<ChaseResult, EngineError> {
    cfg.validate()?;
    let selected = cfg.select(rules)?;
    for r in &selected {
        if *p.over != **r.sketch() {
            return Err(EngineError::SketchMismatch { expected: r.sketch().name.clone(), found: p.over.name.clone() });
        }
    }
    let mut st = Store::from_presentation(p, cfg.max_elements).map_err(EngineError::Presentation)?;
    let overflow = |_| EngineError::ElementLimit(cfg.max_elements);
    let mut trace = Trace::default();

    st.repair(true).map_err(overflow)?;
    trace.rounds.push(TraceRound::from_changes(0, Vec::new(), &mut st, true));
    let mut rounds = 0;
    let status = loop {
        let (snap, ids) = snapshot(&mut st, &p.name);
        let pending: Vec<(&Rule, Vec<Match>)> =
            selected.iter().map(|r| (*r, unsatisfied_matches(r, &snap))).filter(|(_, m)| !m.is_empty()).collect();
        if pending.is_empty() {
            break ChaseStatus::Fixpoint;
        }
        rounds += 1;
        let mut firings = Vec::new();
        for (rule, matches) in &pending {
            firings.extend(fire(&mut st, rule, &snap, &ids, matches)?);
        }
        let last = rounds == cfg.max_rounds;
        st.repair(!last).map_err(overflow)?;
        trace.rounds.push(TraceRound::from_changes(rounds, firings, &mut st, !last));
        if last {
            break ChaseStatus::Capped;
        }
    };
    let result = Arc::new(st.realize(&p.name));
    let embedding = name_map(&mut st, p);
    Ok(ChaseResult { result, status, rounds, trace, embedding })
}

/// Precomposition with a logic morphism.
pub fn transport_spec(m: &SketchMorphism, t: &Realization) -> Result<Realization, RealizationError> {
    restrict_along(m, t)
}

/// The theory over the localiser's target presented by a specification
/// whose broken monos all act bijectively.
pub fn extend_to_theory(sigma: &Localiser, s: &Realization) -> Result<Realization, EngineError> {
    let (sp, th) = (sigma.src(), sigma.tgt());
    if *s.over != **sp {
        return Err(EngineError::SketchMismatch { expected: sp.name.clone(), found: s.over.name.clone() });
    }
    let mut inverse = BTreeMap::new();
    for b in &sigma.broken {
        let h = &s.actions[&b.mono];
        let inv =
            h.inverse().ok_or_else(|| EngineError::NotATheory(format!("`{}` does not act bijectively", b.mono)))?;
        inverse.insert(b.part_object.clone(), (b.mono.clone(), inv));
    }
    let mut carriers = BTreeMap::new();
    for o in &th.objects {
        let set = s.carriers.get(o).ok_or_else(|| EngineError::NotATheory(format!("no carrier for `{o}`")))?;
        carriers.insert(o.clone(), set.clone());
    }
    let mut actions = BTreeMap::new();
    for a in th.arrows.keys() {
        let f = if let Some(b) = sigma.broken.iter().find(|b| &b.original == a) {
            inverse[&b.part_object].1.compose(&s.actions[&b.part_arrow]).map_err(RealizationError::from)?
        } else {
            let f = &s.actions[a];
            match inverse.get(&sp.arrows[a].tgt) {
                Some((mono, _)) => f.compose(&s.actions[mono]).map_err(RealizationError::from)?,
                None => f.clone(),
            }
        };
        actions.insert(a.clone(), f);
    }
    let t = Realization { name: s.name.clone(), over: th.clone(), carriers, actions };
    let report = check_realization(&t);
    if !report.is_empty() {
        return Err(EngineError::NotATheory(report.to_string()));
    }
    Ok(t)
}
