//! Set-valued models of sketches and the natural transformations between
//! them.
//!
//! A [`Presentation`] is the raw, possibly partial data read from a file or
//! built by hand; a [`Realization`] is a presentation whose actions are total
//! functions. Only [`check_realization`] decides whether the equations, monos
//! and cones actually hold.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::finset::{self, FinDiagram, FinFunction, FinSet, FinSetError};
use crate::ids::{ArrowId, ObjectId};
use crate::localizer::{check_sketch_morphism, SketchMorphism};
use crate::report::{ValidationReport, Violation};
use crate::search::{SearchOptions, Searcher};
use crate::sketch::{Path, Sketch};

/// Search spaces above this many candidate assignments are refused.
pub const SEARCH_GUARD: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RealizationError {
    #[error("object `{0}` is not declared in the sketch")]
    UnknownObject(ObjectId),
    #[error("arrow `{0}` is not declared in the sketch")]
    UnknownArrow(ArrowId),
    #[error("element `{element}` is not in the carrier of `{object}`")]
    Foreign { object: ObjectId, element: String },
    #[error("action of `{arrow}` is not defined on `{element}`")]
    Partial { arrow: ArrowId, element: String },
    #[error("realizations live over different sketches (`{0}` and `{1}`)")]
    SketchMismatch(String, String),
    #[error("search space of about 10^{0:.1} assignments exceeds the guard of 10^6")]
    GuardExceeded(f64),
    #[error("invalid sketch morphism `{name}`:\n{report}")]
    InvalidMorphism { name: String, report: String },
    #[error("no morphism extends the given assignment")]
    NoExtension,
    #[error("morphism component at `{0}` has the wrong domain or codomain")]
    BadComponent(ObjectId),
    #[error(transparent)]
    FinSet(#[from] FinSetError),
}

/// Elements per object plus partially defined arrow actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub name: String,
    pub over: Arc<Sketch>,
    /// Carrier names per object, in declaration order.
    pub elements: BTreeMap<ObjectId, Vec<String>>,
    /// `arrow -> (x -> f(x))`, possibly partial.
    pub actions: BTreeMap<ArrowId, BTreeMap<String, String>>,
}

impl Presentation {
    pub fn new(name: impl Into<String>, over: Arc<Sketch>) -> Self {
        Self { name: name.into(), over, elements: BTreeMap::new(), actions: BTreeMap::new() }
    }

    pub fn elem(mut self, x: &str, obj: &str) -> Self {
        self.elements.entry(ObjectId::from(obj)).or_default().push(x.to_owned());
        self
    }

    pub fn act(mut self, arrow: &str, x: &str, y: &str) -> Self {
        self.actions.entry(ArrowId::from(arrow)).or_default().insert(x.to_owned(), y.to_owned());
        self
    }

    pub fn carrier(&self, obj: &str) -> &[String] {
        self.elements.get(obj).map_or(&[], Vec::as_slice)
    }

    pub fn size(&self, obj: &str) -> usize {
        self.carrier(obj).len()
    }

    pub fn total_elements(&self) -> usize {
        self.elements.values().map(Vec::len).sum()
    }

    /// Checks names and references, then builds total functions.
    pub fn into_realization(self) -> Result<Realization, RealizationError> {
        Realization::from_presentation(&self)
    }
}

/// A finite set-valued realization: every object has a carrier and every
/// arrow a total function.
#[derive(Clone, PartialEq, Eq)]
pub struct Realization {
    pub name: String,
    pub over: Arc<Sketch>,
    pub carriers: BTreeMap<ObjectId, Arc<FinSet>>,
    pub actions: BTreeMap<ArrowId, FinFunction>,
}

impl fmt::Debug for Realization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Realization")
            .field("name", &self.name)
            .field("over", &self.over.name)
            .field("carriers", &self.carriers)
            .field("actions", &self.actions)
            .finish()
    }
}

impl Realization {
    pub fn from_presentation(p: &Presentation) -> Result<Self, RealizationError> {
        let sk = &p.over;
        for o in p.elements.keys() {
            if !sk.objects.contains(o) {
                return Err(RealizationError::UnknownObject(o.clone()));
            }
        }
        for a in p.actions.keys() {
            if !sk.arrows.contains_key(a) {
                return Err(RealizationError::UnknownArrow(a.clone()));
            }
        }
        let mut carriers = BTreeMap::new();
        for o in &sk.objects {
            let names = p.elements.get(o).cloned().unwrap_or_default();
            carriers.insert(o.clone(), Arc::new(FinSet::new(names)?));
        }
        let mut actions = BTreeMap::new();
        let empty = BTreeMap::new();
        for (id, d) in &sk.arrows {
            let (dom, cod) = (carriers[&d.src].clone(), carriers[&d.tgt].clone());
            let table = p.actions.get(id).unwrap_or(&empty);
            for (x, y) in table {
                if !dom.contains(x) {
                    return Err(RealizationError::Foreign { object: d.src.clone(), element: x.clone() });
                }
                if !cod.contains(y) {
                    return Err(RealizationError::Foreign { object: d.tgt.clone(), element: y.clone() });
                }
            }
            if let Some(x) = dom.iter().find(|x| !table.contains_key(*x)) {
                return Err(RealizationError::Partial { arrow: id.clone(), element: x.to_owned() });
            }
            let f = FinFunction::from_pairs(dom, cod, table.iter().map(|(x, y)| (x.as_str(), y.as_str())))?;
            actions.insert(id.clone(), f);
        }
        Ok(Self { name: p.name.clone(), over: p.over.clone(), carriers, actions })
    }

    pub fn to_presentation(&self) -> Presentation {
        let elements = self.carriers.iter().map(|(o, s)| (o.clone(), s.elements().to_vec())).collect();
        let actions = self
            .actions
            .iter()
            .map(|(a, f)| (a.clone(), f.pairs().map(|(x, y)| (x.to_owned(), y.to_owned())).collect()))
            .collect();
        Presentation { name: self.name.clone(), over: self.over.clone(), elements, actions }
    }

    /// The realization with every carrier empty. Only a realization when no
    /// cone has an empty base.
    pub fn empty(name: impl Into<String>, over: Arc<Sketch>) -> Self {
        let p = Presentation::new(name, over);
        Self::from_presentation(&p).unwrap_or_else(|_| unreachable!("empty presentations are total"))
    }

    pub fn carrier(&self, obj: &str) -> Option<&Arc<FinSet>> {
        self.carriers.get(obj)
    }

    pub fn size(&self, obj: &str) -> usize {
        self.carriers.get(obj).map_or(0, |s| s.len())
    }

    pub fn action(&self, arrow: &str) -> Option<&FinFunction> {
        self.actions.get(arrow)
    }

    pub fn apply(&self, arrow: &str, x: &str) -> Option<&str> {
        self.actions.get(arrow)?.apply(x)
    }

    pub fn total_elements(&self) -> usize {
        self.carriers.values().map(|s| s.len()).sum()
    }

    /// The function a path denotes. Identity paths give identities.
    pub fn path_function(&self, path: &Path) -> Option<FinFunction> {
        match path {
            Path::Identity { identity } => self.carriers.get(identity).map(|s| FinFunction::identity(s.clone())),
            Path::Arrows(arrows) => {
                let mut it = arrows.iter();
                let mut f = self.actions.get(it.next()?)?.clone();
                for a in it {
                    f = f.compose(self.actions.get(a)?).ok()?;
                }
                Some(f)
            }
        }
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Checks that `r` is a realization of its sketch.
pub fn check_realization(r: &Realization) -> ValidationReport {
    let sk = &r.over;
    let mut report = ValidationReport::new();
    for o in &sk.objects {
        if !r.carriers.contains_key(o) {
            report.push(Violation::new("missing-carrier", o, "no carrier for this object"));
        }
    }
    for o in r.carriers.keys() {
        if !sk.objects.contains(o) {
            report.push(Violation::new("unknown-object", o, "carrier for an undeclared object"));
        }
    }
    for (id, d) in &sk.arrows {
        match r.actions.get(id) {
            None => report.push(Violation::new("missing-action", id, "no action for this arrow")),
            Some(f) => {
                let ok = r.carriers.get(&d.src).is_some_and(|s| **s == **f.dom())
                    && r.carriers.get(&d.tgt).is_some_and(|t| **t == **f.cod());
                if !ok {
                    report.push(Violation::new(
                        "action-typing",
                        id,
                        "action does not run between the carriers of its endpoints",
                    ));
                }
            }
        }
    }
    if !report.is_empty() {
        return report;
    }

    for eq in &sk.equations {
        let (Some(l), Some(rf)) = (r.path_function(&eq.lhs), r.path_function(&eq.rhs)) else {
            report.push(Violation::new("bad-path", format!("equation {eq}"), "path does not compose"));
            continue;
        };
        if l.dom() != rf.dom() {
            report.push(Violation::new("bad-path", format!("equation {eq}"), "paths start at different carriers"));
            continue;
        }
        for (i, x) in l.dom().iter().enumerate() {
            let (a, b) = (l.cod().name(l.at(i)), rf.cod().name(rf.at(i)));
            if a != b {
                report.push(
                    Violation::new("equation", format!("equation {eq}"), format!("fails at `{x}`: {a} != {b}"))
                        .with_witness(x),
                );
                break;
            }
        }
    }

    for m in &sk.monos {
        if let Some(f) = r.actions.get(m) {
            if !f.is_injective() {
                let mut seen: HashMap<usize, &str> = HashMap::new();
                let witness = f
                    .pairs()
                    .enumerate()
                    .find_map(|(i, (x, _))| seen.insert(f.at(i), x).map(|prev| format!("{prev}, {x}")))
                    .unwrap_or_default();
                report.push(Violation::new("mono", m, "mono-marked arrow acts non-injectively").with_witness(witness));
            }
        }
    }

    for cone in sk.cones.values() {
        if let Err(v) = check_cone(r, &cone.apex) {
            report.push(v);
        }
    }
    report
}

/// The realized base diagram of the cone at `apex`, with node ids equal to
/// the projection arrows.
pub fn cone_diagram(r: &Realization, apex: &str) -> Option<FinDiagram> {
    let cone = r.over.cones.get(apex)?;
    let mut d = FinDiagram::new();
    for p in &cone.projections {
        let tgt = r.over.tgt(p.as_str())?;
        d = d.node(p.as_str(), r.carriers.get(tgt)?.clone());
    }
    for e in &cone.edges {
        let f = r.path_function(&e.path)?;
        d = d.edge(format!("{}->{}:{}", e.from, e.to, e.path), e.from.as_str(), e.to.as_str(), f);
    }
    Some(d)
}

fn check_cone(r: &Realization, apex: &ObjectId) -> Result<(), Violation> {
    let entity = format!("cone {apex}");
    let cone = &r.over.cones[apex];
    let d = cone_diagram(r, apex.as_str())
        .ok_or_else(|| Violation::new("cone", &entity, "base diagram cannot be realized"))?;
    let lim = finset::limit(&d).map_err(|e| Violation::new("cone", &entity, e.to_string()))?;
    let apex_set = &r.carriers[apex];
    let projs: Vec<&FinFunction> = cone.projections.iter().map(|p| &r.actions[p]).collect();
    let mut hit = vec![None; lim.set.len()];
    for (i, x) in apex_set.iter().enumerate() {
        let tuple: Vec<usize> = projs.iter().map(|f| f.at(i)).collect();
        match lim.find(&tuple) {
            None => {
                return Err(Violation::new(
                    "cone",
                    &entity,
                    "comparison map leaves the limit: projections do not commute",
                )
                .with_witness(x))
            }
            Some(k) => {
                if let Some(prev) = hit[k].replace(x) {
                    return Err(Violation::new(
                        "cone",
                        &entity,
                        format!("comparison map is not injective: {prev} and {x} have the same projections"),
                    )
                    .with_witness(format!("{prev}, {x}")));
                }
            }
        }
    }
    if let Some(k) = hit.iter().position(Option::is_none) {
        return Err(Violation::new(
            "cone",
            &entity,
            format!(
                "comparison map is not surjective: {} apex elements for {} limit tuples",
                apex_set.len(),
                lim.set.len()
            ),
        )
        .with_witness(lim.set.name(k).to_owned()));
    }
    Ok(())
}

/// A natural transformation between realizations of the same sketch.
#[derive(Clone, PartialEq, Eq)]
pub struct RealMorphism {
    pub src: Arc<Realization>,
    pub tgt: Arc<Realization>,
    pub components: BTreeMap<ObjectId, FinFunction>,
}

impl fmt::Debug for RealMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealMorphism")
            .field("src", &self.src.name)
            .field("tgt", &self.tgt.name)
            .field("components", &self.components)
            .finish()
    }
}

impl RealMorphism {
    pub fn identity(r: Arc<Realization>) -> Self {
        let components = r.carriers.iter().map(|(o, s)| (o.clone(), FinFunction::identity(s.clone()))).collect();
        Self { src: r.clone(), tgt: r, components }
    }

    /// Builds a morphism from name maps, one per object.
    pub fn from_maps(
        src: Arc<Realization>,
        tgt: Arc<Realization>,
        maps: &BTreeMap<ObjectId, BTreeMap<String, String>>,
    ) -> Result<Self, RealizationError> {
        let mut components = BTreeMap::new();
        let empty = BTreeMap::new();
        for (o, dom) in &src.carriers {
            let cod = tgt.carriers.get(o).ok_or_else(|| RealizationError::UnknownObject(o.clone()))?;
            let m = maps.get(o).unwrap_or(&empty);
            let f = FinFunction::from_pairs(dom.clone(), cod.clone(), m.iter().map(|(a, b)| (a.as_str(), b.as_str())))?;
            components.insert(o.clone(), f);
        }
        Ok(Self { src, tgt, components })
    }

    pub fn component(&self, obj: &str) -> Option<&FinFunction> {
        self.components.get(obj)
    }

    /// `self` then `next`.
    pub fn then(&self, next: &RealMorphism) -> Result<RealMorphism, RealizationError> {
        let mut components = BTreeMap::new();
        for (o, f) in &self.components {
            let g = next.components.get(o).ok_or_else(|| RealizationError::BadComponent(o.clone()))?;
            components.insert(o.clone(), f.compose(g)?);
        }
        Ok(RealMorphism { src: self.src.clone(), tgt: next.tgt.clone(), components })
    }

    pub fn is_iso(&self) -> bool {
        self.components.values().all(FinFunction::is_bijection)
    }

    pub fn is_injective(&self) -> bool {
        self.components.values().all(FinFunction::is_injective)
    }

    /// Components as raw index vectors, for comparing morphisms.
    pub fn signature(&self) -> Vec<Vec<usize>> {
        self.components.values().map(|f| f.map().to_vec()).collect()
    }
}

/// Checks naturality of every square.
pub fn check_morphism(phi: &RealMorphism) -> Result<ValidationReport, RealizationError> {
    let (src, tgt) = (&phi.src, &phi.tgt);
    if *src.over != *tgt.over {
        return Err(RealizationError::SketchMismatch(src.over.name.clone(), tgt.over.name.clone()));
    }
    let mut report = ValidationReport::new();
    for (o, dom) in &src.carriers {
        match phi.components.get(o) {
            Some(f) if **f.dom() == **dom && tgt.carriers.get(o).is_some_and(|c| **c == **f.cod()) => {}
            _ => report.push(Violation::new("component", o, "component missing or mistyped")),
        }
    }
    if !report.is_empty() {
        return Ok(report);
    }
    for (id, d) in &src.over.arrows {
        let (f1, f2) = (&src.actions[id], &tgt.actions[id]);
        let (cx, cy) = (&phi.components[&d.src], &phi.components[&d.tgt]);
        for i in 0..f1.dom().len() {
            if cy.at(f1.at(i)) != f2.at(cx.at(i)) {
                report.push(
                    Violation::new("naturality", id, format!("square fails at `{}`", f1.dom().name(i)))
                        .with_witness(f1.dom().name(i).to_owned()),
                );
                break;
            }
        }
    }
    Ok(report)
}

/// Precomposition with a sketch morphism: `R . sigma`.
pub fn restrict_along(sigma: &SketchMorphism, r: &Realization) -> Result<Realization, RealizationError> {
    if *sigma.tgt != *r.over {
        return Err(RealizationError::SketchMismatch(sigma.tgt.name.clone(), r.over.name.clone()));
    }
    let report = check_sketch_morphism(sigma);
    if !report.is_empty() {
        return Err(RealizationError::InvalidMorphism { name: sigma.name.clone(), report: report.to_string() });
    }
    let mut carriers = BTreeMap::new();
    for o in &sigma.src.objects {
        let image = &sigma.object_map[o];
        carriers.insert(o.clone(), r.carriers[image].clone());
    }
    let mut actions = BTreeMap::new();
    for (id, d) in &sigma.src.arrows {
        let f = match &sigma.arrow_map[id] {
            Path::Identity { .. } => FinFunction::identity(carriers[&d.src].clone()),
            p => r.path_function(p).ok_or_else(|| RealizationError::UnknownArrow(id.clone()))?,
        };
        actions.insert(id.clone(), f);
    }
    Ok(Realization { name: r.name.clone(), over: sigma.src.clone(), carriers, actions })
}

fn same_sketch(r1: &Realization, r2: &Realization) -> Result<(), RealizationError> {
    if *r1.over != *r2.over {
        return Err(RealizationError::SketchMismatch(r1.over.name.clone(), r2.over.name.clone()));
    }
    Ok(())
}

fn to_morphisms(
    s: &Searcher,
    r1: &Arc<Realization>,
    r2: &Arc<Realization>,
    sols: Vec<Vec<Vec<usize>>>,
) -> Vec<RealMorphism> {
    sols.into_iter()
        .map(|comps| {
            let components = s
                .objects()
                .iter()
                .zip(comps)
                .map(|(o, map)| {
                    let f = FinFunction::new(r1.carriers[o].clone(), r2.carriers[o].clone(), map)
                        .unwrap_or_else(|e| unreachable!("search produced an ill-typed component: {e}"));
                    (o.clone(), f)
                })
                .collect();
            RealMorphism { src: r1.clone(), tgt: r2.clone(), components }
        })
        .collect()
}

/// All natural transformations `r1 -> r2`, in a deterministic order.
pub fn enumerate_morphisms(
    r1: &Arc<Realization>,
    r2: &Arc<Realization>,
) -> Result<Vec<RealMorphism>, RealizationError> {
    same_sketch(r1, r2)?;
    let s = Searcher::new(r1, r2);
    let space = s.search_space_log10();
    if space > SEARCH_GUARD.log10() {
        return Err(RealizationError::GuardExceeded(space));
    }
    let sols = s.run(&[], &SearchOptions { injective: false, max_solutions: usize::MAX });
    Ok(to_morphisms(&s, r1, r2, sols))
}

/// An isomorphism `r1 -> r2`, if one exists (the first in search order).
pub fn is_isomorphic(r1: &Arc<Realization>, r2: &Arc<Realization>) -> Result<Option<RealMorphism>, RealizationError> {
    same_sketch(r1, r2)?;
    if r1.carriers.iter().any(|(o, s)| r2.size(o.as_str()) != s.len()) {
        return Ok(None);
    }
    let s = Searcher::new(r1, r2);
    let space = s.search_space_log10();
    if space > SEARCH_GUARD.log10() {
        return Err(RealizationError::GuardExceeded(space));
    }
    let sols = s.run(&[], &SearchOptions { injective: true, max_solutions: 1 });
    Ok(to_morphisms(&s, r1, r2, sols).into_iter().next())
}

/// The morphisms `r1 -> r2` agreeing with `fixed` (object, source name,
/// target name). No guard: meant for sources generated by the fixed
/// elements, where propagation decides everything.
pub fn morphisms_extending(
    r1: &Arc<Realization>,
    r2: &Arc<Realization>,
    fixed: &[(&str, &str, &str)],
    max_solutions: usize,
) -> Result<Vec<RealMorphism>, RealizationError> {
    same_sketch(r1, r2)?;
    let s = Searcher::new(r1, r2);
    let objs: HashMap<&str, usize> = s.objects().iter().enumerate().map(|(i, o)| (o.as_str(), i)).collect();
    let mut fx = Vec::new();
    for &(o, x, y) in fixed {
        let oi = *objs.get(o).ok_or_else(|| RealizationError::UnknownObject(o.into()))?;
        let xi = r1.carriers[o]
            .index_of(x)
            .ok_or_else(|| RealizationError::Foreign { object: o.into(), element: x.into() })?;
        let yi = r2.carriers[o]
            .index_of(y)
            .ok_or_else(|| RealizationError::Foreign { object: o.into(), element: y.into() })?;
        fx.push((oi, xi, yi));
    }
    let sols = s.run(&fx, &SearchOptions { injective: false, max_solutions });
    Ok(to_morphisms(&s, r1, r2, sols))
}

/// The unique morphism out of `r1` sending `x: obj` to `y`, when `r1` is
/// generated by `x`.
pub fn extend_generator(
    r1: &Arc<Realization>,
    r2: &Arc<Realization>,
    obj: &str,
    x: &str,
    y: &str,
) -> Result<RealMorphism, RealizationError> {
    morphisms_extending(r1, r2, &[(obj, x, y)], 1)?.into_iter().next().ok_or(RealizationError::NoExtension)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::{graph_sketch, magma_sketch};

    pub(crate) fn graph(name: &str, vs: &[&str], es: &[(&str, &str, &str)]) -> Realization {
        let mut p = Presentation::new(name, Arc::new(graph_sketch()));
        for v in vs {
            p = p.elem(v, "V");
        }
        for (e, s, t) in es {
            p = p.elem(e, "E").act("s", e, s).act("t", e, t);
        }
        p.into_realization().unwrap()
    }

    fn and_magma(pairs: usize) -> Realization {
        let mut p = Presentation::new("and", Arc::new(magma_sketch())).elem("0", "M").elem("1", "M");
        let all = [("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")];
        for (a, b) in all.iter().take(pairs) {
            let name = format!("({a},{b})");
            let v = if *a == "1" && *b == "1" { "1" } else { "0" };
            p = p.elem(&name, "M2").act("s", &name, a).act("t", &name, b).act("k", &name, v);
        }
        p.into_realization().unwrap()
    }

    #[test]
    fn loop_graph_is_a_realization() {
        assert!(check_realization(&graph("loop", &["v"], &[("e", "v", "v")])).is_empty());
    }

    #[test]
    fn and_magma_is_a_realization() {
        let r = and_magma(4);
        let rep = check_realization(&r);
        assert!(rep.is_empty(), "{rep}");
    }

    #[test]
    fn three_pairs_is_a_cone_violation() {
        let rep = check_realization(&and_magma(3));
        assert_eq!(rep.len(), 1);
        assert_eq!(rep.violations[0].rule, "cone");
        assert!(rep.violations[0].message.contains("not surjective"));
    }

    #[test]
    fn partial_presentation_is_rejected() {
        let p = Presentation::new("x", Arc::new(graph_sketch())).elem("v", "V").elem("e", "E").act("s", "e", "v");
        assert!(matches!(p.into_realization(), Err(RealizationError::Partial { .. })));
    }

    #[test]
    fn identity_morphism_is_natural() {
        let r = Arc::new(and_magma(4));
        assert!(check_morphism(&RealMorphism::identity(r)).unwrap().is_empty());
    }

    #[test]
    fn collapsing_graph_morphism_is_natural() {
        let src = Arc::new(graph("two", &["a", "b"], &[("e", "a", "b")]));
        let tgt = Arc::new(graph("loop", &["v"], &[("l", "v", "v")]));
        let maps: BTreeMap<ObjectId, BTreeMap<String, String>> = [
            ("V".into(), [("a".into(), "v".into()), ("b".into(), "v".into())].into()),
            ("E".into(), [("e".into(), "l".into())].into()),
        ]
        .into();
        let phi = RealMorphism::from_maps(src, tgt, &maps).unwrap();
        assert!(check_morphism(&phi).unwrap().is_empty());
    }

    #[test]
    fn permuting_vertices_breaks_naturality_at_s() {
        let r = Arc::new(graph("loops", &["a", "b"], &[("ea", "a", "a"), ("eb", "b", "b")]));
        let maps: BTreeMap<ObjectId, BTreeMap<String, String>> = [
            ("V".into(), [("a".into(), "b".into()), ("b".into(), "a".into())].into()),
            ("E".into(), [("ea".into(), "ea".into()), ("eb".into(), "eb".into())].into()),
        ]
        .into();
        let phi = RealMorphism::from_maps(r.clone(), r, &maps).unwrap();
        let rep = check_morphism(&phi).unwrap();
        assert_eq!(rep.violations[0].entity, "s");
    }

    #[test]
    fn morphisms_across_sketches_are_an_error() {
        let g = Arc::new(graph("g", &[], &[]));
        let m = Arc::new(and_magma(4));
        let phi = RealMorphism { src: g.clone(), tgt: m.clone(), components: BTreeMap::new() };
        assert!(matches!(check_morphism(&phi), Err(RealizationError::SketchMismatch(..))));
        assert!(enumerate_morphisms(&g, &m).is_err());
    }

    #[test]
    fn enumeration_examples() {
        let empty = Arc::new(graph("empty", &[], &[]));
        let lp = Arc::new(graph("loop", &["v"], &[("e", "v", "v")]));
        let discrete = Arc::new(graph("disc", &["a", "b"], &[]));
        assert_eq!(enumerate_morphisms(&empty, &lp).unwrap().len(), 1);
        assert_eq!(enumerate_morphisms(&lp, &lp).unwrap().len(), 1);
        assert_eq!(enumerate_morphisms(&discrete, &lp).unwrap().len(), 1);
        // Free vertices into a 3-vertex edgeless graph: 3^2.
        let three = Arc::new(graph("three", &["x", "y", "z"], &[]));
        assert_eq!(enumerate_morphisms(&discrete, &three).unwrap().len(), 9);
    }

    #[test]
    fn guard_refuses_large_spaces() {
        let names: Vec<String> = (0..10).map(|i| format!("v{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let big = Arc::new(graph("big", &refs, &[]));
        assert!(matches!(enumerate_morphisms(&big, &big), Err(RealizationError::GuardExceeded(_))));
    }

    #[test]
    fn isomorphism_examples() {
        let a = Arc::new(graph("a", &["x", "y"], &[("e", "x", "y")]));
        let b = Arc::new(graph("b", &["q", "p"], &[("f", "p", "q")]));
        let c = Arc::new(graph("c", &["x"], &[]));
        assert!(is_isomorphic(&a, &a).unwrap().is_some());
        let iso = is_isomorphic(&a, &b).unwrap().expect("renaming");
        assert_eq!(iso.components["V"].apply("x"), Some("p"));
        assert!(is_isomorphic(&a, &c).unwrap().is_none());
    }

    #[test]
    fn magma_morphisms_are_determined_on_m() {
        let r = Arc::new(and_magma(4));
        // Endomorphisms of ({0,1}, AND): identity and constant-0 and constant-1.
        let homs = enumerate_morphisms(&r, &r).unwrap();
        assert_eq!(homs.len(), 3);
        for h in &homs {
            assert!(check_morphism(h).unwrap().is_empty());
        }
    }
}
