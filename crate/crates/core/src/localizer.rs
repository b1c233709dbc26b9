//! Sketch morphisms, cycle detection and cycle breaking.
//!
//! Cycles are computed on an orientation graph in which ordinary arrows point
//! forward and cone projections point both ways. Breaking a cycle replaces an
//! arrow `c: H -> C` by a span `H <-h- H' -c'-> C` whose left leg is a mono,
//! together with the localiser that collapses `h` back to an identity.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::ids::{ArrowId, ObjectId};
use crate::report::{ValidationReport, Violation};
use crate::sketch::{path_endpoints, validate_sketch, Cone, ConeEdge, Path, PathEquation, Sketch};

/// Default bound on the rewriting depth used to prove transported equations.
pub const DEFAULT_REWRITE_DEPTH: usize = 8;
const MAX_REWRITE_STATES: usize = 50_000;
const MAX_CYCLES: usize = 100_000;

/// A map of sketches: objects to objects, arrows to paths.
#[derive(Clone, PartialEq, Eq)]
pub struct SketchMorphism {
    pub name: String,
    pub src: Arc<Sketch>,
    pub tgt: Arc<Sketch>,
    pub object_map: BTreeMap<ObjectId, ObjectId>,
    pub arrow_map: BTreeMap<ArrowId, Path>,
}

impl fmt::Debug for SketchMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SketchMorphism")
            .field("name", &self.name)
            .field("src", &self.src.name)
            .field("tgt", &self.tgt.name)
            .field("object_map", &self.object_map)
            .field("arrow_map", &self.arrow_map)
            .finish()
    }
}

impl SketchMorphism {
    pub fn new(name: impl Into<String>, src: Arc<Sketch>, tgt: Arc<Sketch>) -> Self {
        Self { name: name.into(), src, tgt, object_map: BTreeMap::new(), arrow_map: BTreeMap::new() }
    }

    pub fn identity(sk: Arc<Sketch>) -> Self {
        let object_map = sk.objects.iter().map(|o| (o.clone(), o.clone())).collect();
        let arrow_map = sk.arrows.keys().map(|a| (a.clone(), Path::arrow(a.clone()))).collect();
        Self { name: format!("id_{}", sk.name), src: sk.clone(), tgt: sk, object_map, arrow_map }
    }

    pub fn obj(mut self, from: &str, to: &str) -> Self {
        self.object_map.insert(from.into(), to.into());
        self
    }

    pub fn arr(mut self, from: &str, to: Path) -> Self {
        self.arrow_map.insert(from.into(), to);
        self
    }

    pub fn is_identity(&self) -> bool {
        self.src == self.tgt
            && self.object_map.iter().all(|(a, b)| a == b)
            && self.arrow_map.iter().all(|(a, p)| p.arrows() == std::slice::from_ref(a))
    }

    /// Image of a source path. `None` when some map entry is missing.
    pub fn image_path(&self, path: &Path) -> Option<Path> {
        match path {
            Path::Identity { identity } => Some(Path::identity(self.object_map.get(identity)?.clone())),
            Path::Arrows(arrows) => {
                let mut out = Vec::new();
                for a in arrows {
                    out.extend_from_slice(self.arrow_map.get(a)?.arrows());
                }
                if out.is_empty() {
                    let first = self.src.src(arrows.first()?.as_str())?;
                    Some(Path::identity(self.object_map.get(first)?.clone()))
                } else {
                    Some(Path::Arrows(out))
                }
            }
        }
    }
}

/// Checks that `m` transports objects, arrows, equations, cones and monos,
/// proving equations by rewriting up to [`DEFAULT_REWRITE_DEPTH`].
pub fn check_sketch_morphism(m: &SketchMorphism) -> ValidationReport {
    check_sketch_morphism_with(m, DEFAULT_REWRITE_DEPTH)
}

pub fn check_sketch_morphism_with(m: &SketchMorphism, depth: usize) -> ValidationReport {
    let (src, tgt) = (&*m.src, &*m.tgt);
    let mut report = ValidationReport::new();

    for o in &src.objects {
        match m.object_map.get(o) {
            None => report.push(Violation::new("object-map", o, "object has no image")),
            Some(img) if !tgt.objects.contains(img) => report.push(Violation::new(
                "object-map",
                o,
                format!("image `{img}` is not an object of `{}`", tgt.name),
            )),
            _ => {}
        }
    }
    for o in m.object_map.keys().filter(|o| !src.objects.contains(*o)) {
        report.push(Violation::new("object-map", o, format!("not an object of `{}`", src.name)));
    }
    for (id, d) in &src.arrows {
        let Some(img) = m.arrow_map.get(id) else {
            report.push(Violation::new("arrow-map", id, "arrow has no image"));
            continue;
        };
        let (Some(ms), Some(mt)) = (m.object_map.get(&d.src), m.object_map.get(&d.tgt)) else { continue };
        match path_endpoints(tgt, img) {
            Err(e) => report.push(Violation::new("arrow-map", id, format!("image `{img}` is not a path: {e}"))),
            Ok((s, t)) if (&s, &t) != (ms, mt) => report.push(Violation::new(
                "endpoints",
                id,
                format!("image `{img}` runs {s} -> {t}, expected {ms} -> {mt}"),
            )),
            _ => {}
        }
    }
    for a in m.arrow_map.keys().filter(|a| !src.arrows.contains_key(*a)) {
        report.push(Violation::new("arrow-map", a, format!("not an arrow of `{}`", src.name)));
    }
    if !report.is_empty() {
        return report;
    }

    let prover = Prover::new(tgt, depth);
    let cone_eqs = src.cone_equations();
    for eq in src.equations.iter().filter(|e| !cone_eqs.contains(*e)) {
        let (Some(l), Some(r)) = (m.image_path(&eq.lhs), m.image_path(&eq.rhs)) else { continue };
        if !prover.equal(&l, &r) {
            report.warn(Violation::new(
                "equation",
                format!("equation {eq}"),
                format!("image {l} = {r} not derivable within depth {depth}"),
            ));
        }
    }

    for cone in src.cones.values() {
        check_cone_transport(m, cone, &prover, &mut report);
    }

    for mono in &src.monos {
        let Some(img) = m.arrow_map.get(mono) else { continue };
        let ok = match img.arrows() {
            [] => true,
            [a] => tgt.is_mono(a.as_str()),
            _ => false,
        };
        if !ok {
            report.push(Violation::new(
                "mono-transport",
                mono,
                format!("image `{img}` is neither a mono nor an identity"),
            ));
        }
    }
    report
}

fn check_cone_transport(m: &SketchMorphism, cone: &Cone, prover: &Prover<'_>, report: &mut ValidationReport) {
    let entity = format!("cone {}", cone.apex);
    let apex = &m.object_map[&cone.apex];
    let Some(target) = m.tgt.cones.get(apex) else {
        report.push(Violation::new(
            "cone-transport",
            &entity,
            format!("apex maps to `{apex}`, which is not a cone apex"),
        ));
        return;
    };
    let mut node = BTreeMap::new();
    for p in &cone.projections {
        match m.arrow_map[p].arrows() {
            [q] if target.projections.contains(q) => {
                if let Some((other, _)) = node.iter().find(|(_, img)| *img == q) {
                    report.push(Violation::new(
                        "cone-transport",
                        &entity,
                        format!("projections `{other}` and `{p}` both map to `{q}`"),
                    ));
                    return;
                }
                node.insert(p.clone(), q.clone());
            }
            _ => {
                report.push(Violation::new(
                    "cone-transport",
                    &entity,
                    format!("projection `{p}` maps to `{}`, not a projection of cone {apex}", m.arrow_map[p]),
                ));
                return;
            }
        }
    }
    if node.len() != target.projections.len() {
        report.push(Violation::new(
            "cone-transport",
            &entity,
            format!(
                "{} projections cover only {} of the {} projections of cone {apex}",
                node.len(),
                node.len(),
                target.projections.len()
            ),
        ));
        return;
    }
    for e in &cone.edges {
        let (from, to) = (&node[&e.from], &node[&e.to]);
        let Some(img) = m.image_path(&e.path) else { continue };
        let candidates: Vec<&ConeEdge> = target.edges.iter().filter(|t| &t.from == from && &t.to == to).collect();
        if candidates.is_empty() {
            report.push(Violation::new(
                "cone-transport",
                &entity,
                format!("base edge {} -> {} has no counterpart {from} -> {to}", e.from, e.to),
            ));
        } else if !candidates.iter().any(|t| prover.equal(&img, &t.path)) {
            report.warn(Violation::new(
                "cone-edge",
                &entity,
                format!("base edge {} -> {} maps to `{img}`, not derivably equal to a counterpart", e.from, e.to),
            ));
        }
    }
    let back: HashMap<&ArrowId, &ArrowId> = node.iter().map(|(a, b)| (b, a)).collect();
    for t in &target.edges {
        let (from, to) = (back[&t.from], back[&t.to]);
        if !cone.edges.iter().any(|e| &e.from == from && &e.to == to) {
            report.push(Violation::new(
                "cone-transport",
                &entity,
                format!("base edge {} -> {} of cone {apex} is not the image of an edge", t.from, t.to),
            ));
        }
    }
}

/// Whether two paths are equal in the category `sk` presents, as far as
/// rewriting up to `depth` steps can tell.
pub fn paths_equal(sk: &Sketch, a: &Path, b: &Path, depth: usize) -> bool {
    Prover::new(sk, depth).equal(a, b)
}

/// Bounded equational reasoning on paths: breadth-first rewriting from both
/// sides with the sketch's equations used in both directions.
struct Prover<'a> {
    sk: &'a Sketch,
    depth: usize,
    rules: Vec<(Vec<ArrowId>, Vec<ArrowId>, ObjectId)>,
}

impl<'a> Prover<'a> {
    fn new(sk: &'a Sketch, depth: usize) -> Self {
        let mut rules = Vec::new();
        for eq in &sk.equations {
            let Ok((s, _)) = path_endpoints(sk, &eq.lhs) else { continue };
            let (l, r) = (eq.lhs.arrows().to_vec(), eq.rhs.arrows().to_vec());
            rules.push((l.clone(), r.clone(), s.clone()));
            rules.push((r, l, s));
        }
        Self { sk, depth, rules }
    }

    fn equal(&self, a: &Path, b: &Path) -> bool {
        if a == b {
            return true;
        }
        let (Ok(ea), Ok(eb)) = (path_endpoints(self.sk, a), path_endpoints(self.sk, b)) else { return false };
        if ea != eb {
            return false;
        }
        let anchor = ea.0;
        let max_len = a.len().max(b.len()) + 4;
        let start_a = a.arrows().to_vec();
        let start_b = b.arrows().to_vec();
        let mut seen = [HashSet::from([start_a.clone()]), HashSet::from([start_b.clone()])];
        let mut frontier = [vec![start_a], vec![start_b]];
        let half = [self.depth.div_ceil(2), self.depth / 2];
        for step in 0..self.depth {
            let side = if step % 2 == 0 { 0 } else { 1 };
            if step / 2 >= half[side] {
                continue;
            }
            let mut next = Vec::new();
            for w in &frontier[side] {
                for v in self.neighbours(w, &anchor, max_len) {
                    if seen[1 - side].contains(&v) {
                        return true;
                    }
                    if seen[side].len() < MAX_REWRITE_STATES && seen[side].insert(v.clone()) {
                        next.push(v);
                    }
                }
            }
            frontier[side] = next;
        }
        false
    }

    /// Objects visited by a word, starting at `anchor`.
    fn objects<'w>(&'w self, w: &'w [ArrowId], anchor: &'w ObjectId) -> Vec<&'w ObjectId> {
        let mut out = vec![anchor];
        for a in w {
            out.push(self.sk.tgt(a.as_str()).unwrap_or(anchor));
        }
        out
    }

    fn neighbours(&self, w: &[ArrowId], anchor: &ObjectId, max_len: usize) -> Vec<Vec<ArrowId>> {
        let mut out = Vec::new();
        let objs = self.objects(w, anchor);
        for (l, r, at) in &self.rules {
            if w.len() + r.len() > max_len + l.len() {
                continue;
            }
            if l.is_empty() {
                for (i, o) in objs.iter().enumerate() {
                    if *o == at {
                        let mut v = w[..i].to_vec();
                        v.extend_from_slice(r);
                        v.extend_from_slice(&w[i..]);
                        out.push(v);
                    }
                }
                continue;
            }
            if l.len() > w.len() {
                continue;
            }
            for i in 0..=w.len() - l.len() {
                if w[i..i + l.len()] == l[..] {
                    let mut v = w[..i].to_vec();
                    v.extend_from_slice(r);
                    v.extend_from_slice(&w[i + l.len()..]);
                    out.push(v);
                }
            }
        }
        out
    }
}

/// One step of a closed walk in the orientation graph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CycleStep {
    pub arrow: ArrowId,
    /// `false` when a projection is walked against its direction.
    pub forward: bool,
    pub from: ObjectId,
    pub to: ObjectId,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Cycle {
    pub steps: Vec<CycleStep>,
}

impl Cycle {
    pub fn arrows(&self) -> impl Iterator<Item = &ArrowId> {
        self.steps.iter().map(|s| &s.arrow)
    }

    pub fn contains(&self, arrow: &str) -> bool {
        self.steps.iter().any(|s| s.arrow == arrow)
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(first) = self.steps.first() else { return Ok(()) };
        write!(f, "{}", first.from)?;
        for s in &self.steps {
            if s.forward {
                write!(f, " --{}--> {}", s.arrow, s.to)?;
            } else {
                write!(f, " <--{}-- {}", s.arrow, s.to)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CycleReport {
    pub cycles: Vec<Cycle>,
    /// Set when enumeration stopped at the internal cap.
    pub truncated: bool,
}

impl CycleReport {
    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    /// Arrows that lie on some cycle, in id order.
    pub fn arrows(&self) -> BTreeSet<ArrowId> {
        self.cycles.iter().flat_map(|c| c.arrows().cloned()).collect()
    }

    pub fn through(&self, arrow: &str) -> impl Iterator<Item = &Cycle> + '_ {
        let arrow = arrow.to_owned();
        self.cycles.iter().filter(move |c| c.contains(&arrow))
    }
}

impl fmt::Display for CycleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cycles.is_empty() {
            return writeln!(f, "no cycles");
        }
        for c in &self.cycles {
            writeln!(f, "cycle: {c}")?;
        }
        if self.truncated {
            writeln!(f, "(truncated after {MAX_CYCLES} cycles)")?;
        }
        Ok(())
    }
}

fn generative(sk: &Sketch, a: &str) -> bool {
    !sk.is_projection(a) && !sk.is_mono(a)
}

/// Elementary cycles of the orientation graph that walk through at least one
/// arrow that is neither a projection nor a mono. Each cycle starts at its
/// least object; cycles are sorted.
pub fn find_cycles(sk: &Sketch) -> CycleReport {
    let nodes: Vec<&ObjectId> = sk.objects.iter().collect();
    let ix: HashMap<&ObjectId, usize> = nodes.iter().enumerate().map(|(i, o)| (*o, i)).collect();
    let mut adj: Vec<Vec<(usize, &ArrowId, bool)>> = vec![Vec::new(); nodes.len()];
    for (id, d) in &sk.arrows {
        let (Some(&s), Some(&t)) = (ix.get(&d.src), ix.get(&d.tgt)) else { continue };
        adj[s].push((t, id, true));
        if sk.is_projection(id.as_str()) && s != t {
            adj[t].push((s, id, false));
        }
    }
    let mut report = CycleReport::default();
    let mut walk: Vec<(usize, &ArrowId, bool, usize)> = Vec::new();
    let mut on_path = vec![false; nodes.len()];
    for start in 0..nodes.len() {
        if report.truncated {
            break;
        }
        on_path[start] = true;
        dfs(sk, &nodes, &adj, start, start, &mut walk, &mut on_path, &mut report);
        on_path[start] = false;
    }
    report.cycles.sort();
    report
}

#[allow(clippy::too_many_arguments)]
fn dfs<'a>(
    sk: &Sketch,
    nodes: &[&ObjectId],
    adj: &[Vec<(usize, &'a ArrowId, bool)>],
    start: usize,
    at: usize,
    walk: &mut Vec<(usize, &'a ArrowId, bool, usize)>,
    on_path: &mut [bool],
    report: &mut CycleReport,
) {
    for &(next, arrow, forward) in &adj[at] {
        if report.truncated {
            return;
        }
        if next < start || walk.iter().any(|w| w.1 == arrow) {
            continue;
        }
        if next == start {
            walk.push((at, arrow, forward, next));
            if walk.iter().any(|w| generative(sk, w.1.as_str())) {
                let steps = walk
                    .iter()
                    .map(|&(f, a, fw, t)| CycleStep {
                        arrow: a.clone(),
                        forward: fw,
                        from: nodes[f].clone(),
                        to: nodes[t].clone(),
                    })
                    .collect();
                report.cycles.push(Cycle { steps });
                if report.cycles.len() >= MAX_CYCLES {
                    report.truncated = true;
                }
            }
            walk.pop();
            continue;
        }
        if on_path[next] {
            continue;
        }
        on_path[next] = true;
        walk.push((at, arrow, forward, next));
        dfs(sk, nodes, adj, start, next, walk, on_path, report);
        walk.pop();
        on_path[next] = false;
    }
}

/// One arrow replaced by a partial arrow.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BrokenArrow {
    /// The original arrow `c: H -> C` of the theory sketch.
    pub original: ArrowId,
    /// `h: H' >-> H`.
    pub mono: ArrowId,
    /// `c': H' -> C`.
    pub part_arrow: ArrowId,
    /// `H'`.
    pub part_object: ObjectId,
}

/// A sketch morphism `E_Sp -> E_Th` that collapses the monos of its broken
/// records to identities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Localiser {
    pub underlying: SketchMorphism,
    pub broken: Vec<BrokenArrow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocaliserError {
    #[error("`{0}` is not an arrow of the sketch")]
    UnknownArrow(ArrowId),
    #[error("cannot break projection `{0}`: it would destroy its cone")]
    Projection(ArrowId),
    #[error("cannot break `{arrow}`: {reason}")]
    Unrewritable { arrow: ArrowId, reason: String },
    #[error("sketch `{name}` is invalid:\n{report}")]
    InvalidSketch { name: String, report: String },
    #[error("`{0}` is not a localiser: {1}")]
    NotALocaliser(String, String),
}

impl Localiser {
    pub fn identity(sk: Arc<Sketch>) -> Self {
        Self { underlying: SketchMorphism::identity(sk), broken: Vec::new() }
    }

    pub fn src(&self) -> &Arc<Sketch> {
        &self.underlying.src
    }

    pub fn tgt(&self) -> &Arc<Sketch> {
        &self.underlying.tgt
    }

    /// Recovers the broken records of a morphism read back from a file: every
    /// mono sent to an identity, with the one other arrow leaving its domain.
    pub fn from_morphism(m: SketchMorphism) -> Result<Self, LocaliserError> {
        let mut broken = Vec::new();
        for mono in &m.src.monos {
            let Some(img) = m.arrow_map.get(mono) else { continue };
            if !img.is_identity() {
                continue;
            }
            let part_object = m.src.arrows[mono].src.clone();
            let out: Vec<&ArrowId> =
                m.src.arrows.values().filter(|d| d.src == part_object && d.id != *mono).map(|d| &d.id).collect();
            let [part] = out.as_slice() else {
                return Err(LocaliserError::NotALocaliser(
                    m.name.clone(),
                    format!("`{part_object}` should have exactly one arrow besides `{mono}`, found {}", out.len()),
                ));
            };
            let original = match m.arrow_map[*part].arrows() {
                [c] => c.clone(),
                _ => {
                    return Err(LocaliserError::NotALocaliser(
                        m.name.clone(),
                        format!("`{part}` should map to a single arrow"),
                    ))
                }
            };
            broken.push(BrokenArrow { original, mono: mono.clone(), part_arrow: (*part).clone(), part_object });
        }
        broken.sort_by(|a, b| a.original.cmp(&b.original));
        Ok(Self { underlying: m, broken })
    }
}

/// Arrows the default plan breaks: generative arrows on cycles, except those
/// leaving the domain of a mono (already partial).
pub fn default_plan(sk: &Sketch) -> Vec<ArrowId> {
    let partial: HashSet<&ObjectId> = sk.monos.iter().filter_map(|m| sk.src(m.as_str())).collect();
    find_cycles(sk)
        .arrows()
        .into_iter()
        .filter(|a| generative(sk, a.as_str()))
        .filter(|a| sk.src(a.as_str()).is_some_and(|s| !partial.contains(s)))
        .collect()
}

fn fresh_object(sk: &Sketch, base: String) -> ObjectId {
    let mut name = base.clone();
    let mut n = 2;
    while sk.objects.contains(name.as_str()) {
        name = format!("{base}{n}");
        n += 1;
    }
    name.into()
}

fn fresh_arrow(sk: &Sketch, base: String) -> ArrowId {
    let mut name = base.clone();
    let mut n = 2;
    while sk.arrows.contains_key(name.as_str()) {
        name = format!("{base}{n}");
        n += 1;
    }
    name.into()
}

/// Breaks the cycles of `theory` by making the planned arrows partial.
///
/// Returns `E_Sp` and the localiser `E_Sp -> theory`. Without a plan, the
/// [`default_plan`] is used.
pub fn break_cycles(theory: &Sketch, plan: Option<&[ArrowId]>) -> Result<(Sketch, Localiser), LocaliserError> {
    let report = validate_sketch(theory);
    if !report.is_empty() {
        return Err(LocaliserError::InvalidSketch { name: theory.name.clone(), report: report.to_string() });
    }
    let mut plan: Vec<ArrowId> = match plan {
        Some(p) => p.to_vec(),
        None => default_plan(theory),
    };
    plan.sort();
    plan.dedup();
    for c in &plan {
        if !theory.arrows.contains_key(c) {
            return Err(LocaliserError::UnknownArrow(c.clone()));
        }
        if theory.is_projection(c.as_str()) {
            return Err(LocaliserError::Projection(c.clone()));
        }
    }

    let mut sk = theory.clone();
    let mut object_map: BTreeMap<ObjectId, ObjectId> = theory.objects.iter().map(|o| (o.clone(), o.clone())).collect();
    let mut arrow_map: BTreeMap<ArrowId, Path> =
        theory.arrows.keys().map(|a| (a.clone(), Path::arrow(a.clone()))).collect();
    let mut broken = Vec::new();
    for c in &plan {
        let rec = break_one(&mut sk, c)?;
        let h_img = object_map[&theory.arrows[c].src].clone();
        object_map.insert(rec.part_object.clone(), h_img.clone());
        arrow_map.insert(rec.mono.clone(), Path::identity(h_img));
        let c_img = arrow_map.remove(c).unwrap_or_else(|| Path::arrow(c.clone()));
        arrow_map.insert(rec.part_arrow.clone(), c_img);
        broken.push(rec);
    }
    sk.name = format!("{}_sp", theory.name);
    let report = validate_sketch(&sk);
    if !report.is_empty() {
        return Err(LocaliserError::Unrewritable {
            arrow: plan.first().cloned().unwrap_or_else(|| "?".into()),
            reason: format!("rewritten sketch is invalid:\n{report}"),
        });
    }
    let sk_arc = Arc::new(sk.clone());
    let underlying = SketchMorphism {
        name: format!("{}_sigma", theory.name),
        src: sk_arc,
        tgt: Arc::new(theory.clone()),
        object_map,
        arrow_map,
    };
    Ok((sk, Localiser { underlying, broken }))
}

fn break_one(sk: &mut Sketch, c: &ArrowId) -> Result<BrokenArrow, LocaliserError> {
    let decl = sk.arrows[c].clone();
    let unrewritable = |reason: String| LocaliserError::Unrewritable { arrow: c.clone(), reason };

    // Arrows directly preceding c must be projections; they get retargeted.
    let cone_eqs = sk.cone_equations();
    let free: Vec<PathEquation> = sk.equations.iter().filter(|e| !cone_eqs.contains(*e)).cloned().collect();
    let mut words: Vec<Vec<ArrowId>> = Vec::new();
    for eq in &free {
        words.push(eq.lhs.arrows().to_vec());
        words.push(eq.rhs.arrows().to_vec());
    }
    for cone in sk.cones.values() {
        for e in &cone.edges {
            words.push(e.equation().lhs.arrows().to_vec());
        }
    }
    let mut retarget: BTreeSet<ArrowId> = BTreeSet::new();
    for w in &words {
        for i in 1..w.len() {
            if w[i] == *c {
                let a = &w[i - 1];
                if !sk.is_projection(a.as_str()) {
                    return Err(unrewritable(format!("it follows `{a}`, which is not a cone projection")));
                }
                retarget.insert(a.clone());
            }
        }
    }
    for a in &retarget {
        if let Some(cone) = sk.cone_of_projection(a.as_str()) {
            if let Some(e) = cone.edges.iter().find(|e| e.to == *a) {
                return Err(unrewritable(format!(
                    "projection `{a}` would be retargeted but base edge {} -> {} of cone {} points into it",
                    e.from, e.to, cone.apex
                )));
            }
        }
    }

    let part_object = fresh_object(sk, format!("{}_part_{}", decl.src, c));
    let mono = fresh_arrow(sk, format!("h_{c}"));
    let mut part_arrow = fresh_arrow(sk, format!("{c}_part"));
    if part_arrow == mono {
        part_arrow = format!("{part_arrow}_2").into();
    }

    let rewrite = |w: &[ArrowId]| -> Result<(Vec<ArrowId>, bool), LocaliserError> {
        let mut out = Vec::with_capacity(w.len() + 1);
        let mut leading = false;
        for (i, a) in w.iter().enumerate() {
            if a == c {
                if i == 0 {
                    leading = true;
                    out.push(a.clone());
                } else if retarget.contains(&w[i - 1]) {
                    out.push(part_arrow.clone());
                } else {
                    return Err(unrewritable(format!("`{}` precedes it", w[i - 1])));
                }
                continue;
            }
            out.push(a.clone());
            if retarget.contains(a) && w.get(i + 1) != Some(c) {
                out.push(mono.clone());
            }
        }
        Ok((out, leading))
    };
    let guard = |w: Vec<ArrowId>| -> Vec<ArrowId> {
        if w.first() == Some(c) {
            std::iter::once(part_arrow.clone()).chain(w.into_iter().skip(1)).collect()
        } else {
            std::iter::once(mono.clone()).chain(w).collect()
        }
    };

    let mut equations = BTreeSet::new();
    for eq in &free {
        if !eq.lhs.mentions(c)
            && !eq.rhs.mentions(c)
            && !eq.lhs.arrows().iter().chain(eq.rhs.arrows()).any(|a| retarget.contains(a))
        {
            equations.insert(eq.clone());
            continue;
        }
        let (l, lead_l) = rewrite(eq.lhs.arrows())?;
        let (r, lead_r) = rewrite(eq.rhs.arrows())?;
        let (l, r) = if lead_l || lead_r { (guard(l), guard(r)) } else { (l, r) };
        let side = |w: Vec<ArrowId>, orig: &Path| if w.is_empty() { orig.clone() } else { Path::Arrows(w) };
        equations.insert(PathEquation::new(side(l, &eq.lhs), side(r, &eq.rhs)));
    }

    let mut cones = Vec::new();
    for cone in sk.cones.values() {
        let mut new = Cone::new(cone.apex.clone());
        new.projections = cone.projections.clone();
        for e in &cone.edges {
            let (w, _) = rewrite(e.equation().lhs.arrows())?;
            new.edges.insert(ConeEdge::new(e.from.clone(), e.to.clone(), Path::Arrows(w[1..].to_vec())));
        }
        cones.push(new);
    }

    sk.arrows.remove(c);
    let was_mono = sk.monos.remove(c);
    sk.objects.insert(part_object.clone());
    *sk = std::mem::take(sk).arrow(mono.clone(), part_object.clone(), decl.src.clone()).mono(mono.clone()).arrow(
        part_arrow.clone(),
        part_object.clone(),
        decl.tgt.clone(),
    );
    if was_mono {
        sk.monos.insert(part_arrow.clone());
    }
    for a in &retarget {
        if let Some(d) = sk.arrows.get_mut(a) {
            d.tgt = part_object.clone();
        }
    }
    sk.equations = equations;
    sk.cones.clear();
    for cone in cones {
        sk.insert_cone(cone);
    }
    Ok(BrokenArrow { original: c.clone(), mono, part_arrow, part_object })
}
