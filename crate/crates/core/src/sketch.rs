//! Finite limit sketches: the syntactic presentation of a logic.
//!
//! A [`Sketch`] never materializes the category it presents. Composites exist
//! only through [`PathEquation`]s, and limits only through [`Cone`]s whose
//! commutation equations are stored alongside the user's equations.
//!
//! Paths are written in diagrammatic order: `[s, k]` means "first `s`, then
//! `k`".

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{ArrowId, ObjectId};
use crate::report::{ValidationReport, Violation};

/// A composable chain of arrows, or the identity path at an object.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Path {
    Identity { identity: ObjectId },
    Arrows(Vec<ArrowId>),
}

impl Path {
    pub fn identity(obj: impl Into<ObjectId>) -> Self {
        Path::Identity { identity: obj.into() }
    }

    pub fn arrow(a: impl Into<ArrowId>) -> Self {
        Path::Arrows(vec![a.into()])
    }

    pub fn of<I, A>(arrows: I) -> Self
    where
        I: IntoIterator<Item = A>,
        A: Into<ArrowId>,
    {
        Path::Arrows(arrows.into_iter().map(Into::into).collect())
    }

    /// Arrows in application order; empty for identity paths.
    pub fn arrows(&self) -> &[ArrowId] {
        match self {
            Path::Identity { .. } => &[],
            Path::Arrows(a) => a,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.arrows().is_empty()
    }

    pub fn len(&self) -> usize {
        self.arrows().len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows().is_empty()
    }

    pub fn mentions(&self, a: &ArrowId) -> bool {
        self.arrows().contains(a)
    }

    /// `self` followed by `other`. Identity paths are units.
    pub fn then(&self, other: &Path) -> Path {
        match (self, other) {
            (Path::Identity { .. }, _) => other.clone(),
            (_, Path::Identity { .. }) => self.clone(),
            (Path::Arrows(a), Path::Arrows(b)) => Path::Arrows(a.iter().chain(b.iter()).cloned().collect()),
        }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Path::Identity { identity } => write!(f, "id({identity})"),
            Path::Arrows(a) => {
                let names: Vec<&str> = a.iter().map(ArrowId::as_str).collect();
                f.write_str(&names.join("."))
            }
        }
    }
}

impl fmt::Debug for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArrowDecl {
    pub id: ArrowId,
    pub src: ObjectId,
    pub tgt: ObjectId,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PathEquation {
    pub lhs: Path,
    pub rhs: Path,
}

impl PathEquation {
    pub fn new(lhs: Path, rhs: Path) -> Self {
        Self { lhs, rhs }
    }
}

impl fmt::Display for PathEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// A base-diagram arrow of a cone, between two base nodes.
///
/// Base nodes are named by their projection arrow, so a product with a
/// repeated factor (`For x For`) has two distinct nodes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConeEdge {
    pub from: ArrowId,
    pub to: ArrowId,
    pub path: Path,
}

impl ConeEdge {
    pub fn new(from: impl Into<ArrowId>, to: impl Into<ArrowId>, path: Path) -> Self {
        Self { from: from.into(), to: to.into(), path }
    }

    /// The commutation equation `from . path = to` this edge requires.
    pub fn equation(&self) -> PathEquation {
        PathEquation::new(Path::arrow(self.from.clone()).then(&self.path), Path::arrow(self.to.clone()))
    }
}

/// A distinguished cone: in every realization the apex must be the limit of
/// the base diagram.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cone {
    pub apex: ObjectId,
    pub projections: BTreeSet<ArrowId>,
    pub edges: BTreeSet<ConeEdge>,
}

impl Cone {
    pub fn new(apex: impl Into<ObjectId>) -> Self {
        Self { apex: apex.into(), projections: BTreeSet::new(), edges: BTreeSet::new() }
    }

    pub fn projection(mut self, p: impl Into<ArrowId>) -> Self {
        self.projections.insert(p.into());
        self
    }

    pub fn edge(mut self, from: impl Into<ArrowId>, to: impl Into<ArrowId>, path: Path) -> Self {
        self.edges.insert(ConeEdge::new(from, to, path));
        self
    }

    pub fn required_equations(&self) -> impl Iterator<Item = PathEquation> + '_ {
        self.edges.iter().map(ConeEdge::equation)
    }
}

/// A finite limit sketch.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sketch {
    pub name: String,
    pub objects: BTreeSet<ObjectId>,
    pub arrows: BTreeMap<ArrowId, ArrowDecl>,
    pub monos: BTreeSet<ArrowId>,
    /// Cones keyed by apex.
    pub cones: BTreeMap<ObjectId, Cone>,
    /// All equations, including the ones cones require.
    pub equations: BTreeSet<PathEquation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("unknown arrow `{arrow}` at position {position}")]
    UnknownArrow { position: usize, arrow: ArrowId },
    #[error("path breaks at position {position}: `{prev}` ends at {prev_tgt} but `{next}` starts at {next_src}")]
    NotComposable { position: usize, prev: ArrowId, prev_tgt: ObjectId, next: ArrowId, next_src: ObjectId },
    #[error("unknown object `{0}` anchoring an identity path")]
    UnknownObject(ObjectId),
    #[error("empty path without an anchor object")]
    Unanchored,
}

impl Sketch {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), ..Default::default() }
    }

    pub fn object(mut self, o: impl Into<ObjectId>) -> Self {
        self.objects.insert(o.into());
        self
    }

    pub fn arrow(mut self, id: impl Into<ArrowId>, src: impl Into<ObjectId>, tgt: impl Into<ObjectId>) -> Self {
        let id = id.into();
        self.arrows.insert(id.clone(), ArrowDecl { id, src: src.into(), tgt: tgt.into() });
        self
    }

    pub fn mono(mut self, id: impl Into<ArrowId>) -> Self {
        self.monos.insert(id.into());
        self
    }

    pub fn equation(mut self, lhs: Path, rhs: Path) -> Self {
        self.equations.insert(PathEquation::new(lhs, rhs));
        self
    }

    /// Adds a cone together with the commutation equations it requires.
    pub fn cone(mut self, cone: Cone) -> Self {
        self.insert_cone(cone);
        self
    }

    pub fn insert_cone(&mut self, cone: Cone) {
        for eq in cone.required_equations() {
            self.equations.insert(eq);
        }
        self.cones.insert(cone.apex.clone(), cone);
    }

    pub fn arrow_decl(&self, a: &str) -> Option<&ArrowDecl> {
        self.arrows.get(a)
    }

    pub fn src(&self, a: &str) -> Option<&ObjectId> {
        self.arrows.get(a).map(|d| &d.src)
    }

    pub fn tgt(&self, a: &str) -> Option<&ObjectId> {
        self.arrows.get(a).map(|d| &d.tgt)
    }

    pub fn is_mono(&self, a: &str) -> bool {
        self.monos.contains(a)
    }

    /// The cone (by apex) having `a` as a projection, if any.
    pub fn cone_of_projection(&self, a: &str) -> Option<&Cone> {
        self.cones.values().find(|c| c.projections.contains(a))
    }

    pub fn is_projection(&self, a: &str) -> bool {
        self.cone_of_projection(a).is_some()
    }

    /// Equations that some cone requires. The DSL leaves these implicit.
    pub fn cone_equations(&self) -> BTreeSet<PathEquation> {
        self.cones.values().flat_map(|c| c.required_equations()).collect()
    }

    /// Equations stated on their own, i.e. not synthesized from a cone.
    pub fn free_equations(&self) -> Vec<&PathEquation> {
        let implied = self.cone_equations();
        self.equations.iter().filter(|e| !implied.contains(e)).collect()
    }

    pub fn path_endpoints(&self, path: &Path) -> Result<(ObjectId, ObjectId), PathError> {
        path_endpoints(self, path)
    }
}

/// Source and target of a composable path.
pub fn path_endpoints(sk: &Sketch, path: &Path) -> Result<(ObjectId, ObjectId), PathError> {
    match path {
        Path::Identity { identity } => {
            if sk.objects.contains(identity) {
                Ok((identity.clone(), identity.clone()))
            } else {
                Err(PathError::UnknownObject(identity.clone()))
            }
        }
        Path::Arrows(arrows) => {
            let mut decls = Vec::with_capacity(arrows.len());
            for (position, a) in arrows.iter().enumerate() {
                let d = sk.arrows.get(a).ok_or_else(|| PathError::UnknownArrow { position, arrow: a.clone() })?;
                decls.push(d);
            }
            let (first, last) = match (decls.first(), decls.last()) {
                (Some(f), Some(l)) => (f, l),
                _ => return Err(PathError::Unanchored),
            };
            for (position, w) in decls.windows(2).enumerate() {
                if w[0].tgt != w[1].src {
                    return Err(PathError::NotComposable {
                        position: position + 1,
                        prev: w[0].id.clone(),
                        prev_tgt: w[0].tgt.clone(),
                        next: w[1].id.clone(),
                        next_src: w[1].src.clone(),
                    });
                }
            }
            Ok((first.src.clone(), last.tgt.clone()))
        }
    }
}

/// Checks every structural invariant of a sketch. Never fails: violations
/// are returned as data, in a deterministic order.
pub fn validate_sketch(sk: &Sketch) -> ValidationReport {
    let mut report = ValidationReport::new();

    for d in sk.arrows.values() {
        if !sk.objects.contains(&d.src) {
            report.push(Violation::new("unknown-source", &d.id, format!("unknown source `{}`", d.src)));
        }
        if !sk.objects.contains(&d.tgt) {
            report.push(Violation::new("unknown-target", &d.id, format!("unknown target `{}`", d.tgt)));
        }
    }

    for m in &sk.monos {
        if !sk.arrows.contains_key(m) {
            report.push(Violation::new("unknown-mono", m, "mono marker on an undeclared arrow"));
        }
    }

    for eq in &sk.equations {
        let entity = format!("equation {eq}");
        if eq.lhs.is_identity() {
            report.push(Violation::new("empty-lhs", &entity, "left-hand side must be a non-empty path"));
        }
        match (path_endpoints(sk, &eq.lhs), path_endpoints(sk, &eq.rhs)) {
            (Ok(l), Ok(r)) => {
                // An identity right-hand side only fixes the object it sits at.
                let mismatch = if eq.rhs.is_identity() { l.0 != r.0 || l.1 != r.1 } else { l != r };
                if mismatch {
                    report.push(Violation::new(
                        "endpoint-mismatch",
                        &entity,
                        format!("lhs runs {} -> {} but rhs runs {} -> {}", l.0, l.1, r.0, r.1),
                    ));
                }
            }
            (l, r) => {
                for e in [l.err(), r.err()].into_iter().flatten() {
                    report.push(Violation::new("bad-path", &entity, e.to_string()));
                }
            }
        }
    }

    let mut owner: BTreeMap<&ArrowId, &ObjectId> = BTreeMap::new();
    for (key, cone) in &sk.cones {
        let entity = format!("cone {key}");
        if *key != cone.apex {
            report.push(Violation::new(
                "cone-key",
                &entity,
                format!("cone stored under `{key}` has apex `{}`", cone.apex),
            ));
        }
        if !sk.objects.contains(&cone.apex) {
            report.push(Violation::new("unknown-apex", &entity, format!("apex `{}` is not declared", cone.apex)));
        }
        for p in &cone.projections {
            match sk.arrows.get(p) {
                None => report.push(Violation::new(
                    "unknown-projection",
                    &entity,
                    format!("projection `{p}` is not declared"),
                )),
                Some(d) if d.src != cone.apex => report.push(Violation::new(
                    "projection-source",
                    &entity,
                    format!("projection `{p}` starts at `{}`, not at the apex", d.src),
                )),
                Some(_) => {}
            }
            if let Some(prev) = owner.insert(p, &cone.apex) {
                report.push(Violation::new(
                    "shared-projection",
                    &entity,
                    format!("projection `{p}` already belongs to cone `{prev}`"),
                ));
            }
        }
        for e in &cone.edges {
            for end in [&e.from, &e.to] {
                if !cone.projections.contains(end) {
                    report.push(Violation::new(
                        "unknown-base-node",
                        &entity,
                        format!("base edge mentions `{end}`, which is not a projection of this cone"),
                    ));
                }
            }
            if e.path.is_identity() {
                report.push(Violation::new("empty-base-edge", &entity, "base edges must be non-empty paths"));
                continue;
            }
            match path_endpoints(sk, &e.path) {
                Err(err) => report.push(Violation::new("bad-path", &entity, format!("base edge {}: {err}", e.path))),
                Ok((s, t)) => {
                    let want_s = sk.tgt(e.from.as_str());
                    let want_t = sk.tgt(e.to.as_str());
                    if want_s.is_some_and(|w| *w != s) || want_t.is_some_and(|w| *w != t) {
                        report.push(Violation::new(
                            "base-edge-endpoints",
                            &entity,
                            format!("base edge {} -> {} along {} has the wrong endpoints", e.from, e.to, e.path),
                        ));
                    }
                }
            }
            let eq = e.equation();
            if !sk.equations.contains(&eq) {
                report.push(Violation::new(
                    "missing-cone-equation",
                    &entity,
                    format!("required equation `{eq}` is not present"),
                ));
            }
        }
    }

    report
}

/// The three sketches used throughout the examples and tests.
#[derive(Clone, Debug)]
pub struct BuiltinSketches {
    pub graph: Sketch,
    pub magma: Sketch,
    pub mp_theory: Sketch,
}

impl BuiltinSketches {
    pub fn get(&self, name: &str) -> Option<&Sketch> {
        match name {
            "graph" => Some(&self.graph),
            "magma" => Some(&self.magma),
            "mp_theory" => Some(&self.mp_theory),
            _ => None,
        }
    }

    pub fn all(&self) -> [&Sketch; 3] {
        [&self.graph, &self.magma, &self.mp_theory]
    }
}

pub fn builtin_sketches() -> BuiltinSketches {
    BuiltinSketches { graph: graph_sketch(), magma: magma_sketch(), mp_theory: mp_theory_sketch() }
}

/// Directed graphs: `s, t: E -> V`.
pub fn graph_sketch() -> Sketch {
    Sketch::new("graph").object("E").object("V").arrow("s", "E", "V").arrow("t", "E", "V")
}

/// Magmas: `M2 = M x M` with projections `s, t` and a multiplication `k`.
pub fn magma_sketch() -> Sketch {
    Sketch::new("magma")
        .object("M")
        .object("M2")
        .arrow("s", "M2", "M")
        .arrow("t", "M2", "M")
        .arrow("k", "M2", "M")
        .cone(Cone::new("M2").projection("s").projection("t"))
}

/// The logic with implication formation (IM) and modus ponens (MP).
///
/// * `inc: Theo >-> For` makes theorems a subset of formulas.
/// * `H_IM = For x For` (projections `pi1`, `pi2`), `C_IM ~ For` via `cim`,
///   and `c_IM: H_IM -> C_IM` builds `p => q`.
/// * `C_MP ~ Theo` via `cmp`. `H_MP` is the limit of the triples
///   `(p, q, r)` with `p, r` theorems and `r = p => q`: nodes `mp_t1`,
///   `mp_t2: Theo`, `mp_q`, `mp_p`, `mp_r: For` and `mp_pair: H_IM`.
/// * `c_MP: H_MP -> C_MP` concludes `q`: `c_MP.cmp.inc = mp_q`.
pub fn mp_theory_sketch() -> Sketch {
    Sketch::new("mp_theory")
        .object("For")
        .object("Theo")
        .object("H_IM")
        .object("C_IM")
        .object("H_MP")
        .object("C_MP")
        .arrow("inc", "Theo", "For")
        .mono("inc")
        .arrow("pi1", "H_IM", "For")
        .arrow("pi2", "H_IM", "For")
        .arrow("cim", "C_IM", "For")
        .arrow("c_IM", "H_IM", "C_IM")
        .arrow("cmp", "C_MP", "Theo")
        .arrow("c_MP", "H_MP", "C_MP")
        .arrow("mp_t1", "H_MP", "Theo")
        .arrow("mp_t2", "H_MP", "Theo")
        .arrow("mp_q", "H_MP", "For")
        .arrow("mp_p", "H_MP", "For")
        .arrow("mp_r", "H_MP", "For")
        .arrow("mp_pair", "H_MP", "H_IM")
        .cone(Cone::new("H_IM").projection("pi1").projection("pi2"))
        .cone(Cone::new("C_IM").projection("cim"))
        .cone(Cone::new("C_MP").projection("cmp"))
        .cone(
            Cone::new("H_MP")
                .projection("mp_t1")
                .projection("mp_t2")
                .projection("mp_q")
                .projection("mp_p")
                .projection("mp_r")
                .projection("mp_pair")
                .edge("mp_t1", "mp_p", Path::arrow("inc"))
                .edge("mp_t2", "mp_r", Path::arrow("inc"))
                .edge("mp_pair", "mp_p", Path::arrow("pi1"))
                .edge("mp_pair", "mp_q", Path::arrow("pi2"))
                .edge("mp_pair", "mp_r", Path::of(["c_IM", "cim"])),
        )
        .equation(Path::of(["c_MP", "cmp", "inc"]), Path::arrow("mp_q"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_sketch_is_valid() {
        let g = graph_sketch();
        assert!(validate_sketch(&g).is_empty());
        assert_eq!(g.objects.len(), 2);
        assert_eq!(g.arrows.len(), 2);
        assert!(g.cones.is_empty());
    }

    #[test]
    fn empty_sketch_is_valid() {
        assert!(validate_sketch(&Sketch::new("X")).is_empty());
    }

    #[test]
    fn undeclared_target_is_one_violation() {
        let sk = Sketch::new("bad").object("E").arrow("s", "E", "V");
        let r = validate_sketch(&sk);
        assert_eq!(r.len(), 1);
        assert_eq!(r.violations[0].rule, "unknown-target");
        assert!(r.violations[0].message.contains("unknown target"));
    }

    #[test]
    fn path_endpoints_cases() {
        let g = graph_sketch();
        assert_eq!(path_endpoints(&g, &Path::arrow("s")).unwrap(), ("E".into(), "V".into()));
        assert_eq!(path_endpoints(&g, &Path::identity("V")).unwrap(), ("V".into(), "V".into()));
        match path_endpoints(&g, &Path::of(["t", "s"])) {
            Err(PathError::NotComposable { position, .. }) => assert_eq!(position, 1),
            other => panic!("expected break at 1, got {other:?}"),
        }
        assert!(matches!(
            path_endpoints(&g, &Path::of(["s", "nope"])),
            Err(PathError::UnknownArrow { position: 1, .. })
        ));
    }

    #[test]
    fn magma_shape() {
        let m = magma_sketch();
        assert!(validate_sketch(&m).is_empty());
        assert_eq!(m.objects.iter().map(ObjectId::as_str).collect::<Vec<_>>(), ["M", "M2"]);
        let cone = &m.cones["M2"];
        assert_eq!(cone.projections.len(), 2);
        assert!(cone.edges.is_empty());
        assert_eq!(m.arrows["k"].src, "M2");
    }

    #[test]
    fn mp_theory_is_valid() {
        let r = validate_sketch(&mp_theory_sketch());
        assert!(r.is_empty(), "{r}");
    }

    #[test]
    fn cone_projection_must_leave_apex() {
        let sk = Sketch::new("x").object("A").object("B").arrow("p", "B", "A").cone(Cone::new("A").projection("p"));
        assert!(validate_sketch(&sk).has_rule("projection-source"));
    }

    #[test]
    fn missing_cone_equation_is_reported() {
        let mut sk = mp_theory_sketch();
        let eq = ConeEdge::new("mp_t1", "mp_p", Path::arrow("inc")).equation();
        sk.equations.remove(&eq);
        assert!(validate_sketch(&sk).has_rule("missing-cone-equation"));
    }

    #[test]
    fn cone_equations_are_valid_equations() {
        for sk in builtin_sketches().all() {
            for eq in sk.cone_equations() {
                let only = Sketch { equations: [eq].into_iter().collect(), ..sk.clone() };
                let r = validate_sketch(&only);
                assert!(!r.has_rule("bad-path") && !r.has_rule("endpoint-mismatch"), "{r}");
            }
        }
    }
}
