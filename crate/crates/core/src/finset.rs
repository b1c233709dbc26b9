//! Finite sets with opaque element names, total functions between them, and
//! the few constructions the rest of the crate needs: limits of finite
//! diagrams, pushouts, and congruence closure.
//!
//! Limits are filtered products computed by backtracking. Values forced by an
//! edge out of an already chosen node are propagated rather than enumerated,
//! which keeps tree-shaped diagrams linear in their output. Wide diagrams
//! with unconstrained nodes are still exponential in the number of nodes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FinSetError {
    #[error("duplicate element `{0}`")]
    Duplicate(String),
    #[error("element `{0}` does not belong to the set")]
    Foreign(String),
    #[error("function is not defined on `{0}`")]
    NotTotal(String),
    #[error("image index {index} out of range for a codomain of size {size}")]
    OutOfRange { index: usize, size: usize },
    #[error("assignment has {got} entries for a domain of size {want}")]
    WrongLength { got: usize, want: usize },
    #[error("cannot compose: codomain of the first function differs from the domain of the second")]
    ComposeMismatch,
    #[error("span legs have different domains")]
    SpanMismatch,
    #[error("diagram edge `{0}` does not match the sets at its endpoints")]
    BadEdge(String),
    #[error("diagram edge `{edge}` mentions unknown node `{node}`")]
    UnknownNode { edge: String, node: String },
}

/// A finite set of distinct names in declaration order.
#[derive(Clone, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct FinSet {
    elements: Vec<String>,
    index: HashMap<String, usize>,
}

impl FinSet {
    pub fn new<I, S>(names: I) -> Result<Self, FinSetError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = FinSet::default();
        for n in names {
            set.push(n.into())?;
        }
        Ok(set)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: String) -> Result<usize, FinSetError> {
        if self.index.contains_key(&name) {
            return Err(FinSetError::Duplicate(name));
        }
        let i = self.elements.len();
        self.index.insert(name.clone(), i);
        self.elements.push(name);
        Ok(i)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.elements[i]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &str> + '_ {
        self.elements.iter().map(String::as_str)
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }
}

impl PartialEq for FinSet {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements
    }
}

impl Eq for FinSet {}

impl fmt::Debug for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.elements.iter()).finish()
    }
}

impl TryFrom<Vec<String>> for FinSet {
    type Error = FinSetError;
    fn try_from(v: Vec<String>) -> Result<Self, Self::Error> {
        FinSet::new(v)
    }
}

impl From<FinSet> for Vec<String> {
    fn from(s: FinSet) -> Self {
        s.elements
    }
}

/// A total function between finite sets, stored as image indices.
#[derive(Clone, PartialEq, Eq)]
pub struct FinFunction {
    dom: Arc<FinSet>,
    cod: Arc<FinSet>,
    map: Vec<usize>,
}

impl FinFunction {
    pub fn new(dom: Arc<FinSet>, cod: Arc<FinSet>, map: Vec<usize>) -> Result<Self, FinSetError> {
        if map.len() != dom.len() {
            return Err(FinSetError::WrongLength { got: map.len(), want: dom.len() });
        }
        if let Some(&index) = map.iter().find(|&&i| i >= cod.len()) {
            return Err(FinSetError::OutOfRange { index, size: cod.len() });
        }
        Ok(Self { dom, cod, map })
    }

    /// Builds a function from `(x, f(x))` name pairs; every element of the
    /// domain must appear exactly once.
    pub fn from_pairs<'a, I>(dom: Arc<FinSet>, cod: Arc<FinSet>, pairs: I) -> Result<Self, FinSetError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut map = vec![usize::MAX; dom.len()];
        for (x, y) in pairs {
            let i = dom.index_of(x).ok_or_else(|| FinSetError::Foreign(x.to_owned()))?;
            let j = cod.index_of(y).ok_or_else(|| FinSetError::Foreign(y.to_owned()))?;
            map[i] = j;
        }
        if let Some(i) = map.iter().position(|&j| j == usize::MAX) {
            return Err(FinSetError::NotTotal(dom.name(i).to_owned()));
        }
        Ok(Self { dom, cod, map })
    }

    pub fn identity(s: Arc<FinSet>) -> Self {
        let map = (0..s.len()).collect();
        Self { dom: s.clone(), cod: s, map }
    }

    pub fn dom(&self) -> &Arc<FinSet> {
        &self.dom
    }

    pub fn cod(&self) -> &Arc<FinSet> {
        &self.cod
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn at(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn apply(&self, x: &str) -> Option<&str> {
        self.dom.index_of(x).map(|i| self.cod.name(self.map[i]))
    }

    /// `self` then `next`, i.e. `next . self`.
    pub fn compose(&self, next: &FinFunction) -> Result<FinFunction, FinSetError> {
        if *self.cod != *next.dom {
            return Err(FinSetError::ComposeMismatch);
        }
        Ok(FinFunction {
            dom: self.dom.clone(),
            cod: next.cod.clone(),
            map: self.map.iter().map(|&i| next.map[i]).collect(),
        })
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.cod.len()];
        self.map.iter().all(|&j| !std::mem::replace(&mut seen[j], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.cod.len()];
        for &j in &self.map {
            seen[j] = true;
        }
        seen.into_iter().all(|b| b)
    }

    pub fn is_bijection(&self) -> bool {
        self.dom.len() == self.cod.len() && self.is_injective()
    }

    pub fn inverse(&self) -> Option<FinFunction> {
        if !self.is_bijection() {
            return None;
        }
        let mut inv = vec![0; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            inv[j] = i;
        }
        Some(FinFunction { dom: self.cod.clone(), cod: self.dom.clone(), map: inv })
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.map.iter().enumerate().map(|(i, &j)| (self.dom.name(i), self.cod.name(j)))
    }
}

impl fmt::Debug for FinFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.pairs()).finish()
    }
}

pub fn compose(f: &FinFunction, g: &FinFunction) -> Result<FinFunction, FinSetError> {
    f.compose(g)
}

pub fn identity(s: Arc<FinSet>) -> FinFunction {
    FinFunction::identity(s)
}

pub fn is_bijection(f: &FinFunction) -> bool {
    f.is_bijection()
}

#[derive(Clone, Debug)]
pub struct DiagramEdge {
    pub src: String,
    pub tgt: String,
    pub func: FinFunction,
}

/// A finite diagram of finite sets.
#[derive(Clone, Debug, Default)]
pub struct FinDiagram {
    pub nodes: BTreeMap<String, Arc<FinSet>>,
    pub edges: BTreeMap<String, DiagramEdge>,
}

impl FinDiagram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(mut self, id: impl Into<String>, set: Arc<FinSet>) -> Self {
        self.nodes.insert(id.into(), set);
        self
    }

    pub fn edge(
        mut self,
        id: impl Into<String>,
        src: impl Into<String>,
        tgt: impl Into<String>,
        func: FinFunction,
    ) -> Self {
        self.edges.insert(id.into(), DiagramEdge { src: src.into(), tgt: tgt.into(), func });
        self
    }

    pub fn validate(&self) -> Result<(), FinSetError> {
        for (id, e) in &self.edges {
            let (s, t) = match (self.nodes.get(&e.src), self.nodes.get(&e.tgt)) {
                (Some(s), Some(t)) => (s, t),
                (None, _) => return Err(FinSetError::UnknownNode { edge: id.clone(), node: e.src.clone() }),
                (_, None) => return Err(FinSetError::UnknownNode { edge: id.clone(), node: e.tgt.clone() }),
            };
            if **s != **e.func.dom() || **t != **e.func.cod() {
                return Err(FinSetError::BadEdge(id.clone()));
            }
        }
        Ok(())
    }
}

/// The limit of a [`FinDiagram`]: the set of compatible families, with one
/// projection per node.
#[derive(Clone, Debug)]
pub struct Limit {
    pub set: Arc<FinSet>,
    pub projections: BTreeMap<String, FinFunction>,
    /// Families as indices, one component per node in node-id order.
    pub tuples: Vec<Vec<usize>>,
}

impl Limit {
    /// Position of the family with the given components (node-id order).
    pub fn find(&self, tuple: &[usize]) -> Option<usize> {
        self.tuples.binary_search_by(|t| t.as_slice().cmp(tuple)).ok()
    }
}

/// Canonical name of a family: its component names in node-id order.
pub fn tuple_name<'a>(components: impl IntoIterator<Item = &'a str>) -> String {
    let parts: Vec<&str> = components.into_iter().collect();
    format!("({})", parts.join(","))
}

pub fn limit(d: &FinDiagram) -> Result<Limit, FinSetError> {
    d.validate()?;
    let node_ids: Vec<&String> = d.nodes.keys().collect();
    let pos: HashMap<&str, usize> = node_ids.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let sizes: Vec<usize> = d.nodes.values().map(|s| s.len()).collect();
    let edges: Vec<SolverEdge<'_>> = d
        .edges
        .values()
        .map(|e| SolverEdge {
            src: pos[e.src.as_str()],
            tgt: pos[e.tgt.as_str()],
            eval: Box::new(move |i| Some(e.func.at(i))),
        })
        .collect();
    let tuples = limit_tuples(&sizes, &edges);

    let sets: Vec<&Arc<FinSet>> = d.nodes.values().collect();
    let mut set = FinSet::empty();
    for t in &tuples {
        set.push(tuple_name(t.iter().enumerate().map(|(n, &i)| sets[n].name(i))))?;
    }
    let set = Arc::new(set);
    let mut projections = BTreeMap::new();
    for (n, id) in node_ids.iter().enumerate() {
        let map = tuples.iter().map(|t| t[n]).collect();
        projections.insert((*id).clone(), FinFunction::new(set.clone(), sets[n].clone(), map)?);
    }
    Ok(Limit { set, projections, tuples })
}

/// An edge for [`limit_tuples`]: a possibly partial function between node
/// carriers given by index.
pub(crate) struct SolverEdge<'a> {
    pub src: usize,
    pub tgt: usize,
    pub eval: Box<dyn Fn(usize) -> Option<usize> + 'a>,
}

/// All families `t` with `t[n] < sizes[n]` and `eval_e(t[src]) == Some(t[tgt])`
/// for every edge, sorted lexicographically.
pub(crate) fn limit_tuples(sizes: &[usize], edges: &[SolverEdge<'_>]) -> Vec<Vec<usize>> {
    limit_tuples_capped(sizes, edges, usize::MAX).unwrap_or_default()
}

/// Like [`limit_tuples`], but gives up with `None` once more than `cap`
/// tuples have been found.
pub(crate) fn limit_tuples_capped(sizes: &[usize], edges: &[SolverEdge<'_>], cap: usize) -> Option<Vec<Vec<usize>>> {
    let n = sizes.len();
    // Edge tables: forward images and preimage buckets.
    let forward: Vec<Vec<Option<usize>>> =
        edges.iter().map(|e| (0..sizes[e.src]).map(|i| (e.eval)(i)).collect()).collect();
    let mut preimage: Vec<HashMap<usize, Vec<usize>>> = vec![HashMap::new(); edges.len()];
    for (k, table) in forward.iter().enumerate() {
        for (i, img) in table.iter().enumerate() {
            if let Some(j) = img {
                preimage[k].entry(*j).or_default().push(i);
            }
        }
    }
    let mut out = Vec::new();
    let mut state = vec![None; n];
    search(sizes, edges, &forward, &preimage, &mut state, &mut out, cap);
    if out.len() > cap {
        return None;
    }
    out.sort();
    Some(out)
}

fn search(
    sizes: &[usize],
    edges: &[SolverEdge<'_>],
    forward: &[Vec<Option<usize>>],
    preimage: &[HashMap<usize, Vec<usize>>],
    state: &mut Vec<Option<usize>>,
    out: &mut Vec<Vec<usize>>,
    cap: usize,
) {
    if out.len() > cap {
        return;
    }
    let saved = state.clone();
    // Propagate forced values and check fully assigned edges.
    loop {
        let mut changed = false;
        for (k, e) in edges.iter().enumerate() {
            if let Some(i) = state[e.src] {
                match (forward[k][i], state[e.tgt]) {
                    (None, _) => {
                        *state = saved;
                        return;
                    }
                    (Some(j), None) => {
                        state[e.tgt] = Some(j);
                        changed = true;
                    }
                    (Some(j), Some(v)) if j != v => {
                        *state = saved;
                        return;
                    }
                    _ => {}
                }
            }
        }
        if !changed {
            break;
        }
    }

    let unassigned: Vec<usize> = (0..sizes.len()).filter(|&v| state[v].is_none()).collect();
    if unassigned.is_empty() {
        out.push(state.iter().map(|v| v.unwrap_or_default()).collect());
        *state = saved;
        return;
    }

    // Prefer a node pinned by an edge into an assigned node; otherwise the
    // smallest carrier.
    let pinned = unassigned.iter().copied().find_map(|v| {
        edges.iter().enumerate().find(|(_, e)| e.src == v && state[e.tgt].is_some()).map(|(k, e)| (v, k, e.tgt))
    });
    let (node, candidates): (usize, Vec<usize>) = match pinned {
        Some((v, k, t)) => {
            let want = state[t].unwrap_or_default();
            (v, preimage[k].get(&want).cloned().unwrap_or_default())
        }
        None => {
            let v = unassigned.iter().copied().min_by_key(|&v| (sizes[v], v)).unwrap_or_default();
            (v, (0..sizes[v]).collect())
        }
    };
    for c in candidates {
        state[node] = Some(c);
        search(sizes, edges, forward, preimage, state, out, cap);
        state[node] = None;
    }
    *state = saved;
}

/// Disjoint-set forest over `0..n`. The representative of a class is always
/// its smallest index, so callers control the choice through numbering.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn grow(&mut self, n: usize) {
        let start = self.parent.len();
        self.parent.extend(start..n);
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    /// Merges the classes of `a` and `b`; returns false if already merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// A quotient of a finite set: every element mapped to its class
/// representative (the lexicographically least member).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quotient {
    pub rep: BTreeMap<String, String>,
}

impl Quotient {
    pub fn rep_of(&self, x: &str) -> Option<&str> {
        self.rep.get(x).map(String::as_str)
    }

    pub fn num_classes(&self) -> usize {
        self.rep.values().collect::<BTreeSet<_>>().len()
    }

    pub fn classes(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (x, r) in &self.rep {
            out.entry(r.as_str()).or_default().push(x.as_str());
        }
        out
    }
}

/// Finest equivalence on `s` containing `pairs`.
pub fn congruence_closure(s: &FinSet, pairs: &[(&str, &str)]) -> Result<Quotient, FinSetError> {
    let mut uf = UnionFind::new(s.len());
    for &(a, b) in pairs {
        let i = s.index_of(a).ok_or_else(|| FinSetError::Foreign(a.to_owned()))?;
        let j = s.index_of(b).ok_or_else(|| FinSetError::Foreign(b.to_owned()))?;
        uf.union(i, j);
    }
    let mut least: HashMap<usize, &str> = HashMap::new();
    for (i, name) in s.iter().enumerate() {
        let r = uf.find(i);
        let e = least.entry(r).or_insert(name);
        if name < *e {
            *e = name;
        }
    }
    let rep = s.iter().enumerate().map(|(i, name)| (name.to_owned(), least[&uf.find(i)].to_owned())).collect();
    Ok(Quotient { rep })
}

/// Equivalence classes of `B + C` under `f(a) ~ g(a)`.
#[derive(Clone, Debug)]
pub struct PushoutClasses {
    /// Class of each element of `B`.
    pub of_left: Vec<usize>,
    /// Class of each element of `C`.
    pub of_right: Vec<usize>,
    /// Members of each class, as `(B indices, C indices)`. Classes are
    /// numbered by first appearance scanning `B` then `C`.
    pub members: Vec<(Vec<usize>, Vec<usize>)>,
}

pub fn pushout_classes(f: &FinFunction, g: &FinFunction) -> Result<PushoutClasses, FinSetError> {
    if **f.dom() != **g.dom() {
        return Err(FinSetError::SpanMismatch);
    }
    let nb = f.cod().len();
    let nc = g.cod().len();
    let mut uf = UnionFind::new(nb + nc);
    for a in 0..f.dom().len() {
        uf.union(f.at(a), nb + g.at(a));
    }
    let mut class_of_root: HashMap<usize, usize> = HashMap::new();
    let mut members: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut of_left = Vec::with_capacity(nb);
    let mut of_right = Vec::with_capacity(nc);
    for x in 0..nb + nc {
        let r = uf.find(x);
        let k = *class_of_root.entry(r).or_insert_with(|| {
            members.push((Vec::new(), Vec::new()));
            members.len() - 1
        });
        if x < nb {
            members[k].0.push(x);
            of_left.push(k);
        } else {
            members[k].1.push(x - nb);
            of_right.push(k);
        }
    }
    Ok(PushoutClasses { of_left, of_right, members })
}

#[derive(Clone, Debug)]
pub struct Pushout {
    pub set: Arc<FinSet>,
    pub inj_left: FinFunction,
    pub inj_right: FinFunction,
}

/// Pushout of the span `B <-f- A -g-> C`.
///
/// Each class is named after its lexicographically least pre-image; a name
/// already taken by an earlier class gets its source tag (`@B` or `@C`).
pub fn pushout(f: &FinFunction, g: &FinFunction) -> Result<Pushout, FinSetError> {
    let classes = pushout_classes(f, g)?;
    let (b, c) = (f.cod(), g.cod());
    let mut set = FinSet::empty();
    for (bs, cs) in &classes.members {
        let best_b = bs.iter().map(|&i| b.name(i)).min();
        let best_c = cs.iter().map(|&i| c.name(i)).min();
        let (name, tag) = match (best_b, best_c) {
            (Some(x), Some(y)) if y < x => (y, "C"),
            (Some(x), _) => (x, "B"),
            (None, Some(y)) => (y, "C"),
            (None, None) => unreachable!("pushout classes are non-empty"),
        };
        let mut candidate = name.to_owned();
        if set.contains(&candidate) {
            candidate = format!("{name}@{tag}");
            let mut n = 2;
            while set.contains(&candidate) {
                candidate = format!("{name}@{tag}{n}");
                n += 1;
            }
        }
        set.push(candidate)?;
    }
    let set = Arc::new(set);
    Ok(Pushout {
        inj_left: FinFunction::new(b.clone(), set.clone(), classes.of_left)?,
        inj_right: FinFunction::new(c.clone(), set.clone(), classes.of_right)?,
        set,
    })
}
