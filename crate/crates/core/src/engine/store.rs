//! Mutable partial realizations with element identification.
//!
//! Elements carry global ids; identifications go through a union-find whose
//! representative is the oldest id, so names given by the user outlive the
//! fresh names made up during repair.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::finset::{limit_tuples_capped, FinFunction, FinSet, SolverEdge, UnionFind};
use crate::ids::{ArrowId, ObjectId};
use crate::realization::{Presentation, Realization};
use crate::sketch::{path_endpoints, Sketch};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Overflow;

struct ArrowInfo {
    src: usize,
    tgt: usize,
}

struct ConeInfo {
    apex: usize,
    /// Projection arrows, in id order.
    projs: Vec<usize>,
    /// Base edges as (from node, to node, path) over projection positions.
    edges: Vec<(usize, usize, Vec<usize>)>,
}

/// What one repair changed, by element id.
#[derive(Debug, Default, Clone)]
pub(crate) struct Changes {
    pub added: Vec<usize>,
    /// (kept, merged) pairs.
    pub identified: Vec<(usize, usize)>,
}

pub(crate) struct Store {
    pub sk: Arc<Sketch>,
    objects: Vec<ObjectId>,
    obj_ix: HashMap<ObjectId, usize>,
    arrow_ids: Vec<ArrowId>,
    arrow_ix: HashMap<ArrowId, usize>,
    arrows: Vec<ArrowInfo>,
    /// Equations as (domain object, lhs word, rhs word).
    eqs: Vec<(usize, Vec<usize>, Vec<usize>)>,
    cones: Vec<ConeInfo>,
    monos: Vec<usize>,
    obj_of: Vec<usize>,
    names: Vec<String>,
    uf: UnionFind,
    members: Vec<Vec<usize>>,
    act: Vec<HashMap<usize, usize>>,
    by_name: HashMap<(usize, String), usize>,
    counter: u64,
    dirty: bool,
    pub max_elements: usize,
    pub changes: Changes,
}

enum Eval {
    Done(usize),
    /// Stuck before step `at`, holding element `elem`.
    Stuck {
        at: usize,
        elem: usize,
    },
}

impl Store {
    pub fn new(sk: Arc<Sketch>, max_elements: usize) -> Self {
        let objects: Vec<ObjectId> = sk.objects.iter().cloned().collect();
        let obj_ix: HashMap<ObjectId, usize> = objects.iter().enumerate().map(|(i, o)| (o.clone(), i)).collect();
        let arrow_ids: Vec<ArrowId> = sk.arrows.keys().cloned().collect();
        let arrow_ix: HashMap<ArrowId, usize> = arrow_ids.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        let arrows = sk.arrows.values().map(|d| ArrowInfo { src: obj_ix[&d.src], tgt: obj_ix[&d.tgt] }).collect();
        let word = |p: &crate::sketch::Path| p.arrows().iter().map(|a| arrow_ix[a]).collect::<Vec<_>>();
        let eqs = sk
            .equations
            .iter()
            .filter_map(|e| {
                let (s, _) = path_endpoints(&sk, &e.lhs).ok()?;
                Some((obj_ix[&s], word(&e.lhs), word(&e.rhs)))
            })
            .collect();
        let cones = sk
            .cones
            .values()
            .map(|c| {
                let projs: Vec<usize> = c.projections.iter().map(|p| arrow_ix[p]).collect();
                let pos = |a: &ArrowId| projs.iter().position(|&p| p == arrow_ix[a]).unwrap_or_default();
                let edges = c.edges.iter().map(|e| (pos(&e.from), pos(&e.to), word(&e.path))).collect();
                ConeInfo { apex: obj_ix[&c.apex], projs, edges }
            })
            .collect();
        let monos = sk.monos.iter().filter_map(|m| arrow_ix.get(m).copied()).collect();
        let n_obj = objects.len();
        let n_arr = arrow_ids.len();
        Self {
            sk,
            objects,
            obj_ix,
            arrow_ids,
            arrow_ix,
            arrows,
            eqs,
            cones,
            monos,
            obj_of: Vec::new(),
            names: Vec::new(),
            uf: UnionFind::new(0),
            members: vec![Vec::new(); n_obj],
            act: vec![HashMap::new(); n_arr],
            by_name: HashMap::new(),
            counter: 1,
            dirty: false,
            max_elements,
            changes: Changes::default(),
        }
    }

    pub fn from_presentation(p: &Presentation, max_elements: usize) -> Result<Self, String> {
        let mut st = Self::new(p.over.clone(), max_elements);
        for (o, names) in &p.elements {
            let oi = *st.obj_ix.get(o).ok_or_else(|| format!("unknown object `{o}`"))?;
            for n in names {
                if st.by_name.contains_key(&(oi, n.clone())) {
                    return Err(format!("duplicate element `{n}` in {o}"));
                }
                st.add(oi, n.clone());
            }
        }
        for (a, table) in &p.actions {
            let ai = *st.arrow_ix.get(a).ok_or_else(|| format!("unknown arrow `{a}`"))?;
            let (s, t) = (st.arrows[ai].src, st.arrows[ai].tgt);
            for (x, y) in table {
                let xi = st.lookup(s, x).ok_or_else(|| format!("`{x}` is not an element of {}", st.objects[s]))?;
                let yi = st.lookup(t, y).ok_or_else(|| format!("`{y}` is not an element of {}", st.objects[t]))?;
                st.set(ai, xi, yi);
            }
        }
        st.counter = 1 + st.names.iter().filter_map(|n| n.rsplit_once('#')?.1.parse::<u64>().ok()).max().unwrap_or(0);
        st.changes = Changes::default();
        Ok(st)
    }

    pub fn from_realization(r: &Realization, max_elements: usize) -> Self {
        Self::from_presentation(&r.to_presentation(), max_elements)
            .unwrap_or_else(|e| unreachable!("a realization is a consistent presentation: {e}"))
    }

    pub fn object_index(&self, o: &str) -> Option<usize> {
        self.obj_ix.get(o).copied()
    }

    pub fn arrow_index(&self, a: &str) -> Option<usize> {
        self.arrow_ix.get(a).copied()
    }

    pub fn objects(&self) -> &[ObjectId] {
        &self.objects
    }

    pub fn lookup(&self, obj: usize, name: &str) -> Option<usize> {
        self.by_name.get(&(obj, name.to_owned())).copied()
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn find(&mut self, x: usize) -> usize {
        self.uf.find(x)
    }

    pub fn members(&self, obj: usize) -> &[usize] {
        &self.members[obj]
    }

    pub fn live_count(&self) -> usize {
        self.members.iter().map(Vec::len).sum()
    }

    pub fn sizes(&self) -> BTreeMap<ObjectId, usize> {
        self.objects.iter().zip(&self.members).map(|(o, m)| (o.clone(), m.len())).collect()
    }

    pub fn add(&mut self, obj: usize, name: String) -> usize {
        let id = self.names.len();
        self.by_name.insert((obj, name.clone()), id);
        self.names.push(name);
        self.obj_of.push(obj);
        self.uf.grow(id + 1);
        self.members[obj].push(id);
        id
    }

    /// A new element named `<object>#<counter>`.
    pub fn fresh(&mut self, obj: usize) -> usize {
        let mut name = format!("{}#{}", self.objects[obj], self.counter);
        self.counter += 1;
        while self.by_name.contains_key(&(obj, name.clone())) {
            name = format!("{}#{}", self.objects[obj], self.counter);
            self.counter += 1;
        }
        let id = self.add(obj, name);
        self.changes.added.push(id);
        id
    }

    pub fn get(&mut self, arrow: usize, x: usize) -> Option<usize> {
        let x = self.uf.find(x);
        let y = *self.act[arrow].get(&x)?;
        Some(self.uf.find(y))
    }

    /// Records `arrow(x) = y`, identifying with any previous value.
    pub fn set(&mut self, arrow: usize, x: usize, y: usize) {
        let (x, y) = (self.uf.find(x), self.uf.find(y));
        match self.act[arrow].get(&x).copied() {
            Some(v) => {
                let v = self.uf.find(v);
                if v != y {
                    self.union(v, y);
                }
            }
            None => {
                self.act[arrow].insert(x, y);
            }
        }
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.uf.find(a), self.uf.find(b));
        if ra == rb {
            return;
        }
        debug_assert_eq!(self.obj_of[ra], self.obj_of[rb]);
        self.uf.union(ra, rb);
        let kept = self.uf.find(ra);
        let merged = if kept == ra { rb } else { ra };
        self.changes.identified.push((kept, merged));
        self.dirty = true;
    }

    /// Re-keys actions and member lists after identifications, closing under
    /// functionality of the actions.
    fn canonicalize(&mut self) {
        while self.dirty {
            self.dirty = false;
            for m in &mut self.members {
                let uf = &mut self.uf;
                m.retain(|&x| uf.find(x) == x);
            }
            for a in 0..self.act.len() {
                let old = std::mem::take(&mut self.act[a]);
                let mut new: HashMap<usize, usize> = HashMap::with_capacity(old.len());
                let mut clashes = Vec::new();
                for (x, y) in old {
                    let (x, y) = (self.uf.find(x), self.uf.find(y));
                    match new.get(&x) {
                        Some(&v) if v != y => clashes.push((v, y)),
                        Some(_) => {}
                        None => {
                            new.insert(x, y);
                        }
                    }
                }
                self.act[a] = new;
                for (v, y) in clashes {
                    self.union(v, y);
                }
            }
        }
    }

    fn eval(&mut self, word: &[usize], x: usize) -> Eval {
        let mut cur = x;
        for (i, &a) in word.iter().enumerate() {
            match self.get(a, cur) {
                Some(y) => cur = y,
                None => return Eval::Stuck { at: i, elem: cur },
            }
        }
        Eval::Done(cur)
    }

    /// Applies equations, mono injectivity and cone uniqueness until nothing
    /// changes.
    pub fn identify(&mut self) {
        loop {
            let mut changed = false;
            for k in 0..self.eqs.len() {
                let dom = self.eqs[k].0;
                let (l, r) = (self.eqs[k].1.clone(), self.eqs[k].2.clone());
                for i in 0..self.members[dom].len() {
                    let Some(&x) = self.members[dom].get(i) else { break };
                    let x = self.uf.find(x);
                    match (self.eval(&l, x), self.eval(&r, x)) {
                        (Eval::Done(a), Eval::Done(b)) if a != b => {
                            self.union(a, b);
                            changed = true;
                        }
                        (Eval::Done(a), Eval::Stuck { at, elem }) if at + 1 == r.len() => {
                            self.set(r[at], elem, a);
                            changed = true;
                        }
                        (Eval::Stuck { at, elem }, Eval::Done(b)) if at + 1 == l.len() => {
                            self.set(l[at], elem, b);
                            changed = true;
                        }
                        _ => {}
                    }
                }
            }
            for k in 0..self.monos.len() {
                let m = self.monos[k];
                let src = self.arrows[m].src;
                let mut seen: HashMap<usize, usize> = HashMap::new();
                for i in 0..self.members[src].len() {
                    let x = self.members[src][i];
                    if let Some(y) = self.get(m, x) {
                        if let Some(&prev) = seen.get(&y) {
                            self.union(prev, x);
                            changed = true;
                        } else {
                            seen.insert(y, x);
                        }
                    }
                }
            }
            for k in 0..self.cones.len() {
                let apex = self.cones[k].apex;
                let projs = self.cones[k].projs.clone();
                let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
                for i in 0..self.members[apex].len() {
                    let x = self.members[apex][i];
                    let tuple: Option<Vec<usize>> = projs.iter().map(|&p| self.get(p, x)).collect();
                    if let Some(t) = tuple {
                        if let Some(&prev) = seen.get(&t) {
                            self.union(prev, x);
                            changed = true;
                        } else {
                            seen.insert(t, x);
                        }
                    }
                }
            }
            if self.dirty {
                self.canonicalize();
                changed = true;
            }
            if !changed {
                return;
            }
        }
    }

    /// Defines the first partially defined arrow everywhere, with fresh
    /// values.
    fn totalize_one(&mut self) -> bool {
        for a in 0..self.arrows.len() {
            let (src, tgt) = (self.arrows[a].src, self.arrows[a].tgt);
            let missing: Vec<usize> =
                self.members[src].iter().copied().filter(|x| !self.act[a].contains_key(x)).collect();
            if missing.is_empty() {
                continue;
            }
            for x in missing {
                let y = self.fresh(tgt);
                self.set(a, x, y);
            }
            return true;
        }
        false
    }

    /// Adds an apex element for every family of the base with none yet.
    fn complete_cones(&mut self) -> Result<bool, Overflow> {
        let mut added = false;
        for k in 0..self.cones.len() {
            let apex = self.cones[k].apex;
            let projs = self.cones[k].projs.clone();
            let node_obj: Vec<usize> = projs.iter().map(|&p| self.arrows[p].tgt).collect();
            let pos: Vec<HashMap<usize, usize>> =
                node_obj.iter().map(|&o| self.members[o].iter().enumerate().map(|(i, &x)| (x, i)).collect()).collect();
            let sizes: Vec<usize> = node_obj.iter().map(|&o| self.members[o].len()).collect();
            let mut tables = Vec::new();
            for (from, to, word) in &self.cones[k].edges {
                let table: Vec<Option<usize>> = self.members[node_obj[*from]]
                    .iter()
                    .map(|&x| {
                        let mut cur = x;
                        for &a in word {
                            cur = *self.act[a].get(&cur)?;
                        }
                        pos[*to].get(&cur).copied()
                    })
                    .collect();
                tables.push((*from, *to, table));
            }
            let edges: Vec<SolverEdge<'_>> = tables
                .iter()
                .map(|(f, t, table)| SolverEdge { src: *f, tgt: *t, eval: Box::new(move |i| table[i]) })
                .collect();
            let room = (self.max_elements + self.members[apex].len()).saturating_sub(self.live_count());
            let tuples = limit_tuples_capped(&sizes, &edges, room).ok_or(Overflow)?;
            drop(edges);
            let mut present: std::collections::HashSet<Vec<usize>> = std::collections::HashSet::new();
            for &x in &self.members[apex] {
                let t: Option<Vec<usize>> = projs.iter().map(|&p| self.act[p].get(&x).copied()).collect();
                if let Some(t) = t {
                    present.insert(t);
                }
            }
            for t in tuples {
                let elems: Vec<usize> = t.iter().enumerate().map(|(n, &i)| self.members[node_obj[n]][i]).collect();
                if present.contains(&elems) {
                    continue;
                }
                let x = self.fresh(apex);
                for (&p, &e) in projs.iter().zip(&elems) {
                    self.act[p].insert(x, e);
                }
                added = true;
            }
            if self.live_count() > self.max_elements {
                return Err(Overflow);
            }
        }
        Ok(added)
    }

    /// Cone repair. With `complete == false` only identifications and
    /// totalization run, never limit completion.
    pub fn repair(&mut self, complete: bool) -> Result<(), Overflow> {
        loop {
            self.identify();
            if self.live_count() > self.max_elements {
                return Err(Overflow);
            }
            if self.totalize_one() {
                continue;
            }
            if complete && self.complete_cones()? {
                continue;
            }
            return Ok(());
        }
    }

    pub fn take_changes(&mut self) -> Changes {
        std::mem::take(&mut self.changes)
    }

    /// Current state as a realization; every action must be total.
    pub fn realize(&mut self, name: &str) -> Realization {
        self.canonicalize();
        let carriers: BTreeMap<ObjectId, Arc<FinSet>> = self
            .objects
            .iter()
            .zip(&self.members)
            .map(|(o, m)| {
                let set = FinSet::new(m.iter().map(|&x| self.names[x].clone()))
                    .unwrap_or_else(|e| unreachable!("store names are unique per object: {e}"));
                (o.clone(), Arc::new(set))
            })
            .collect();
        let mut actions = BTreeMap::new();
        for (a, id) in self.arrow_ids.iter().enumerate() {
            let (s, t) = (self.arrows[a].src, self.arrows[a].tgt);
            let pos: HashMap<usize, usize> = self.members[t].iter().enumerate().map(|(i, &x)| (x, i)).collect();
            let map = self.members[s]
                .iter()
                .map(|x| {
                    let y = self.act[a].get(x).copied().unwrap_or_else(|| panic!("action of `{id}` is partial"));
                    pos[&y]
                })
                .collect();
            let f = FinFunction::new(carriers[&self.objects[s]].clone(), carriers[&self.objects[t]].clone(), map)
                .unwrap_or_else(|e| unreachable!("store actions are well typed: {e}"));
            actions.insert(id.clone(), f);
        }
        Realization { name: name.to_owned(), over: self.sk.clone(), carriers, actions }
    }
}
