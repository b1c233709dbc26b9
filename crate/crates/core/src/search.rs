//! Constraint search for natural transformations between finite realizations.
//!
//! Variables are the elements of the source realization; a value is an
//! element of the target carrier at the same object. Three propagators cut
//! the space down:
//!
//! * naturality pushes an assignment forward along every arrow;
//! * a cone apex element is forced once all its projections are assigned
//!   (the target apex is a limit, so the tuple has exactly one preimage);
//! * an element of a mono's domain is forced once its image is assigned.
//!
//! Only objects that are neither apexes nor mono domains are branched on,
//! which is also what the search-space guard measures.

use std::collections::HashMap;

use crate::ids::ObjectId;
use crate::realization::Realization;

type OutArrow = (Vec<usize>, Vec<usize>, usize);

pub(crate) struct Searcher {
    objects: Vec<ObjectId>,
    offset: Vec<usize>,
    size1: Vec<usize>,
    size2: Vec<usize>,
    /// Per variable: object index and element index.
    var_obj: Vec<usize>,
    /// Per object: (source action, target action, target object) for arrows out of it.
    out: Vec<Vec<OutArrow>>,
    /// Per variable: apex elements waiting on it, as (cone index, apex var).
    apex_watch: Vec<Vec<(usize, usize)>>,
    cones: Vec<ConeInfo>,
    /// Per variable: mono-domain vars waiting on it, with the target preimage table.
    mono_watch: Vec<Vec<(usize, usize)>>,
    mono_pre: Vec<HashMap<usize, usize>>,
    free_objects: Vec<usize>,
}

struct ConeInfo {
    /// Per apex var (relative index): the vars of its projections.
    proj_vars: HashMap<usize, Vec<usize>>,
    /// Target apex element by projection tuple.
    index2: HashMap<Vec<usize>, usize>,
}

pub(crate) struct SearchOptions {
    pub injective: bool,
    pub max_solutions: usize,
}

impl Searcher {
    pub fn new(r1: &Realization, r2: &Realization) -> Self {
        let sk = &r1.over;
        let objects: Vec<ObjectId> = sk.objects.iter().cloned().collect();
        let obj_ix: HashMap<&ObjectId, usize> = objects.iter().enumerate().map(|(i, o)| (o, i)).collect();
        let size1: Vec<usize> = objects.iter().map(|o| r1.carrier(o.as_str()).map_or(0, |c| c.len())).collect();
        let size2: Vec<usize> = objects.iter().map(|o| r2.carrier(o.as_str()).map_or(0, |c| c.len())).collect();
        let mut offset = Vec::with_capacity(objects.len());
        let mut var_obj = Vec::new();
        let mut total = 0;
        for (i, &n) in size1.iter().enumerate() {
            offset.push(total);
            total += n;
            var_obj.extend(std::iter::repeat_n(i, n));
        }

        let mut out = vec![Vec::new(); objects.len()];
        for (id, d) in &sk.arrows {
            let (Some(f1), Some(f2)) = (r1.actions.get(id), r2.actions.get(id)) else { continue };
            let (s, t) = (obj_ix[&d.src], obj_ix[&d.tgt]);
            out[s].push((f1.map().to_vec(), f2.map().to_vec(), t));
        }

        let mut apex_watch = vec![Vec::new(); total];
        let mut cones = Vec::new();
        for cone in sk.cones.values() {
            let a = obj_ix[&cone.apex];
            let projs: Vec<_> = cone.projections.iter().collect();
            let mut index2 = HashMap::new();
            for e in 0..size2[a] {
                let t: Vec<usize> = projs.iter().map(|p| r2.actions[*p].at(e)).collect();
                index2.insert(t, e);
            }
            let mut proj_vars = HashMap::new();
            let ci = cones.len();
            for e in 0..size1[a] {
                let vars: Vec<usize> = projs
                    .iter()
                    .map(|p| {
                        let tgt = obj_ix[&sk.arrows[*p].tgt];
                        offset[tgt] + r1.actions[*p].at(e)
                    })
                    .collect();
                let apex_var = offset[a] + e;
                for &v in &vars {
                    apex_watch[v].push((ci, apex_var));
                }
                proj_vars.insert(apex_var, vars);
            }
            cones.push(ConeInfo { proj_vars, index2 });
        }

        let mut mono_watch = vec![Vec::new(); total];
        let mut mono_pre = Vec::new();
        for m in &sk.monos {
            let (Some(f1), Some(f2)) = (r1.actions.get(m), r2.actions.get(m)) else { continue };
            if !f2.is_injective() {
                continue;
            }
            let d = &sk.arrows[m];
            let (s, t) = (obj_ix[&d.src], obj_ix[&d.tgt]);
            let pre: HashMap<usize, usize> = f2.map().iter().enumerate().map(|(i, &j)| (j, i)).collect();
            let mi = mono_pre.len();
            mono_pre.push(pre);
            for (x, &y) in f1.map().iter().enumerate() {
                mono_watch[offset[t] + y].push((mi, offset[s] + x));
            }
        }

        let determined: Vec<bool> = objects
            .iter()
            .map(|o| sk.cones.contains_key(o) || sk.monos.iter().any(|m| sk.arrows.get(m).is_some_and(|d| d.src == *o)))
            .collect();
        let free_objects = (0..objects.len()).filter(|&i| !determined[i]).collect();

        Self { objects, offset, size1, size2, var_obj, out, apex_watch, cones, mono_watch, mono_pre, free_objects }
    }

    /// log10 of the number of assignments of the branched objects.
    pub fn search_space_log10(&self) -> f64 {
        self.free_objects
            .iter()
            .map(|&o| if self.size2[o] == 0 { 0.0 } else { self.size1[o] as f64 * (self.size2[o] as f64).log10() })
            .sum()
    }

    pub fn objects(&self) -> &[ObjectId] {
        &self.objects
    }

    /// Runs the search with some variables fixed up front, given as
    /// `(object, source element, target element)` indices.
    pub fn run(&self, fixed: &[(usize, usize, usize)], opts: &SearchOptions) -> Vec<Vec<Vec<usize>>> {
        let total = self.var_obj.len();
        let mut st =
            State { val: vec![None; total], trail: Vec::new(), used: vec![HashMap::new(); self.objects.len()] };
        let mut out = Vec::new();
        if opts.injective && (0..self.objects.len()).any(|o| self.size1[o] > self.size2[o]) {
            return out;
        }
        if (0..self.objects.len()).any(|o| self.size1[o] > 0 && self.size2[o] == 0) {
            return out;
        }
        let mut queue = Vec::new();
        for &(o, x, y) in fixed {
            queue.push((self.offset[o] + x, y));
        }
        // Terminal cones: the apex is forced outright.
        for ci in 0..self.cones.len() {
            for (&apex_var, vars) in &self.cones[ci].proj_vars {
                if vars.is_empty() {
                    match self.cones[ci].index2.get(&Vec::new()) {
                        Some(&e) => queue.push((apex_var, e)),
                        None => return out,
                    }
                }
            }
        }
        if !self.propagate(&mut st, queue, opts) {
            return out;
        }
        let order: Vec<usize> = self
            .free_objects
            .iter()
            .flat_map(|&o| self.offset[o]..self.offset[o] + self.size1[o])
            .chain(0..total)
            .collect();
        self.branch(&mut st, &order, 0, opts, &mut out);
        out
    }

    fn branch(
        &self,
        st: &mut State,
        order: &[usize],
        mut k: usize,
        opts: &SearchOptions,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        if out.len() >= opts.max_solutions {
            return;
        }
        while k < order.len() && st.val[order[k]].is_some() {
            k += 1;
        }
        if k == order.len() {
            out.push(self.components(st));
            return;
        }
        let var = order[k];
        let o = self.var_obj[var];
        for y in 0..self.size2[o] {
            let mark = st.trail.len();
            if self.propagate(st, vec![(var, y)], opts) {
                self.branch(st, order, k + 1, opts, out);
            }
            st.undo(mark, &self.var_obj);
            if out.len() >= opts.max_solutions {
                return;
            }
        }
    }

    fn components(&self, st: &State) -> Vec<Vec<usize>> {
        (0..self.objects.len())
            .map(|o| (0..self.size1[o]).map(|x| st.val[self.offset[o] + x].unwrap_or_default()).collect())
            .collect()
    }

    fn propagate(&self, st: &mut State, mut queue: Vec<(usize, usize)>, opts: &SearchOptions) -> bool {
        while let Some((var, y)) = queue.pop() {
            let o = self.var_obj[var];
            match st.val[var] {
                Some(v) if v == y => continue,
                Some(_) => return false,
                None => {}
            }
            if opts.injective {
                if let Some(&other) = st.used[o].get(&y) {
                    if other != var {
                        return false;
                    }
                }
                st.used[o].insert(y, var);
            }
            st.val[var] = Some(y);
            st.trail.push(var);

            let x = var - self.offset[o];
            for (f1, f2, t) in &self.out[o] {
                queue.push((self.offset[*t] + f1[x], f2[y]));
            }
            for &(ci, apex_var) in &self.apex_watch[var] {
                let cone = &self.cones[ci];
                let vars = &cone.proj_vars[&apex_var];
                let tuple: Option<Vec<usize>> = vars.iter().map(|&v| st.val[v]).collect();
                if let Some(t) = tuple {
                    match cone.index2.get(&t) {
                        Some(&e) => queue.push((apex_var, e)),
                        None => return false,
                    }
                }
            }
            for &(mi, dom_var) in &self.mono_watch[var] {
                match self.mono_pre[mi].get(&y) {
                    Some(&e) => queue.push((dom_var, e)),
                    None => return false,
                }
            }
        }
        true
    }
}

struct State {
    val: Vec<Option<usize>>,
    trail: Vec<usize>,
    used: Vec<HashMap<usize, usize>>,
}

impl State {
    fn undo(&mut self, mark: usize, var_obj: &[usize]) {
        while self.trail.len() > mark {
            let var = self.trail.pop().unwrap_or_default();
            if let Some(y) = self.val[var].take() {
                let o = var_obj[var];
                if self.used[o].get(&y) == Some(&var) {
                    self.used[o].remove(&y);
                }
            }
        }
    }
}
