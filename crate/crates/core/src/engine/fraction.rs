use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::store::Store;
use super::{saturate, ChaseConfig, EngineError, Rule};
use crate::ids::ObjectId;
use crate::realization::{morphisms_extending, RealMorphism, Realization};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certificate {
    /// Built from rule firings.
    ByConstruction,
    /// Both legs' sources saturate to isomorphic theories.
    Checked,
}

/// A cospan `src -h-> mid <-c- tgt` whose leg `h` becomes invertible in the
/// free theory: a proof of `tgt` from `src`.
#[derive(Clone, Debug)]
pub struct Fraction {
    pub src: Arc<Realization>,
    pub tgt: Arc<Realization>,
    pub mid: Arc<Realization>,
    pub h: RealMorphism,
    pub c: RealMorphism,
    pub certificate: Certificate,
}

fn same_data(a: &Realization, b: &Realization) -> bool {
    a.over == b.over && a.carriers == b.carriers && a.actions == b.actions
}

impl Fraction {
    pub fn identity(s: Arc<Realization>) -> Self {
        let id = RealMorphism::identity(s.clone());
        Self { src: s.clone(), tgt: s.clone(), mid: s, h: id.clone(), c: id, certificate: Certificate::ByConstruction }
    }

    /// The fraction `S' ⇢ C` with `h = id` for a morphism `c: C -> S'`.
    pub fn from_morphism(c: RealMorphism) -> Self {
        let mid = c.tgt.clone();
        Self {
            src: mid.clone(),
            tgt: c.src.clone(),
            mid: mid.clone(),
            h: RealMorphism::identity(mid),
            c,
            certificate: Certificate::ByConstruction,
        }
    }

    /// `self` then `next`, by pushing `self.c` out along `next.h`.
    pub fn compose(&self, next: &Fraction, rules: &[Rule], cfg: &ChaseConfig) -> Result<Fraction, EngineError> {
        if !same_data(&self.tgt, &next.src) {
            return Err(EngineError::FractionMismatch(format!(
                "target of the first (`{}`) is not the source of the second (`{}`)",
                self.tgt.name, next.src.name
            )));
        }
        let (m1, m2) = (&self.mid, &next.mid);
        let mut st = Store::new(m1.over.clone(), cfg.max_elements);
        let mut ids1: BTreeMap<&ObjectId, Vec<usize>> = BTreeMap::new();
        let mut ids2: BTreeMap<&ObjectId, Vec<usize>> = BTreeMap::new();
        for (o, set) in &m1.carriers {
            let oi = st.object_index(o.as_str()).unwrap_or_default();
            ids1.insert(o, set.iter().map(|x| st.add(oi, x.to_owned())).collect());
        }
        for (o, set) in &m2.carriers {
            let oi = st.object_index(o.as_str()).unwrap_or_default();
            let mut v = Vec::with_capacity(set.len());
            for x in set.iter() {
                let mut name = x.to_owned();
                while st.lookup(oi, &name).is_some() {
                    name.push('\'');
                }
                v.push(st.add(oi, name));
            }
            ids2.insert(o, v);
        }
        for (mid, ids) in [(m1, &ids1), (m2, &ids2)] {
            for (a, f) in &mid.actions {
                let d = &mid.over.arrows[a];
                let ai = st.arrow_index(a.as_str()).unwrap_or_default();
                for (x, &y) in f.map().iter().enumerate() {
                    st.set(ai, ids[&d.src][x], ids[&d.tgt][y]);
                }
            }
        }
        for (o, c1) in &self.c.components {
            let h2 = &next.h.components[o];
            for t in 0..c1.dom().len() {
                st.union(ids1[o][c1.at(t)], ids2[o][h2.at(t)]);
            }
        }
        st.repair(true).map_err(|_| EngineError::ElementLimit(cfg.max_elements))?;
        let mid = Arc::new(st.realize(&format!("{}+{}", m1.name, m2.name)));

        let leg = |st: &mut Store, f: &RealMorphism, ids: &BTreeMap<&ObjectId, Vec<usize>>| {
            let mut maps: BTreeMap<ObjectId, BTreeMap<String, String>> = BTreeMap::new();
            for (o, comp) in &f.components {
                let m = maps.entry(o.clone()).or_default();
                for (i, x) in comp.dom().iter().enumerate() {
                    let rep = st.find(ids[o][comp.at(i)]);
                    m.insert(x.to_owned(), st.name(rep).to_owned());
                }
            }
            maps
        };
        let h_maps = leg(&mut st, &self.h, &ids1);
        let c_maps = leg(&mut st, &next.c, &ids2);
        let h = RealMorphism::from_maps(self.src.clone(), mid.clone(), &h_maps)?;
        let c = RealMorphism::from_maps(next.tgt.clone(), mid.clone(), &c_maps)?;
        let both = self.certificate == Certificate::ByConstruction && next.certificate == Certificate::ByConstruction;
        let mut out = Fraction {
            src: self.src.clone(),
            tgt: next.tgt.clone(),
            mid,
            h,
            c,
            certificate: if both { Certificate::ByConstruction } else { Certificate::Checked },
        };
        if !both {
            out.verify(rules, cfg)?;
            out.certificate = Certificate::Checked;
        }
        Ok(out)
    }

    /// Checks that `h` becomes invertible: `src` and `mid` saturate to a
    /// fixpoint and the map induced between the saturations is an
    /// isomorphism. Returns that isomorphism.
    pub fn verify(&self, rules: &[Rule], cfg: &ChaseConfig) -> Result<RealMorphism, EngineError> {
        let fs = saturate(&self.src, rules, cfg)?;
        let fm = saturate(&self.mid, rules, cfg)?;
        if !fs.is_fixpoint() || !fm.is_fixpoint() {
            return Err(EngineError::Verification(format!(
                "saturation capped after {} rounds; cannot certify the fraction",
                cfg.max_rounds
            )));
        }
        let mut fixed = Vec::new();
        for (o, comp) in &self.h.components {
            for (i, x) in comp.dom().iter().enumerate() {
                let y = comp.cod().name(comp.at(i));
                fixed.push((o.as_str(), fs.embedding[o][x].as_str(), fm.embedding[o][y].as_str()));
            }
        }
        let induced = morphisms_extending(&fs.result, &fm.result, &fixed, 1)?
            .into_iter()
            .next()
            .ok_or_else(|| EngineError::Verification("no induced map between the saturations".into()))?;
        if !induced.is_iso() {
            return Err(EngineError::Verification(
                "the induced map between the saturations is not an isomorphism".into(),
            ));
        }
        Ok(induced)
    }
}
