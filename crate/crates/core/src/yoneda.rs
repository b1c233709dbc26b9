//! Representable specifications and the contravariant Yoneda embedding.
//!
//! `Y(X)` is computed as the cone-repaired closure of a presentation with a
//! single generator at `X`, named `X#0`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::engine::store::Store;
use crate::engine::ChaseConfig;
use crate::ids::{ArrowId, ObjectId};
use crate::localizer::{paths_equal, DEFAULT_REWRITE_DEPTH};
use crate::realization::{extend_generator, is_isomorphic, Presentation, RealMorphism, Realization, RealizationError};
use crate::sketch::{Path, Sketch};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum YonedaError {
    #[error("object `{0}` is not in the sketch")]
    UnknownObject(ObjectId),
    #[error("arrow `{0}` is not in the sketch")]
    UnknownArrow(ArrowId),
    #[error("representable at `{0}` not finitely closed (more than {1} elements); the sketch probably has an unbroken cycle")]
    NotFinitelyClosed(ObjectId, usize),
    #[error(transparent)]
    Realization(#[from] RealizationError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Representable {
    pub at: ObjectId,
    pub spec: Arc<Realization>,
    pub generator: String,
}

pub fn generator_name(x: &str) -> String {
    format!("{x}#0")
}

pub fn representable(sk: &Arc<Sketch>, x: &str, cfg: &ChaseConfig) -> Result<Representable, YonedaError> {
    if !sk.objects.contains(x) {
        return Err(YonedaError::UnknownObject(x.into()));
    }
    let generator = generator_name(x);
    let p = Presentation::new(format!("Y({x})"), sk.clone()).elem(&generator, x);
    let mut st = Store::from_presentation(&p, cfg.max_elements)
        .unwrap_or_else(|e| unreachable!("one-generator presentation: {e}"));
    st.repair(true).map_err(|_| YonedaError::NotFinitelyClosed(x.into(), cfg.max_elements))?;
    let spec = Arc::new(st.realize(&format!("Y({x})")));
    Ok(Representable { at: x.into(), spec, generator })
}

/// `Y(f): Y(Z) -> Y(X)` for `f: X -> Z`, sending the generator of `Y(Z)` to
/// `f` applied to the generator of `Y(X)`.
pub fn yoneda_arrow(sk: &Arc<Sketch>, f: &str, cfg: &ChaseConfig) -> Result<RealMorphism, YonedaError> {
    let d = sk.arrows.get(f).ok_or_else(|| YonedaError::UnknownArrow(f.into()))?;
    let yx = representable(sk, d.src.as_str(), cfg)?;
    let yz = representable(sk, d.tgt.as_str(), cfg)?;
    let image = yx.spec.apply(f, &yx.generator).unwrap_or_else(|| unreachable!("representables are total")).to_owned();
    Ok(extend_generator(&yz.spec, &yx.spec, d.tgt.as_str(), &yz.generator, &image)?)
}

/// `Y` of a path from `X` to `Z`, as a morphism `Y(Z) -> Y(X)`.
pub fn yoneda_path(sk: &Arc<Sketch>, path: &Path, cfg: &ChaseConfig) -> Result<RealMorphism, YonedaError> {
    let (x, z) = sk.path_endpoints(path).map_err(|_| YonedaError::UnknownArrow(path.to_string().into()))?;
    let yx = representable(sk, x.as_str(), cfg)?;
    let yz = representable(sk, z.as_str(), cfg)?;
    let mut image = yx.generator.clone();
    for a in path.arrows() {
        image =
            yx.spec.apply(a.as_str(), &image).unwrap_or_else(|| unreachable!("representables are total")).to_owned();
    }
    Ok(extend_generator(&yz.spec, &yx.spec, z.as_str(), &yz.generator, &image)?)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FaithfulnessReport {
    pub pairs_checked: usize,
    /// Distinct arrows with equal images that the equations do not equate.
    pub collisions: Vec<(ArrowId, ArrowId)>,
    /// Equal images of arrows the equations equate.
    pub expected_collisions: Vec<(ArrowId, ArrowId)>,
}

impl FaithfulnessReport {
    pub fn is_faithful(&self) -> bool {
        self.collisions.is_empty()
    }
}

/// Compares `Y` on every pair of parallel arrows.
pub fn faithfulness_check(sk: &Arc<Sketch>, cfg: &ChaseConfig) -> Result<FaithfulnessReport, YonedaError> {
    let mut report = FaithfulnessReport::default();
    let arrows: Vec<_> = sk.arrows.values().collect();
    let mut images: BTreeMap<&ArrowId, RealMorphism> = BTreeMap::new();
    for (i, a) in arrows.iter().enumerate() {
        for b in &arrows[i + 1..] {
            if (&a.src, &a.tgt) != (&b.src, &b.tgt) {
                continue;
            }
            report.pairs_checked += 1;
            for d in [a, b] {
                if !images.contains_key(&d.id) {
                    images.insert(&d.id, yoneda_arrow(sk, d.id.as_str(), cfg)?);
                }
            }
            if images[&a.id].signature() == images[&b.id].signature() {
                let pair = (a.id.clone(), b.id.clone());
                if paths_equal(sk, &Path::arrow(a.id.clone()), &Path::arrow(b.id.clone()), DEFAULT_REWRITE_DEPTH) {
                    report.expected_collisions.push(pair);
                } else {
                    report.collisions.push(pair);
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DensityReport {
    pub generators: usize,
    pub relations: usize,
    pub isomorphic: bool,
}

/// Rebuilds `s` from its elements as generators and its arrow actions as
/// relations, repairs the presentation, and compares with `s`.
pub fn density_check(s: &Arc<Realization>, cfg: &ChaseConfig) -> Result<DensityReport, YonedaError> {
    let rename = |o: &ObjectId, x: &str| format!("{o}:{x}");
    let mut p = Presentation::new(format!("colim({})", s.name), s.over.clone());
    let mut generators = 0;
    for (o, set) in &s.carriers {
        for x in set.iter() {
            p = p.elem(&rename(o, x), o.as_str());
            generators += 1;
        }
    }
    let mut relations = 0;
    for (a, f) in &s.actions {
        let d = &s.over.arrows[a];
        for (x, y) in f.pairs() {
            p = p.act(a.as_str(), &rename(&d.src, x), &rename(&d.tgt, y));
            relations += 1;
        }
    }
    let mut st = Store::from_presentation(&p, cfg.max_elements).unwrap_or_else(|e| unreachable!("renamed copy: {e}"));
    st.repair(true).map_err(|_| YonedaError::NotFinitelyClosed("(density)".into(), cfg.max_elements))?;
    let rebuilt = Arc::new(st.realize(&p.name));
    let isomorphic = is_isomorphic(&rebuilt, s)?.is_some();
    Ok(DensityReport { generators, relations, isomorphic })
}
