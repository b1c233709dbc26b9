//! Diagrammatic logic on finite limit sketches.
//!
//! A logic is a [`Sketch`]; its theories and specifications are finite
//! set-valued [`Realization`]s. Breaking the cycles of a theory sketch yields a
//! [`Localiser`], whose rules the [`engine`] fires to compute free theories.

pub mod dsl;
pub mod engine;
pub mod finset;
pub mod ids;
pub mod localizer;
pub mod realization;
pub mod report;
mod search;
pub mod sketch;
pub mod yoneda;

pub use engine::{
    apply_rule, extend_to_theory, is_theory, match_rule, rules_of, saturate, transport_spec, ChaseConfig, ChaseResult,
    ChaseStatus, EngineError, Fraction, Match, Rule,
};
pub use ids::{ArrowId, ObjectId};
pub use localizer::{
    break_cycles, check_sketch_morphism, find_cycles, CycleReport, Localiser, LocaliserError, SketchMorphism,
};
pub use realization::{
    check_morphism, check_realization, enumerate_morphisms, is_isomorphic, restrict_along, Presentation, RealMorphism,
    Realization, RealizationError,
};
pub use report::{Severity, ValidationReport, Violation};
pub use sketch::{builtin_sketches, validate_sketch, Cone, ConeEdge, Path, PathEquation, Sketch};
pub use yoneda::{density_check, faithfulness_check, representable, yoneda_arrow, Representable};
