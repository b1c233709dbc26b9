use std::fmt::Write as _;

use super::lexer::is_ident_char;
use super::{Decl, NamedConfig};
use crate::localizer::SketchMorphism;
use crate::realization::Presentation;
use crate::sketch::{Path, Sketch};

/// A name as it must appear in source: bare when it lexes as one
/// identifier, quoted otherwise.
pub fn name(s: &str) -> String {
    if !s.is_empty() && s.chars().all(is_ident_char) {
        return s.to_owned();
    }
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

pub fn path(p: &Path) -> String {
    match p {
        Path::Identity { identity } => format!("id({})", name(identity.as_str())),
        Path::Arrows(v) => v.iter().map(|a| name(a.as_str())).collect::<Vec<_>>().join("."),
    }
}

pub fn sketch(sk: &Sketch) -> String {
    let mut out = format!("sketch {} {{\n", name(&sk.name));
    for o in &sk.objects {
        let _ = writeln!(out, "  object {}", name(o.as_str()));
    }
    for d in sk.arrows.values() {
        let _ = writeln!(out, "  arrow {} : {} -> {}", name(d.id.as_str()), name(d.src.as_str()), name(d.tgt.as_str()));
    }
    for m in &sk.monos {
        let _ = writeln!(out, "  mono {}", name(m.as_str()));
    }
    for c in sk.cones.values() {
        let _ = writeln!(out, "  cone {} {{", name(c.apex.as_str()));
        if c.edges.is_empty() {
            out.push_str("    base ;\n");
        } else {
            out.push_str("    base\n");
            for e in &c.edges {
                let _ = writeln!(out, "      {} -> {} : {}", name(e.from.as_str()), name(e.to.as_str()), path(&e.path));
            }
            out.push_str("    ;\n");
        }
        out.push_str("    proj");
        for p in &c.projections {
            out.push(' ');
            out.push_str(&name(p.as_str()));
        }
        out.push_str("\n  }\n");
    }
    for e in sk.free_equations() {
        let _ = writeln!(out, "  eq {} = {}", path(&e.lhs), path(&e.rhs));
    }
    out.push_str("}\n");
    out
}

pub fn spec(p: &Presentation) -> String {
    let mut out = format!("spec {} over {} {{\n", name(&p.name), name(&p.over.name));
    for (o, xs) in &p.elements {
        for x in xs {
            let _ = writeln!(out, "  elem {} : {}", name(x), name(o.as_str()));
        }
    }
    for (a, m) in &p.actions {
        for (x, y) in m {
            let _ = writeln!(out, "  act {}({}) = {}", name(a.as_str()), name(x), name(y));
        }
    }
    out.push_str("}\n");
    out
}

pub fn morphism(m: &SketchMorphism) -> String {
    let mut out = format!("morphism {} : {} -> {} {{\n", name(&m.name), name(&m.src.name), name(&m.tgt.name));
    for (a, b) in &m.object_map {
        let _ = writeln!(out, "  obj {} => {}", name(a.as_str()), name(b.as_str()));
    }
    for (a, p) in &m.arrow_map {
        let _ = writeln!(out, "  arr {} => {}", name(a.as_str()), path(p));
    }
    out.push_str("}\n");
    out
}

pub fn config(c: &NamedConfig) -> String {
    let mut out = format!("config {} {{\n", name(&c.name));
    let _ = writeln!(out, "  max_rounds {}", c.config.max_rounds);
    if let Some(rules) = &c.config.rule_subset {
        let rules: Vec<String> = rules.iter().map(|r| name(r)).collect();
        let _ = writeln!(out, "  rules {}", rules.join(", "));
    }
    let _ = writeln!(out, "  max_elements {}", c.config.max_elements);
    out.push_str("}\n");
    out
}

pub fn decl(d: &Decl) -> String {
    match d {
        Decl::Sketch(s) => sketch(s),
        Decl::Spec(p) => spec(p),
        Decl::Morphism(m) => morphism(m),
        Decl::Config(c) => config(c),
    }
}
