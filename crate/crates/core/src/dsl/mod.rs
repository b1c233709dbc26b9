//! The `.sk` text format and its `.sk.json` mirror.
//!
//! A file is a sequence of `sketch`, `spec`, `morphism` and `config`
//! declarations. Parsing resolves every name it can: a spec's `over` sketch
//! and a morphism's endpoints are looked up in the same file first, then in
//! the [`Env`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::engine::ChaseConfig;
use crate::localizer::{break_cycles, SketchMorphism};
use crate::realization::Presentation;
use crate::sketch::{builtin_sketches, Sketch};

mod json;
mod lexer;
mod parser;
mod print;

pub use json::{
    chase_result_json, from_json, realization_json, to_json, ChaseResultJson, ConfigJson, DeclJson, MorphismJson,
    SpecJson,
};
pub use lexer::{Pos, Span};
pub use print::name as quote_name;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedConfig {
    pub name: String,
    pub config: ChaseConfig,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Sketch(Sketch),
    Spec(Presentation),
    Morphism(SketchMorphism),
    Config(NamedConfig),
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Sketch(s) => &s.name,
            Decl::Spec(p) => &p.name,
            Decl::Morphism(m) => &m.name,
            Decl::Config(c) => &c.name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Decl::Sketch(_) => "sketch",
            Decl::Spec(_) => "spec",
            Decl::Morphism(_) => "morphism",
            Decl::Config(_) => "config",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        Self { pos: Pos { line, col }, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

/// Sketches visible to a parse besides the ones declared in the file.
///
/// Lookup order: explicitly inserted sketches, then the builtins (`graph`,
/// `magma`, `mp_theory`). A missing name `T_sp` falls back to the default
/// cycle-breaking of `T`.
#[derive(Clone, Debug)]
pub struct Env {
    sketches: BTreeMap<String, Arc<Sketch>>,
    builtins: bool,
}

impl Default for Env {
    fn default() -> Self {
        Self { sketches: BTreeMap::new(), builtins: true }
    }
}

impl Env {
    /// An environment without the builtin sketches.
    pub fn bare() -> Self {
        Self { sketches: BTreeMap::new(), builtins: false }
    }

    pub fn insert(&mut self, sk: Arc<Sketch>) {
        self.sketches.insert(sk.name.clone(), sk);
    }

    /// Adds every sketch declared in `decls`.
    pub fn extend<'a>(&mut self, decls: impl IntoIterator<Item = &'a Decl>) {
        for d in decls {
            if let Decl::Sketch(s) = d {
                self.insert(Arc::new(s.clone()));
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<Arc<Sketch>> {
        self.lookup_with(name, &BTreeMap::new())
    }

    pub(crate) fn lookup_with(&self, name: &str, local: &BTreeMap<String, Arc<Sketch>>) -> Option<Arc<Sketch>> {
        if let Some(s) = local.get(name).or_else(|| self.sketches.get(name)) {
            return Some(s.clone());
        }
        if self.builtins {
            if let Some(s) = builtin_sketches().get(name) {
                return Some(Arc::new(s.clone()));
            }
        }
        let base = self.lookup_with(name.strip_suffix("_sp")?, local)?;
        break_cycles(&base, None).ok().map(|(sp, _)| Arc::new(sp))
    }
}

/// A declaration with the source span it was parsed from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Declaration {
    pub decl: Decl,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct SourceFile {
    pub path: Option<PathBuf>,
    pub text: String,
    pub decls: Vec<Declaration>,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}", render_errors(path, errors))]
    Parse { path: PathBuf, errors: Vec<ParseError> },
}

fn render_errors(path: &FsPath, errors: &[ParseError]) -> String {
    let lines: Vec<String> = errors.iter().map(|e| format!("{}:{e}", path.display())).collect();
    lines.join("\n")
}

impl SourceFile {
    pub fn parse(text: impl Into<String>, env: &Env) -> Result<Self, Vec<ParseError>> {
        let text = text.into();
        let decls = parser::parse_decls(&text, env)?;
        let decls = decls.into_iter().map(|(decl, span)| Declaration { decl, span }).collect();
        Ok(Self { path: None, text, decls })
    }

    /// Reads a `.sk` or `.sk.json` file.
    pub fn load(path: impl AsRef<FsPath>, env: &Env) -> Result<Self, LoadError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.to_owned(), source })?;
        let parsed = if path.to_string_lossy().ends_with(".json") {
            from_json(&text, env).map(|ds| Self {
                path: None,
                text: text.clone(),
                decls: ds.into_iter().map(|decl| Declaration { decl, span: Span::default() }).collect(),
            })
        } else {
            Self::parse(text, env)
        };
        let mut file = parsed.map_err(|errors| LoadError::Parse { path: path.to_owned(), errors })?;
        file.path = Some(path.to_owned());
        Ok(file)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Decl> {
        self.decls.iter().map(|d| &d.decl)
    }

    pub fn find(&self, name: &str) -> Option<&Decl> {
        self.iter().find(|d| d.name() == name)
    }

    pub fn sketches(&self) -> impl Iterator<Item = &Sketch> {
        self.iter().filter_map(|d| if let Decl::Sketch(s) = d { Some(s) } else { None })
    }

    pub fn specs(&self) -> impl Iterator<Item = &Presentation> {
        self.iter().filter_map(|d| if let Decl::Spec(s) = d { Some(s) } else { None })
    }

    pub fn morphisms(&self) -> impl Iterator<Item = &SketchMorphism> {
        self.iter().filter_map(|d| if let Decl::Morphism(m) = d { Some(m) } else { None })
    }

    pub fn configs(&self) -> impl Iterator<Item = &NamedConfig> {
        self.iter().filter_map(|d| if let Decl::Config(c) = d { Some(c) } else { None })
    }
}

pub fn parse(text: &str) -> Result<Vec<Decl>, Vec<ParseError>> {
    parse_with(text, &Env::default())
}

pub fn parse_with(text: &str, env: &Env) -> Result<Vec<Decl>, Vec<ParseError>> {
    Ok(parser::parse_decls(text, env)?.into_iter().map(|(d, _)| d).collect())
}

/// Canonical text of one declaration.
pub fn serialize(d: &Decl) -> String {
    print::decl(d)
}

/// Canonical text of a file: declarations in order, separated by blank lines.
pub fn serialize_all(decls: &[Decl]) -> String {
    decls.iter().map(serialize).collect::<Vec<_>>().join("\n")
}
