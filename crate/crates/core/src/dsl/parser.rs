use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use super::lexer::{lex, Pos, Span, Tok, Token};
use super::{Decl, Env, NamedConfig, ParseError};
use crate::engine::ChaseConfig;
use crate::ids::{ArrowId, ObjectId};
use crate::localizer::SketchMorphism;
use crate::realization::Presentation;
use crate::sketch::{Cone, ConeEdge, Path, PathEquation, Sketch};

const TOP: [&str; 4] = ["sketch", "spec", "morphism", "config"];
const SKETCH_ITEMS: [&str; 5] = ["object", "arrow", "mono", "cone", "eq"];
const SPEC_ITEMS: [&str; 2] = ["elem", "act"];
const MORPHISM_ITEMS: [&str; 2] = ["obj", "arr"];
const CONFIG_ITEMS: [&str; 3] = ["max_rounds", "rules", "max_elements"];

#[derive(Clone, Debug)]
struct Id {
    name: String,
    span: Span,
}

#[derive(Clone, Debug)]
enum RawPath {
    Identity(Id),
    Arrows(Vec<Id>),
}

#[derive(Debug)]
enum SketchItem {
    Object(Id),
    Arrow { id: Id, src: Id, tgt: Id, mono: bool },
    Mono(Id),
    Cone { apex: Id, edges: Vec<(Id, Id, RawPath)>, projs: Vec<Id> },
    Eq(RawPath, RawPath),
}

#[derive(Debug)]
enum RawDecl {
    Sketch { name: Id, items: Vec<SketchItem> },
    Spec { name: Id, over: Id, elems: Vec<(Id, Id)>, acts: Vec<(Id, Id, Id)> },
    Morphism { name: Id, src: Id, tgt: Id, objs: Vec<(Id, Id)>, arrs: Vec<(Id, RawPath)> },
    Config { name: Id, entries: Vec<(Id, Vec<Id>)> },
}

impl RawDecl {
    fn name(&self) -> &Id {
        match self {
            RawDecl::Sketch { name, .. }
            | RawDecl::Spec { name, .. }
            | RawDecl::Morphism { name, .. }
            | RawDecl::Config { name, .. } => name,
        }
    }
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    errors: Vec<ParseError>,
}

type PResult<T> = Result<T, ()>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.i]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn error(&mut self, pos: Pos, message: impl Into<String>) {
        self.errors.push(ParseError { pos, message: message.into() });
    }

    fn unexpected<T>(&mut self, what: &str) -> PResult<T> {
        let t = self.peek().clone();
        self.error(t.span.start, format!("expected {what}, found {}", t.tok));
        Err(())
    }

    fn at_keyword(&self, kws: &[&str]) -> Option<String> {
        match &self.peek().tok {
            Tok::Ident(s) if kws.contains(&s.as_str()) => Some(s.clone()),
            _ => None,
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if self.peek().tok == tok {
            Ok(self.bump().span)
        } else {
            self.unexpected(&tok.to_string())
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<Span> {
        if self.at_keyword(&[kw]).is_some() {
            Ok(self.bump().span)
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> PResult<Id> {
        match &self.peek().tok {
            Tok::Ident(s) | Tok::Str(s) => {
                let name = s.clone();
                let span = self.bump().span;
                Ok(Id { name, span })
            }
            _ => self.unexpected("a name"),
        }
    }

    fn at_name(&self) -> bool {
        matches!(self.peek().tok, Tok::Ident(_) | Tok::Str(_))
    }

    fn path(&mut self) -> PResult<RawPath> {
        if self.at_keyword(&["id"]).is_some() && self.toks.get(self.i + 1).map(|t| &t.tok) == Some(&Tok::LParen) {
            self.bump();
            self.bump();
            let o = self.ident()?;
            self.expect(Tok::RParen)?;
            return Ok(RawPath::Identity(o));
        }
        let mut v = vec![self.ident()?];
        while self.peek().tok == Tok::Dot {
            self.bump();
            v.push(self.ident()?);
        }
        Ok(RawPath::Arrows(v))
    }

    /// Skips to the next item keyword, closing brace or top-level keyword.
    fn sync(&mut self, kws: &[&str]) {
        loop {
            match &self.peek().tok {
                Tok::Eof | Tok::RBrace => return,
                Tok::Ident(s) if kws.contains(&s.as_str()) || TOP.contains(&s.as_str()) => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    /// Parses `{ item* }`, recovering after each bad item.
    fn block(&mut self, kws: &[&str], mut item: impl FnMut(&mut Self, &str) -> PResult<()>) -> PResult<()> {
        self.expect(Tok::LBrace)?;
        loop {
            if let Some(k) = self.at_keyword(kws) {
                self.bump();
                if item(self, &k).is_err() {
                    self.sync(kws);
                }
                continue;
            }
            match &self.peek().tok {
                Tok::RBrace => {
                    self.bump();
                    return Ok(());
                }
                Tok::Eof => return self.unexpected("`}`"),
                Tok::Ident(s) if TOP.contains(&s.as_str()) => return self.unexpected("`}`"),
                _ => {
                    let list: Vec<String> = kws.iter().map(|k| format!("`{k}`")).collect();
                    let _ = self.unexpected::<()>(&format!("one of {} or `}}`", list.join(", ")));
                    self.bump();
                    self.sync(kws);
                }
            }
        }
    }

    fn cone(&mut self) -> PResult<SketchItem> {
        let apex = self.ident()?;
        self.expect(Tok::LBrace)?;
        self.keyword("base")?;
        let mut edges = Vec::new();
        while self.peek().tok != Tok::Semi {
            if !self.at_name() {
                return self.unexpected("a base edge or `;`");
            }
            let from = self.ident()?;
            self.expect(Tok::Arrow)?;
            let to = self.ident()?;
            self.expect(Tok::Colon)?;
            let p = self.path()?;
            edges.push((from, to, p));
        }
        self.bump();
        self.keyword("proj")?;
        let mut projs = Vec::new();
        while self.at_name() {
            projs.push(self.ident()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(SketchItem::Cone { apex, edges, projs })
    }

    fn sketch_item(&mut self, kw: &str) -> PResult<SketchItem> {
        Ok(match kw {
            "object" => SketchItem::Object(self.ident()?),
            "arrow" => {
                let id = self.ident()?;
                self.expect(Tok::Colon)?;
                let src = self.ident()?;
                self.expect(Tok::Arrow)?;
                let tgt = self.ident()?;
                let mut mono = false;
                if self.peek().tok == Tok::LBracket {
                    self.bump();
                    self.keyword("mono")?;
                    self.expect(Tok::RBracket)?;
                    mono = true;
                }
                SketchItem::Arrow { id, src, tgt, mono }
            }
            "mono" => SketchItem::Mono(self.ident()?),
            "cone" => self.cone()?,
            _ => {
                let l = self.path()?;
                self.expect(Tok::Eq)?;
                SketchItem::Eq(l, self.path()?)
            }
        })
    }

    fn decl(&mut self, kw: &str) -> PResult<RawDecl> {
        match kw {
            "sketch" => {
                let name = self.ident()?;
                let mut items = Vec::new();
                self.block(&SKETCH_ITEMS, |p, k| {
                    items.push(p.sketch_item(k)?);
                    Ok(())
                })?;
                Ok(RawDecl::Sketch { name, items })
            }
            "spec" => {
                let name = self.ident()?;
                self.keyword("over")?;
                let over = self.ident()?;
                let (mut elems, mut acts) = (Vec::new(), Vec::new());
                self.block(&SPEC_ITEMS, |p, k| {
                    if k == "elem" {
                        let x = p.ident()?;
                        p.expect(Tok::Colon)?;
                        elems.push((x, p.ident()?));
                    } else {
                        let f = p.ident()?;
                        p.expect(Tok::LParen)?;
                        let x = p.ident()?;
                        p.expect(Tok::RParen)?;
                        p.expect(Tok::Eq)?;
                        acts.push((f, x, p.ident()?));
                    }
                    Ok(())
                })?;
                Ok(RawDecl::Spec { name, over, elems, acts })
            }
            "morphism" => {
                let name = self.ident()?;
                self.expect(Tok::Colon)?;
                let src = self.ident()?;
                self.expect(Tok::Arrow)?;
                let tgt = self.ident()?;
                let (mut objs, mut arrs) = (Vec::new(), Vec::new());
                self.block(&MORPHISM_ITEMS, |p, k| {
                    let from = p.ident()?;
                    p.expect(Tok::FatArrow)?;
                    if k == "obj" {
                        objs.push((from, p.ident()?));
                    } else {
                        arrs.push((from, p.path()?));
                    }
                    Ok(())
                })?;
                Ok(RawDecl::Morphism { name, src, tgt, objs, arrs })
            }
            _ => {
                let name = self.ident()?;
                let mut entries = Vec::new();
                self.block(&CONFIG_ITEMS, |p, k| {
                    let key = Id { name: k.to_owned(), span: p.toks[p.i - 1].span };
                    let mut vals = vec![p.ident()?];
                    if k == "rules" {
                        while p.peek().tok == Tok::Comma {
                            p.bump();
                            vals.push(p.ident()?);
                        }
                    }
                    entries.push((key, vals));
                    Ok(())
                })?;
                Ok(RawDecl::Config { name, entries })
            }
        }
    }

    fn file(&mut self) -> Vec<(RawDecl, Span)> {
        let mut out = Vec::new();
        loop {
            if self.peek().tok == Tok::Eof {
                return out;
            }
            let Some(kw) = self.at_keyword(&TOP) else {
                let _ = self.unexpected::<()>("`sketch`, `spec`, `morphism` or `config`");
                self.bump();
                while self.peek().tok != Tok::Eof && self.at_keyword(&TOP).is_none() {
                    self.bump();
                }
                continue;
            };
            let start = self.bump().span.start;
            match self.decl(&kw) {
                Ok(d) => {
                    let end = self.toks[self.i.saturating_sub(1)].span.end;
                    out.push((d, Span { start, end }));
                }
                Err(()) => {
                    // Resume at the next declaration.
                    while self.peek().tok != Tok::Eof && self.at_keyword(&TOP).is_none() {
                        self.bump();
                    }
                }
            }
        }
    }
}

/// Resolution state shared by the second pass.
struct Resolver<'a> {
    env: &'a Env,
    local: BTreeMap<String, Arc<Sketch>>,
    errors: Vec<ParseError>,
}

impl Resolver<'_> {
    fn error(&mut self, span: Span, message: impl Into<String>) {
        self.errors.push(ParseError { pos: span.start, message: message.into() });
    }

    fn sketch(&mut self, id: &Id) -> Option<Arc<Sketch>> {
        let found = self.local.get(&id.name).cloned().or_else(|| self.env.lookup_with(&id.name, &self.local));
        if found.is_none() {
            self.error(id.span, format!("dangling reference: sketch `{}` is not declared", id.name));
        }
        found
    }

    fn path(&mut self, p: &RawPath, objects: &BTreeSet<ObjectId>, arrows: &BTreeSet<ArrowId>) -> Path {
        match p {
            RawPath::Identity(o) => {
                if !objects.contains(o.name.as_str()) {
                    self.error(o.span, format!("dangling reference: object `{}` is not declared", o.name));
                }
                Path::identity(o.name.as_str())
            }
            RawPath::Arrows(v) => {
                for a in v {
                    if !arrows.contains(a.name.as_str()) {
                        self.error(a.span, format!("dangling reference: arrow `{}` is not declared", a.name));
                    }
                }
                Path::of(v.iter().map(|a| a.name.as_str()))
            }
        }
    }

    fn build_sketch(&mut self, name: &Id, items: &[SketchItem]) -> Sketch {
        let mut sk = Sketch::new(name.name.as_str());
        let mut obj_spans: HashMap<&str, Span> = HashMap::new();
        let mut arrow_spans: HashMap<&str, Span> = HashMap::new();
        for it in items {
            match it {
                SketchItem::Object(o) => {
                    if obj_spans.insert(&o.name, o.span).is_some() {
                        self.error(o.span, format!("duplicate object `{}`", o.name));
                    }
                    sk.objects.insert(o.name.as_str().into());
                }
                SketchItem::Arrow { id, .. } if arrow_spans.insert(&id.name, id.span).is_some() => {
                    self.error(id.span, format!("duplicate arrow `{}`", id.name));
                }
                _ => {}
            }
        }
        let arrows: BTreeSet<ArrowId> = arrow_spans.keys().map(|a| ArrowId::from(*a)).collect();
        let mut mono_seen = BTreeSet::new();
        let mut mark_mono = |r: &mut Self, sk: &mut Sketch, id: &Id| {
            if !mono_seen.insert(id.name.clone()) {
                r.error(id.span, format!("duplicate mono `{}`", id.name));
            }
            sk.monos.insert(id.name.as_str().into());
        };
        for it in items {
            match it {
                SketchItem::Object(_) => {}
                SketchItem::Arrow { id, src, tgt, mono } => {
                    for o in [src, tgt] {
                        if !sk.objects.contains(o.name.as_str()) {
                            self.error(o.span, format!("dangling reference: object `{}` is not declared", o.name));
                        }
                    }
                    sk.arrows.entry(id.name.as_str().into()).or_insert_with(|| crate::sketch::ArrowDecl {
                        id: id.name.as_str().into(),
                        src: src.name.as_str().into(),
                        tgt: tgt.name.as_str().into(),
                    });
                    if *mono {
                        mark_mono(self, &mut sk, id);
                    }
                }
                SketchItem::Mono(id) => {
                    if !arrows.contains(id.name.as_str()) {
                        self.error(id.span, format!("dangling reference: arrow `{}` is not declared", id.name));
                    }
                    mark_mono(self, &mut sk, id);
                }
                SketchItem::Cone { apex, edges, projs } => {
                    if !sk.objects.contains(apex.name.as_str()) {
                        self.error(apex.span, format!("dangling reference: object `{}` is not declared", apex.name));
                    }
                    if sk.cones.contains_key(apex.name.as_str()) {
                        self.error(apex.span, format!("duplicate cone over `{}`", apex.name));
                    }
                    let mut cone = Cone::new(apex.name.as_str());
                    for p in projs {
                        if !arrows.contains(p.name.as_str()) {
                            self.error(p.span, format!("dangling reference: arrow `{}` is not declared", p.name));
                        }
                        if !cone.projections.insert(p.name.as_str().into()) {
                            self.error(p.span, format!("duplicate projection `{}`", p.name));
                        }
                    }
                    for (from, to, p) in edges {
                        for end in [from, to] {
                            if !cone.projections.contains(end.name.as_str()) {
                                self.error(
                                    end.span,
                                    format!("dangling reference: `{}` is not a projection of this cone", end.name),
                                );
                            }
                        }
                        let path = self.path(p, &sk.objects, &arrows);
                        cone.edges.insert(ConeEdge::new(from.name.as_str(), to.name.as_str(), path));
                    }
                    if !sk.cones.contains_key(apex.name.as_str()) {
                        sk.insert_cone(cone);
                    }
                }
                SketchItem::Eq(l, r) => {
                    let l = self.path(l, &sk.objects, &arrows);
                    let r = self.path(r, &sk.objects, &arrows);
                    sk.equations.insert(PathEquation::new(l, r));
                }
            }
        }
        sk
    }

    fn build_spec(&mut self, name: &Id, over: &Id, elems: &[(Id, Id)], acts: &[(Id, Id, Id)]) -> Option<Presentation> {
        let sk = self.sketch(over);
        let mut p = Presentation::new(name.name.as_str(), sk.clone().unwrap_or_else(|| Arc::new(Sketch::new(""))));
        let mut carrier_of: HashMap<(&str, &str), ()> = HashMap::new();
        for (x, o) in elems {
            if let Some(sk) = &sk {
                if !sk.objects.contains(o.name.as_str()) {
                    self.error(o.span, format!("dangling reference: object `{}` is not in `{}`", o.name, sk.name));
                    continue;
                }
            }
            if carrier_of.insert((&o.name, &x.name), ()).is_some() {
                self.error(x.span, format!("duplicate element `{}` in `{}`", x.name, o.name));
                continue;
            }
            p = p.elem(&x.name, &o.name);
        }
        let mut seen: HashMap<(&str, &str), &str> = HashMap::new();
        for (f, x, y) in acts {
            if let Some(sk) = &sk {
                let Some(d) = sk.arrow_decl(&f.name) else {
                    self.error(f.span, format!("dangling reference: arrow `{}` is not in `{}`", f.name, sk.name));
                    continue;
                };
                if !carrier_of.contains_key(&(d.src.as_str(), x.name.as_str())) {
                    self.error(x.span, format!("dangling reference: element `{}` is not in `{}`", x.name, d.src));
                }
                if !carrier_of.contains_key(&(d.tgt.as_str(), y.name.as_str())) {
                    self.error(y.span, format!("dangling reference: element `{}` is not in `{}`", y.name, d.tgt));
                }
            }
            if seen.insert((&f.name, &x.name), &y.name).is_some() {
                self.error(f.span, format!("duplicate action `{}({})`", f.name, x.name));
                continue;
            }
            p = p.act(&f.name, &x.name, &y.name);
        }
        sk.map(|_| p)
    }

    fn build_morphism(
        &mut self,
        name: &Id,
        src: &Id,
        tgt: &Id,
        objs: &[(Id, Id)],
        arrs: &[(Id, RawPath)],
    ) -> Option<SketchMorphism> {
        let s = self.sketch(src);
        let t = self.sketch(tgt);
        let (s, t) = (s?, t?);
        let mut m = SketchMorphism::new(name.name.as_str(), s.clone(), t.clone());
        for (a, b) in objs {
            if !s.objects.contains(a.name.as_str()) {
                self.error(a.span, format!("dangling reference: object `{}` is not in `{}`", a.name, s.name));
            }
            if !t.objects.contains(b.name.as_str()) {
                self.error(b.span, format!("dangling reference: object `{}` is not in `{}`", b.name, t.name));
            }
            if m.object_map.contains_key(a.name.as_str()) {
                self.error(a.span, format!("duplicate object mapping for `{}`", a.name));
                continue;
            }
            m = m.obj(&a.name, &b.name);
        }
        let tgt_arrows: BTreeSet<ArrowId> = t.arrows.keys().cloned().collect();
        for (a, p) in arrs {
            if !s.arrows.contains_key(a.name.as_str()) {
                self.error(a.span, format!("dangling reference: arrow `{}` is not in `{}`", a.name, s.name));
            }
            let path = self.path(p, &t.objects, &tgt_arrows);
            if m.arrow_map.contains_key(a.name.as_str()) {
                self.error(a.span, format!("duplicate arrow mapping for `{}`", a.name));
                continue;
            }
            m = m.arr(&a.name, path);
        }
        Some(m)
    }

    fn build_config(&mut self, entries: &[(Id, Vec<Id>)]) -> ChaseConfig {
        let mut cfg = ChaseConfig::default();
        let mut seen = BTreeSet::new();
        for (k, vals) in entries {
            if !seen.insert(k.name.as_str()) {
                self.error(k.span, format!("duplicate setting `{}`", k.name));
            }
            match k.name.as_str() {
                "rules" => cfg.rule_subset = Some(vals.iter().map(|v| v.name.clone()).collect()),
                key => match vals[0].name.parse::<usize>() {
                    Ok(n) if n > 0 => {
                        if key == "max_rounds" {
                            cfg.max_rounds = n;
                        } else {
                            cfg.max_elements = n;
                        }
                    }
                    _ => {
                        self.error(vals[0].span, format!("`{key}` needs a positive integer, found `{}`", vals[0].name))
                    }
                },
            }
        }
        cfg
    }
}

/// Parses and resolves `text`. Sketch names are looked up in the file first,
/// then in `env`.
pub(crate) fn parse_decls(text: &str, env: &Env) -> Result<Vec<(Decl, Span)>, Vec<ParseError>> {
    let (toks, lex_errors) = lex(text);
    let mut p = Parser { toks, i: 0, errors: Vec::new() };
    p.errors.extend(lex_errors.into_iter().map(|(pos, message)| ParseError { pos, message }));
    let raw = p.file();
    let mut r = Resolver { env, local: BTreeMap::new(), errors: Vec::new() };

    let mut names: HashMap<String, Span> = HashMap::new();
    for (d, _) in &raw {
        let n = d.name();
        if names.insert(n.name.clone(), n.span).is_some() {
            r.error(n.span, format!("duplicate declaration `{}`", n.name));
        }
    }
    let mut built: Vec<Option<Decl>> = Vec::with_capacity(raw.len());
    for (d, _) in &raw {
        built.push(match d {
            RawDecl::Sketch { name, items } => {
                let sk = r.build_sketch(name, items);
                r.local.entry(name.name.clone()).or_insert_with(|| Arc::new(sk.clone()));
                Some(Decl::Sketch(sk))
            }
            _ => None,
        });
    }
    for (slot, (d, _)) in built.iter_mut().zip(&raw) {
        *slot = match d {
            RawDecl::Sketch { .. } => slot.take(),
            RawDecl::Spec { name, over, elems, acts } => r.build_spec(name, over, elems, acts).map(Decl::Spec),
            RawDecl::Morphism { name, src, tgt, objs, arrs } => {
                r.build_morphism(name, src, tgt, objs, arrs).map(Decl::Morphism)
            }
            RawDecl::Config { name, entries } => {
                Some(Decl::Config(NamedConfig { name: name.name.clone(), config: r.build_config(entries) }))
            }
        };
    }
    let mut errors = p.errors;
    errors.extend(r.errors);
    if !errors.is_empty() {
        errors.sort_by_key(|e| e.pos);
        errors.dedup();
        return Err(errors);
    }
    Ok(built.into_iter().zip(raw).filter_map(|(d, (_, span))| d.map(|d| (d, span))).collect())
}
