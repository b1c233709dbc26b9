use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use diaglogic::dsl::{self, Decl, DeclJson, Env, SourceFile};
use diaglogic::engine::saturate_presentation;
use diaglogic::localizer::default_plan;
use diaglogic::{
    apply_rule, break_cycles, check_realization, check_sketch_morphism, find_cycles, match_rule, representable,
    restrict_along, rules_of, validate_sketch, ArrowId, ChaseConfig, Fraction, Localiser, Match, Presentation,
    Realization, Rule, Sketch, SketchMorphism, ValidationReport, Violation,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "diaglogic", version, about = "Diagrammatic logic over finite limit sketches")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Files whose sketches and morphisms are visible to every input.
    #[arg(long = "lib", value_name = "FILE", global = true)]
    libs: Vec<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args)]
struct ChaseArgs {
    /// Theory sketch whose cycle-breaking gives the rules. Defaults to the
    /// spec's sketch name without its `_sp` suffix.
    #[arg(long)]
    theory: Option<String>,
    /// A localiser morphism to take the rules from instead of `--theory`.
    #[arg(long)]
    sigma: Option<String>,
    /// A `config` declaration to start from.
    #[arg(long)]
    config: Option<String>,
    #[arg(long, value_delimiter = ',')]
    rules: Option<Vec<String>>,
    #[arg(long)]
    max_rounds: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check every declaration of a file.
    Validate { file: PathBuf },
    /// Check the specs of a file against sketches from another.
    CheckReal { sketch_file: PathBuf, spec_file: PathBuf },
    /// Report the cycles of a theory sketch and break them.
    Break {
        file: PathBuf,
        #[arg(long)]
        sketch: Option<String>,
        #[arg(long, value_delimiter = ',')]
        plan: Option<Vec<String>>,
        /// Directory for the generated sketch, localiser and cycle report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the theory generated by a specification.
    Saturate {
        spec_file: PathBuf,
        #[arg(long)]
        spec: Option<String>,
        #[command(flatten)]
        chase: ChaseArgs,
        /// Write the trace here (JSON when the name ends in `.json`).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the resulting spec here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fire one rule at one match.
    Apply {
        spec_file: PathBuf,
        rule: String,
        /// `projection=element` pairs, or the matched element itself.
        #[arg(value_name = "MATCH")]
        matcher: Vec<String>,
        #[arg(long)]
        spec: Option<String>,
        #[command(flatten)]
        chase: ChaseArgs,
    },
    /// Run a proof script: one `RULE projection=element...` step per line.
    Prove {
        spec_file: PathBuf,
        script: PathBuf,
        #[arg(long)]
        spec: Option<String>,
        #[command(flatten)]
        chase: ChaseArgs,
    },
    /// Print the representable specification at an object.
    Yoneda {
        sketch: String,
        object: String,
        #[arg(long)]
        max_elements: Option<usize>,
    },
    /// Restrict a specification along a sketch morphism.
    Transport {
        morphism_file: PathBuf,
        spec_file: PathBuf,
        #[arg(long)]
        morphism: Option<String>,
        #[arg(long)]
        spec: Option<String>,
    },
}

struct Ctx {
    format: Format,
    env: Env,
    morphisms: Vec<SketchMorphism>,
    configs: Vec<dsl::NamedConfig>,
}

impl Ctx {
    fn new(format: Format, libs: &[PathBuf]) -> Result<Self> {
        let mut ctx = Ctx { format, env: Env::default(), morphisms: Vec::new(), configs: Vec::new() };
        for lib in libs {
            ctx.load(lib)?;
        }
        Ok(ctx)
    }

    /// Loads a file and makes its sketches, morphisms and configs visible to
    /// later loads.
    fn load(&mut self, path: &Path) -> Result<SourceFile> {
        let file = SourceFile::load(path, &self.env)?;
        self.env.extend(file.iter());
        self.morphisms.extend(file.morphisms().cloned());
        self.configs.extend(file.configs().cloned());
        Ok(file)
    }

    fn sketch(&self, name: &str) -> Result<Arc<Sketch>> {
        self.env.get(name).ok_or_else(|| anyhow!("unknown sketch `{name}`"))
    }

    fn emit(&self, text: &str, value: serde_json::Value) {
        match self.format {
            Format::Text => out(text),
            Format::Json => out(&(serde_json::to_string_pretty(&value).unwrap_or_default() + "\n")),
        }
    }

    fn chase_config(&self, args: &ChaseArgs) -> Result<ChaseConfig> {
        let mut cfg = match &args.config {
            Some(n) => self
                .configs
                .iter()
                .rev()
                .find(|c| c.name == *n)
                .map(|c| c.config.clone())
                .ok_or_else(|| anyhow!("unknown config `{n}`"))?,
            None => ChaseConfig::default(),
        };
        if let Some(r) = &args.rules {
            cfg.rule_subset = Some(r.clone());
        }
        if let Some(n) = args.max_rounds {
            cfg.max_rounds = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// The localiser whose source is `over`.
    fn localiser(&self, over: &Arc<Sketch>, args: &ChaseArgs) -> Result<Localiser> {
        let loc = if let Some(n) = &args.sigma {
            let m =
                self.morphisms.iter().rev().find(|m| m.name == *n).ok_or_else(|| anyhow!("unknown morphism `{n}`"))?;
            Localiser::from_morphism(m.clone())?
        } else {
            let name =
                match &args.theory {
                    Some(t) => t.clone(),
                    None => over.name.strip_suffix("_sp").map(str::to_owned).ok_or_else(|| {
                        anyhow!("cannot tell the theory of `{}`; pass --theory or --sigma", over.name)
                    })?,
                };
            let theory = self.sketch(&name)?;
            break_cycles(&theory, None)?.1
        };
        if **loc.src() != **over {
            bail!("the rules of `{}` apply to `{}`, not to `{}`", loc.tgt().name, loc.src().name, over.name);
        }
        Ok(loc)
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn out(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn pick<'a, T>(items: Vec<&'a T>, name: Option<&str>, what: &str, name_of: impl Fn(&T) -> &str) -> Result<&'a T> {
    match name {
        Some(n) => items.into_iter().find(|x| name_of(x) == n).ok_or_else(|| anyhow!("no {what} named `{n}`")),
        None => match items.as_slice() {
            [one] => Ok(one),
            [] => bail!("no {what} in the file"),
            _ => bail!("several {what}s in the file; choose one by name"),
        },
    }
}

fn sizes(r: &Realization) -> String {
    r.carriers.iter().map(|(o, s)| format!("{o}={}", s.len())).collect::<Vec<_>>().join(" ")
}

fn spec_text(r: &Realization) -> String {
    dsl::serialize(&Decl::Spec(r.to_presentation()))
}

fn spec_json(r: &Realization) -> serde_json::Value {
    serde_json::to_value(dsl::realization_json(r)).unwrap_or_default()
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn report_of(d: &Decl) -> ValidationReport {
    match d {
        Decl::Sketch(s) => validate_sketch(s),
        Decl::Spec(p) => spec_report(p),
        Decl::Morphism(m) => check_sketch_morphism(m),
        Decl::Config(c) => {
            let mut r = ValidationReport::new();
            if let Err(e) = c.config.validate() {
                r.push(Violation::new("config", &c.name, e.to_string()));
            }
            r
        }
    }
}

fn spec_report(p: &Presentation) -> ValidationReport {
    match p.clone().into_realization() {
        Ok(r) => check_realization(&r),
        Err(e) => {
            let mut r = ValidationReport::new();
            r.push(Violation::new("presentation", &p.name, e.to_string()));
            r
        }
    }
}

fn reports<'a>(ctx: &Ctx, decls: impl Iterator<Item = &'a Decl>) -> u8 {
    let mut text = String::new();
    let mut out = Vec::new();
    let mut failed = false;
    for d in decls {
        let r = report_of(d);
        failed |= !r.is_empty();
        let _ = write!(text, "{} {}: {r}", d.kind(), d.name());
        out.push(json!({ "kind": d.kind(), "name": d.name(), "report": r }));
    }
    ctx.emit(&text, json!(out));
    u8::from(failed)
}

fn cmd_break(
    ctx: &mut Ctx,
    file: &Path,
    sketch: Option<&str>,
    plan: Option<&[String]>,
    out: Option<&Path>,
) -> Result<u8> {
    let f = ctx.load(file)?;
    let theory = pick(f.sketches().collect(), sketch, "sketch", |s| &s.name)?.clone();
    let cycles = find_cycles(&theory);
    let plan: Vec<ArrowId> = match plan {
        Some(p) => p.iter().map(|a| ArrowId::from(a.as_str())).collect(),
        None => default_plan(&theory),
    };
    let (sp, loc) = break_cycles(&theory, Some(&plan))?;
    let sigma_check = check_sketch_morphism(&loc.underlying);
    let sp_text = dsl::serialize(&Decl::Sketch(sp.clone()));
    let sigma_text = dsl::serialize(&Decl::Morphism(loc.underlying.clone()));

    let mut text = format!("cycles of {}:\n{cycles}", theory.name);
    for b in &loc.broken {
        let _ = writeln!(
            text,
            "broke {}: {} >-> {} -> {} via {} and {}",
            b.original, b.part_object, sp.arrows[&b.mono].tgt, sp.arrows[&b.part_arrow].tgt, b.mono, b.part_arrow
        );
    }
    let originals: Vec<&str> = loc.broken.iter().map(|b| b.original.as_str()).collect();
    let remaining = find_cycles(&sp);
    let through = remaining.cycles.iter().filter(|c| originals.iter().any(|a| c.contains(a))).count();
    let _ = writeln!(
        text,
        "cycles left in {}: {} ({} through {})",
        sp.name,
        remaining.len(),
        through,
        if originals.is_empty() { "-".to_owned() } else { originals.join(", ") }
    );
    let _ = write!(text, "localiser {}: {sigma_check}", loc.underlying.name);
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            let files = [
                (format!("{}.sk", sp.name), sp_text.clone()),
                (format!("{}.sk", loc.underlying.name), sigma_text.clone()),
                (format!("{}_cycles.txt", theory.name), cycles.to_string()),
            ];
            for (name, body) in &files {
                let path = dir.join(name);
                write_file(&path, body)?;
                let _ = writeln!(text, "wrote {}", path.display());
            }
        }
        None => {
            let _ = write!(text, "\n{sp_text}\n{sigma_text}");
        }
    }
    let value = json!({
        "theory": theory.name,
        "cycles": cycles,
        "plan": plan,
        "broken": loc.broken,
        "sketch": DeclJson::from(&Decl::Sketch(sp.clone())),
        "sigma": DeclJson::from(&Decl::Morphism(loc.underlying.clone())),
        "sigma_report": sigma_check,
    });
    ctx.emit(&text, value);
    Ok(0)
}

/// The spec repaired into a realization, with the rules that apply to it.
fn prepare(
    ctx: &mut Ctx,
    spec_file: &Path,
    spec: Option<&str>,
    args: &ChaseArgs,
) -> Result<(Presentation, Vec<Rule>, ChaseConfig)> {
    let f = ctx.load(spec_file)?;
    let p = pick(f.specs().collect(), spec, "spec", |p| &p.name)?.clone();
    let cfg = ctx.chase_config(args)?;
    let loc = ctx.localiser(&p.over, args)?;
    let rules = rules_of(&loc, &cfg)?;
    Ok((p, rules, cfg))
}

fn repaired(p: &Presentation, rules: &[Rule], cfg: &ChaseConfig) -> Result<Arc<Realization>> {
    let none = ChaseConfig { rule_subset: Some(Vec::new()), ..cfg.clone() };
    Ok(saturate_presentation(p, rules, &none)?.result)
}

fn cmd_saturate(
    ctx: &mut Ctx,
    spec_file: &Path,
    spec: Option<&str>,
    args: &ChaseArgs,
    trace: Option<&Path>,
    out: Option<&Path>,
) -> Result<u8> {
    let (p, rules, cfg) = prepare(ctx, spec_file, spec, args)?;
    let res = saturate_presentation(&p, &rules, &cfg)?;
    if let Some(path) = trace {
        let body = if path.extension().is_some_and(|e| e == "json") {
            serde_json::to_string_pretty(&res.trace)? + "\n"
        } else {
            res.trace.to_text()
        };
        write_file(path, &body)?;
    }
    let result_text = spec_text(&res.result);
    if let Some(path) = out {
        let body = if path.extension().is_some_and(|e| e == "json") {
            serde_json::to_string_pretty(&spec_json(&res.result))? + "\n"
        } else {
            result_text.clone()
        };
        write_file(path, &body)?;
    }
    let text =
        format!("status {} after {} round(s)\nsizes {}\n{result_text}", res.status, res.rounds, sizes(&res.result));
    ctx.emit(&text, dsl::chase_result_json(&res));
    Ok(0)
}

fn find_match(rule: &Rule, s: &Realization, args: &[String]) -> Result<Match> {
    let all = match_rule(rule, s);
    let found: Vec<Match> = match args {
        [x] if !x.contains('=') => all.into_iter().filter(|m| m.element == *x).collect(),
        _ => {
            let mut want = Vec::new();
            for a in args {
                let (p, x) =
                    a.split_once('=').ok_or_else(|| anyhow!("bad match component `{a}`; use projection=element"))?;
                want.push((p, x));
            }
            all.into_iter()
                .filter(|m| want.iter().all(|(p, x)| m.tuple.iter().any(|(q, y)| q.as_str() == *p && y == x)))
                .collect()
        }
    };
    match found.as_slice() {
        [m] => Ok(m.clone()),
        [] => bail!("no match of {} for `{}`", rule.id, args.join(" ")),
        _ => {
            let list: Vec<String> = found.iter().map(ToString::to_string).collect();
            bail!("ambiguous match for {}: {}", rule.id, list.join("; "))
        }
    }
}

fn rule<'a>(rules: &'a [Rule], id: &str) -> Result<&'a Rule> {
    rules.iter().find(|r| r.id == id).ok_or_else(|| {
        let ids: Vec<&str> = rules.iter().map(|r| r.id.as_str()).collect();
        anyhow!("unknown rule `{id}` (rules: {})", ids.join(", "))
    })
}

fn added(before: &Realization, after: &Realization) -> Vec<String> {
    let mut out = Vec::new();
    for (o, set) in &after.carriers {
        for x in set.iter() {
            if before.carrier(o.as_str()).is_none_or(|b| b.index_of(x).is_none()) {
                out.push(format!("{x}:{o}"));
            }
        }
    }
    out
}

fn fraction_line(f: &Fraction) -> String {
    format!("fraction {} -h-> [{}] <-c- {} ({:?})", f.src.name, sizes(&f.mid), f.tgt.name, f.certificate)
}

fn cmd_apply(
    ctx: &mut Ctx,
    spec_file: &Path,
    rule_id: &str,
    matcher: &[String],
    spec: Option<&str>,
    args: &ChaseArgs,
) -> Result<u8> {
    let (p, rules, cfg) = prepare(ctx, spec_file, spec, args)?;
    let s = repaired(&p, &rules, &cfg)?;
    let r = rule(&rules, rule_id)?;
    let m = find_match(r, &s, matcher)?;
    let (next, step) = apply_rule(&s, r, &m, &cfg)?;
    let new = added(&s, &next);
    let text = format!("fire {m}\nadded {}\n{}\n{}", new.join(" "), fraction_line(&step), spec_text(&next));
    let value = json!({
        "match": m,
        "added": new,
        "certificate": step.certificate,
        "result": spec_json(&next),
    });
    ctx.emit(&text, value);
    Ok(0)
}

fn cmd_prove(ctx: &mut Ctx, spec_file: &Path, script: &Path, spec: Option<&str>, args: &ChaseArgs) -> Result<u8> {
    let (p, rules, cfg) = prepare(ctx, spec_file, spec, args)?;
    let body = std::fs::read_to_string(script).with_context(|| format!("cannot read {}", script.display()))?;
    let mut s = repaired(&p, &rules, &cfg)?;
    let mut proof = Fraction::identity(s.clone());
    let mut text = String::new();
    let mut steps = Vec::new();
    for (n, line) in body.lines().enumerate() {
        let line = line.split("//").next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
        let at = || format!("{}:{}", script.display(), n + 1);
        let r = rule(&rules, &words[0]).with_context(at)?;
        let m = find_match(r, &s, &words[1..]).with_context(at)?;
        let (next, step) = apply_rule(&s, r, &m, &cfg).with_context(at)?;
        let new = added(&s, &next);
        let _ = writeln!(text, "step {}: {m} added {}", steps.len() + 1, new.join(" "));
        steps.push(json!({ "line": n + 1, "match": m, "added": new }));
        proof = proof.compose(&step, &rules, &cfg).with_context(at)?;
        s = next;
    }
    let _ = write!(text, "{}\n{}", fraction_line(&proof), spec_text(&proof.tgt));
    let value = json!({
        "steps": steps,
        "certificate": proof.certificate,
        "source": spec_json(&proof.src),
        "target": spec_json(&proof.tgt),
    });
    ctx.emit(&text, value);
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    let mut ctx = Ctx::new(cli.format, &cli.libs)?;
    match cli.cmd {
        Cmd::Validate { file } => {
            let f = ctx.load(&file)?;
            Ok(reports(&ctx, f.iter()))
        }
        Cmd::CheckReal { sketch_file, spec_file } => {
            ctx.load(&sketch_file)?;
            let f = ctx.load(&spec_file)?;
            let specs: Vec<Decl> = f.specs().cloned().map(Decl::Spec).collect();
            if specs.is_empty() {
                bail!("no spec in {}", spec_file.display());
            }
            Ok(reports(&ctx, specs.iter()))
        }
        Cmd::Break { file, sketch, plan, out } => {
            cmd_break(&mut ctx, &file, sketch.as_deref(), plan.as_deref(), out.as_deref())
        }
        Cmd::Saturate { spec_file, spec, chase, trace, out } => {
            cmd_saturate(&mut ctx, &spec_file, spec.as_deref(), &chase, trace.as_deref(), out.as_deref())
        }
        Cmd::Apply { spec_file, rule, matcher, spec, chase } => {
            cmd_apply(&mut ctx, &spec_file, &rule, &matcher, spec.as_deref(), &chase)
        }
        Cmd::Prove { spec_file, script, spec, chase } => {
            cmd_prove(&mut ctx, &spec_file, &script, spec.as_deref(), &chase)
        }
        Cmd::Yoneda { sketch, object, max_elements } => {
            let sk = ctx.sketch(&sketch)?;
            let mut cfg = ChaseConfig::default();
            if let Some(n) = max_elements {
                cfg.max_elements = n;
            }
            let y = representable(&sk, &object, &cfg)?;
            let text = format!("generator {}\nsizes {}\n{}", y.generator, sizes(&y.spec), spec_text(&y.spec));
            ctx.emit(&text, json!({ "object": y.at, "generator": y.generator, "spec": spec_json(&y.spec) }));
            Ok(0)
        }
        Cmd::Transport { morphism_file, spec_file, morphism, spec } => {
            let mf = ctx.load(&morphism_file)?;
            let sf = ctx.load(&spec_file)?;
            let m = pick(mf.morphisms().collect(), morphism.as_deref(), "morphism", |m| &m.name)?;
            let p = pick(sf.specs().collect(), spec.as_deref(), "spec", |p| &p.name)?;
            if *m.tgt != *p.over {
                bail!("`{}` maps into `{}`, but `{}` is over `{}`", m.name, m.tgt.name, p.name, p.over.name);
            }
            let r = p.clone().into_realization()?;
            let t = restrict_along(m, &r)?;
            ctx.emit(&spec_text(&t), spec_json(&t));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
