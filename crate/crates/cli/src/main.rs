//! `causa`: check actual-causation and sufficiency queries against models
//! written in the `.scm` model language.
//!
//! Exit codes: 0 success, 1 an asserted check failed, 2 usage or input error.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use causa::corpus::Outcome;
use causa::causation::{Analyzer, DefinitionId, Effect, Options};
use causa::dsl::{self, ModelDocument};
use causa::sufficiency::{self, SufficiencyKind};
use causa::verify::{self, minimize_counterexample, Group, Mode, ModelFamily, VerifyConfig};
use causa::{Context, PartialSetting};
use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{hash, parse_mutation, Document, QueryReport};

#[derive(Parser)]
#[command(name = "causa", version, about = "Actual causation and sufficiency in finite structural causal models")]
struct Cli {
    #[command(flatten)]
    out: OutputArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Text,
    /// JSON.
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a cause holds: a query named in the file, an inline
    /// `X=x causes Y=y`, or every query in the file.
    Check {
        file: PathBuf,
        /// Definition, then an inline query, e.g. `Def2 "ST=1 causes BS=1"`.
        #[arg(num_args = 0..=2)]
        inline: Vec<String>,
        #[arg(long)]
        def: Option<String>,
        #[arg(long)]
        context: Option<String>,
        /// Name of a query in the file.
        #[arg(long)]
        query: Option<String>,
        /// Ask whether the (single) cause is part of some cause.
        #[arg(long)]
        part_of: bool,
        /// Also report the alternative reading of AC2(a).
        #[arg(long)]
        verbose: bool,
        /// Exit 1 unless every verdict is positive.
        #[arg(long)]
        assert: bool,
    },
    /// List every cause of an effect up to a size bound.
    Causes {
        file: PathBuf,
        effect: String,
        #[arg(long, default_value = "Def2")]
        def: String,
        #[arg(long)]
        context: Option<String>,
        #[arg(long, default_value_t = 3)]
        max_size: usize,
        /// List conjuncts that are part of some cause instead.
        #[arg(long)]
        parts: bool,
    },
    /// Decide a sufficiency relation; strong kinds report their network.
    Suffices {
        file: PathBuf,
        /// direct, strong, weak, actual-direct, actual-strong or actual-weak.
        kind: String,
        cause: String,
        effect: String,
        /// Required by the actual kinds; defaults to the file's first context.
        #[arg(long)]
        context: Option<String>,
        #[arg(long)]
        assert: bool,
    },
    /// Run the golden corpus.
    Corpus {
        /// Only cases whose name contains this.
        filter: Option<String>,
        /// Show unasserted verdicts too.
        #[arg(long)]
        all: bool,
    },
    /// Check the claimed relationships between definitions on bounded
    /// families of models.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of sampled models.
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        /// A small family only (seconds instead of minutes).
        #[arg(long)]
        quick: bool,
        /// Restrict to claim groups: equivalence, implication, structural,
        /// sufficiency, evidence.
        #[arg(long, value_delimiter = ',')]
        groups: Vec<String>,
        /// Write the minimized counterexample, if any, as a model file.
        #[arg(long)]
        counterexample: Option<PathBuf>,
        /// Corrupt a definition, e.g. `skip-minimality:Def8`.
        #[arg(long, hide = true, value_parser = parse_mutation)]
        mutate: Option<causa::causation::Mutation>,
    },
    /// Parse a model file and print it back in canonical form.
    Parse { file: PathBuf },
}

/// A failure that maps to exit code 2.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        usage(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(format!("error: {}", msg.into()))
}

type Result<T> = std::result::Result<T, UsageError>;

fn load(path: &Path) -> Result<(String, ModelDocument)> {
    let src = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let doc = dsl::parse(&src).map_err(|e| UsageError(e.render(&src, &path.display().to_string())))?;
    Ok((src, doc))
}

fn context<'a>(doc: &'a ModelDocument, name: Option<&str>) -> Result<&'a Context> {
    doc.resolve_context(name).map(|c| &c.context).ok_or_else(|| match name {
        Some(n) => usage(format!("no context named `{n}`")),
        None => usage("the model has no context; declare one with `context NAME { ... }`"),
    })
}

fn definition(s: &str) -> Result<DefinitionId> {
    s.parse().map_err(|_| usage(format!("unknown definition `{s}` (Def1..Def12, OriginalHP, UpdatedHP, ModifiedHP, StrongHP)")))
}

fn setting(doc: &ModelDocument, s: &str) -> Result<PartialSetting> {
    dsl::parse_setting(&doc.model, s).map_err(|e| usage(format!("`{s}`: {e}")))
}

fn effect(doc: &ModelDocument, s: &str) -> Result<Effect> {
    dsl::parse_effect(&doc.model, s).map_err(|e| usage(format!("`{s}`: {e}")))
}

/// A command's report and whether its asserted checks passed.
type Report = (Document, bool);

fn check(
    file: &Path,
    inline: &[String],
    def: Option<&str>,
    ctx_name: Option<&str>,
    query: Option<&str>,
    part_of: bool,
    verbose: bool,
    assert: bool,
) -> Result<Report> {
    let (src, doc) = load(file)?;
    let (inline_def, inline_query) = match inline {
        [] => (None, None),
        [one] if one.contains(" causes ") => (None, Some(one.as_str())),
        [one] => (Some(one.as_str()), None),
        [d, q, ..] => (Some(d.as_str()), Some(q.as_str())),
    };
    let def = match (def, inline_def) {
        (Some(_), Some(_)) => return Err(usage("give the definition once")),
        (d, i) => d.or(i).map(definition).transpose()?,
    };
    // (name, definition, cause, effect, context)
    let mut jobs: Vec<(Option<String>, DefinitionId, PartialSetting, Effect, Option<String>)> = Vec::new();
    if let Some(q) = inline_query {
        let (x, y) = q.split_once(" causes ").ok_or_else(|| usage(format!("expected `CAUSE causes EFFECT`, got `{q}`")))?;
        let d = def.ok_or_else(|| usage("an inline query needs a definition"))?;
        jobs.push((None, d, setting(&doc, x.trim())?, effect(&doc, y.trim())?, None));
    } else {
        let named: Vec<_> = match query {
            Some(n) => vec![doc.query(n).ok_or_else(|| usage(format!("no query named `{n}`")))?],
            None => doc.queries.iter().collect(),
        };
        if named.is_empty() {
            return Err(usage("the file has no queries; give one inline"));
        }
        for q in named {
            jobs.push((Some(q.name.clone()), def.unwrap_or(q.definition), q.cause.clone(), q.effect.clone(), q.context.clone()));
        }
    }
    let options = Options { verbose, ..Options::default() };
    let mut out = Document::new(Some(hash(&[&src])));
    let mut all = true;
    for (name, d, x, y, qctx) in jobs {
        let u = context(&doc, ctx_name.or(qctx.as_deref()))?;
        let an = Analyzer::with_options(&doc.model, u, options)?;
        let v = if part_of {
            let mut conjuncts = x.iter();
            let (Some(c), None) = (conjuncts.next(), conjuncts.next()) else {
                return Err(usage("--part-of takes a single conjunct"));
            };
            an.is_part_of_cause(d, c, &y, None)?
        } else {
            an.is_cause(d, &x, &y)?
        };
        all &= v.is_cause;
        out.queries.push(QueryReport::from_verdict(an.model(), &v, name.as_deref()));
    }
    Ok((out, all || !assert))
}

fn causes(file: &Path, eff: &str, def: &str, ctx_name: Option<&str>, max_size: usize, parts: bool) -> Result<Report> {
    let (src, doc) = load(file)?;
    let d = definition(def)?;
    let y = effect(&doc, eff)?;
    let an = Analyzer::new(&doc.model, context(&doc, ctx_name)?)?;
    let m = an.model();
    let mut out = Document::new(Some(hash(&[&src])));
    let mut found = Vec::new();
    if parts {
        let w = an.actual_world();
        for v in doc.model.endogenous().filter(|v| *v != y.var) {
            let verdict = an.is_part_of_cause(d, (v, w.get(v)), &y, Some(max_size))?;
            if verdict.is_cause {
                found.push(verdict.cause.display(m).to_string());
                out.queries.push(QueryReport::from_verdict(m, &verdict, None));
            }
        }
    } else {
        for verdict in an.find_all_causes(d, &y, max_size)? {
            found.push(verdict.cause.display(m).to_string());
            out.queries.push(QueryReport::from_verdict(m, &verdict, None));
        }
    }
    out.causes = Some(found);
    Ok((out, true))
}

fn suffices(file: &Path, kind: &str, x: &str, y: &str, ctx_name: Option<&str>, assert: bool) -> Result<Report> {
    let (src, doc) = load(file)?;
    let kind: SufficiencyKind = kind.parse().map_err(usage)?;
    let (xs, ys) = (setting(&doc, x)?, setting(&doc, y)?);
    let u = if kind.is_actual() { Some(context(&doc, ctx_name)?) } else { None };
    let m = &doc.model;
    let (holds, network) = match kind {
        SufficiencyKind::Strong | SufficiencyKind::ActualStrong => {
            let w = sufficiency::strongly_sufficient(m, &xs, &ys, u)?;
            (w.is_some(), w.map(|w| w.values))
        }
        _ => (sufficiency::sufficient(m, &xs, &ys, kind, u)?, None),
    };
    let mut out = Document::new(Some(hash(&[&src])));
    out.sufficiency(m, kind.to_string(), &xs, &ys, holds, network.as_ref());
    Ok((out, holds || !assert))
}

fn corpus_cmd(filter: Option<&str>, all: bool) -> Result<Report> {
    let mut report = causa::corpus::run_corpus(filter)?;
    let ok = report.all_pass();
    let summary = format!("{} pass, {} fail, {} unasserted", report.count(Outcome::Pass), report.count(Outcome::Fail), report.count(Outcome::Unasserted));
    if !all {
        report.checks.retain(|c| c.outcome != Outcome::Unasserted);
    }
    let sources: Vec<&str> = std::iter::once(causa::corpus::MANIFEST).chain(causa::corpus::FIXTURES.iter().map(|(_, s)| *s)).collect();
    let mut out = Document::new(Some(hash(&sources)));
    out.corpus = Some(report);
    out.notes.push(summary);
    Ok((out, ok))
}

fn fuzz(
    seed: u64,
    samples: u64,
    quick: bool,
    groups: &[String],
    counterexample: Option<&Path>,
    mutation: Option<causa::causation::Mutation>,
) -> Result<Report> {
    let mut config = VerifyConfig::standard(seed);
    if quick {
        config.families[0] = ModelFamily { non_roots: 1..=2, ..ModelFamily::exhaustive_default() };
    }
    if let Mode::Sampled { count, .. } = &mut config.families[1].mode {
        *count = if quick { samples.min(500) } else { samples };
    }
    if !groups.is_empty() {
        let parsed = groups
            .iter()
            .map(|g| match g.as_str() {
                "equivalence" => Ok(Group::Equivalence),
                "implication" => Ok(Group::Implication),
                "structural" => Ok(Group::Structural),
                "sufficiency" => Ok(Group::Sufficiency),
                "evidence" => Ok(Group::Evidence),
                _ => Err(usage(format!("unknown group `{g}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        config = config.with_groups(&parsed);
    }
    config.options.mutation = mutation;
    let report = verify::run(&config)?;
    let stored_ok = report.stored.iter().all(|s| s.confirmed);
    let ok = report.ok() && stored_ok;
    let mut out = Document::new(None);
    out.seed = Some(seed);
    if let Some(first) = report.violations().min_by_key(|v| (v.family, v.model_index)) {
        let small = minimize_counterexample(first, config.options);
        if let Some(path) = counterexample {
            std::fs::write(path, small.to_source()).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        }
        out.counterexample = Some(small);
    }
    out.verification = Some(report);
    Ok((out, ok))
}

fn parse(file: &Path) -> Result<Report> {
    let (src, doc) = load(file)?;
    let mut out = Document::new(Some(hash(&[&src])));
    out.notes.push(dsl::serialize(&doc).trim_end().to_string());
    Ok((out, true))
}

fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Check { file, inline, def, context, query, part_of, verbose, assert } => {
            check(file, inline, def.as_deref(), context.as_deref(), query.as_deref(), *part_of, *verbose, *assert)
        }
        Command::Causes { file, effect, def, context, max_size, parts } => causes(file, effect, def, context.as_deref(), *max_size, *parts),
        Command::Suffices { file, kind, cause, effect, context, assert } => suffices(file, kind, cause, effect, context.as_deref(), *assert),
        Command::Corpus { filter, all } => corpus_cmd(filter.as_deref(), *all),
        Command::Fuzz { seed, samples, quick, groups, counterexample, mutate } => fuzz(*seed, *samples, *quick, groups, counterexample.as_deref(), *mutate),
        Command::Parse { file } => parse(file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Err(UsageError(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Ok((doc, ok)) => {
            let rendered = match cli.out.format {
                Format::Text => doc.text(),
                Format::Structured => doc.json(),
            };
            match &cli.out.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, rendered) {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{rendered}"),
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
