//! The classic examples as `.scm` fixtures, with their expected verdicts.
//!
//! `corpus/manifest.toml` lists every case: the fixture it loads, the
//! example it encodes and the verdicts expected of it. Verdicts the manifest
//! leaves out are still computed and reported as [`Outcome::Unasserted`].

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::causation::{Analyzer, CausationError, DefinitionId, Effect, Verdict};
use crate::dsl::{self, ModelDocument, ParseError};
use crate::scm::{normalize_exogenous, PartialSetting, VarId};
use crate::sufficiency::{self, SufficiencyError, SufficiencyKind};

/// The fixture files, by name.
pub const FIXTURES: &[(&str, &str)] = &[
    ("counter.scm", include_str!("../../corpus/counter.scm")),
    ("ex1.scm", include_str!("../../corpus/ex1.scm")),
    ("ex2.scm", include_str!("../../corpus/ex2.scm")),
    ("ex3.scm", include_str!("../../corpus/ex3.scm")),
    ("ex4.scm", include_str!("../../corpus/ex4.scm")),
    ("ex5.scm", include_str!("../../corpus/ex5.scm")),
    ("ex6.scm", include_str!("../../corpus/ex6.scm")),
    ("lp.scm", include_str!("../../corpus/lp.scm")),
    ("normalization.scm", include_str!("../../corpus/normalization.scm")),
    ("overdetermination.scm", include_str!("../../corpus/overdetermination.scm")),
    ("prisoner.scm", include_str!("../../corpus/prisoner.scm")),
    ("prisoner_a_is_d.scm", include_str!("../../corpus/prisoner_a_is_d.scm")),
    ("prisoner_a_not_d.scm", include_str!("../../corpus/prisoner_a_not_d.scm")),
    ("prisoner_d1.scm", include_str!("../../corpus/prisoner_d1.scm")),
    ("prisoner_d_is_a.scm", include_str!("../../corpus/prisoner_d_is_a.scm")),
    ("prisoner_d_not_a.scm", include_str!("../../corpus/prisoner_d_not_a.scm")),
    ("storm.scm", include_str!("../../corpus/storm.scm")),
    ("switch.scm", include_str!("../../corpus/switch.scm")),
    ("transitivity.scm", include_str!("../../corpus/transitivity.scm")),
    ("trumping.scm", include_str!("../../corpus/trumping.scm")),
    ("voting.scm", include_str!("../../corpus/voting.scm")),
];

pub const MANIFEST: &str = include_str!("../../corpus/manifest.toml");

/// Source text of a shipped fixture.
pub fn fixture(file: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(f, _)| *f == file).map(|(_, src)| *src)
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("manifest: {0}")]
    Manifest(#[from] toml::de::Error),
    #[error("case `{case}`: no fixture named `{file}`")]
    MissingFixture { case: String, file: String },
    #[error("{file}: {error}")]
    Parse { file: String, error: ParseError },
    #[error("case `{case}`: {message}")]
    Invalid { case: String, message: String },
    #[error("case `{case}`: {error}")]
    Causation { case: String, error: CausationError },
    #[error("case `{case}`: {error}")]
    Sufficiency { case: String, error: SufficiencyError },
}

type Result<T> = std::result::Result<T, CorpusError>;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    case: Vec<CaseSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSpec {
    pub name: String,
    pub file: String,
    pub example: String,
    #[serde(default)]
    pub context: Option<String>,
    #[serde(default)]
    pub cause: Vec<CauseSpec>,
    #[serde(default)]
    pub evidence: Vec<EvidenceSpec>,
    #[serde(default)]
    pub causes: Vec<CausesSpec>,
    #[serde(default)]
    pub suffices: Vec<SufficesSpec>,
    #[serde(default)]
    pub chain: Vec<ChainSpec>,
    #[serde(default)]
    pub dependence: Vec<DependenceSpec>,
    #[serde(default)]
    pub normalized: Vec<NormalizedSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauseSpec {
    pub cause: String,
    pub effect: String,
    pub expect: BTreeMap<String, bool>,
    #[serde(default)]
    pub part_of: Vec<String>,
    pub cite: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceSpec {
    pub def: String,
    pub cause: String,
    pub effect: String,
    #[serde(default)]
    pub witness: Option<String>,
    #[serde(default)]
    pub contrast: Option<String>,
    #[serde(default)]
    pub network_includes: Vec<String>,
    pub cite: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CausesSpec {
    pub def: String,
    pub effect: String,
    pub max_size: usize,
    pub expect: Vec<String>,
    pub cite: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SufficesSpec {
    pub kind: String,
    pub cause: String,
    pub effect: String,
    pub expect: bool,
    #[serde(default)]
    pub network: Option<Vec<String>>,
    pub cite: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub cause: String,
    pub effect: String,
    pub links: Vec<String>,
    pub expect: bool,
    pub cite: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DependenceSpec {
    pub cause: String,
    pub effect: String,
    pub expect: bool,
    pub cite: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizedSpec {
    pub expect: Vec<String>,
    pub cite: String,
}

/// A parsed fixture with its expectations.
#[derive(Clone, Debug)]
pub struct GoldenCase {
    pub spec: CaseSpec,
    pub document: ModelDocument,
}

impl GoldenCase {
    pub fn name(&self) -> &str {
        &self.spec.name
    }

    fn analyzer(&self) -> Result<Analyzer> {
        let ctx = self.document.resolve_context(self.spec.context.as_deref()).ok_or_else(|| self.invalid("no such context"))?;
        Analyzer::new(&self.document.model, &ctx.context).map_err(|error| CorpusError::Causation { case: self.spec.name.clone(), error })
    }

    fn invalid(&self, message: impl Into<String>) -> CorpusError {
        CorpusError::Invalid { case: self.spec.name.clone(), message: message.into() }
    }

    fn setting(&self, src: &str) -> Result<PartialSetting> {
        dsl::parse_setting(&self.document.model, src).map_err(|e| self.invalid(format!("`{src}`: {e}")))
    }

    fn effect(&self, src: &str) -> Result<Effect> {
        dsl::parse_effect(&self.document.model, src).map_err(|e| self.invalid(format!("`{src}`: {e}")))
    }

    fn definition(&self, src: &str) -> Result<DefinitionId> {
        src.parse().map_err(|_| self.invalid(format!("unknown definition `{src}`")))
    }

    fn vars(&self, names: &[String]) -> Result<Vec<VarId>> {
        let mut out = names
            .iter()
            .map(|n| self.document.model.lookup(n).map_err(|e| self.invalid(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        out.sort();
        Ok(out)
    }
}

/// Parse the manifest and every fixture it names.
pub fn load() -> Result<Vec<GoldenCase>> {
    let manifest: Manifest = toml::from_str(MANIFEST)?;
    manifest
        .case
        .into_iter()
        .map(|spec| {
            let src = fixture(&spec.file).ok_or_else(|| CorpusError::MissingFixture { case: spec.name.clone(), file: spec.file.clone() })?;
            let document = dsl::parse(src).map_err(|error| CorpusError::Parse { file: spec.file.clone(), error })?;
            Ok(GoldenCase { spec, document })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    /// Computed, but the example does not state the verdict.
    Unasserted,
}

/// One evaluated expectation.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub case: String,
    /// What was evaluated, e.g. `Def2: AS=1 causes F=2`.
    pub query: String,
    pub expected: Option<String>,
    pub actual: String,
    pub outcome: Outcome,
    /// Witness, network and contrast behind a verdict, when there is one.
    pub detail: Option<String>,
    pub cite: Option<String>,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.outcome {
            Outcome::Pass => "pass",
            Outcome::Fail => "FAIL",
            Outcome::Unasserted => "info",
        };
        write!(f, "[{tag}] {}: {} => {}", self.case, self.query, self.actual)?;
        if let (Outcome::Fail, Some(e)) = (self.outcome, &self.expected) {
            write!(f, " (expected {e})")?;
        }
        if let Some(d) = &self.detail {
            write!(f, " [{d}]")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CorpusReport {
    pub checks: Vec<Check>,
}

impl CorpusReport {
    pub fn count(&self, outcome: Outcome) -> usize {
        self.checks.iter().filter(|c| c.outcome == outcome).count()
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.outcome == Outcome::Fail)
    }

    pub fn all_pass(&self) -> bool {
        self.count(Outcome::Fail) == 0
    }

    /// Checks of one case, in evaluation order.
    pub fn case<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Check> + 'a {
        self.checks.iter().filter(move |c| c.case == name)
    }
}

/// Run every case whose name contains `filter` (all cases when `None`).
pub fn run_corpus(filter: Option<&str>) -> Result<CorpusReport> {
    let mut report = CorpusReport::default();
    for case in load()? {
        if filter.is_some_and(|f| !case.name().contains(f)) {
            continue;
        }
        report.checks.extend(run_case(&case)?);
    }
    Ok(report)
}

fn describe(model: &crate::CausalModel, v: &Verdict) -> Option<String> {
    let e = v.evidence.as_ref()?;
    let mut parts = vec![format!("W={{{}}}", e.witness.display(model))];
    if let Some(n) = &e.network {
        parts.push(format!("N={{{}}}", n.values.display(model)));
    }
    if let Some(c) = &e.contrast {
        parts.push(format!("x'={{{}}}", c.display(model)));
    }
    if let Some(c) = &v.containing_cause {
        parts.push(format!("in {{{}}}", c.display(model)));
    }
    Some(parts.join(" "))
}

fn judge(expected: Option<String>, actual: &str) -> Outcome {
    match expected {
        None => Outcome::Unasserted,
        Some(e) if e == actual => Outcome::Pass,
        Some(_) => Outcome::Fail,
    }
}

/// Evaluate one case's expectations.
pub fn run_case(case: &GoldenCase) -> Result<Vec<Check>> {
    let name = case.name().to_string();
    let model = &case.document.model;
    let an = case.analyzer()?;
    let cerr = |error| CorpusError::Causation { case: name.clone(), error };
    let serr = |error| CorpusError::Sufficiency { case: name.clone(), error };
    let mut out = Vec::new();
    let mut push = |query: String, expected: Option<String>, actual: String, detail: Option<String>, cite: &str| {
        let outcome = judge(expected.clone(), &actual);
        let cite = (outcome != Outcome::Unasserted).then(|| cite.to_string());
        out.push(Check { case: name.clone(), query, expected, actual, outcome, detail, cite });
    };

    for row in &case.spec.cause {
        let x = case.setting(&row.cause)?;
        let effect = case.effect(&row.effect)?;
        for key in row.expect.keys().chain(&row.part_of) {
            case.definition(key)?;
        }
        if !an.ac1(&x, &effect).map_err(cerr)? {
            return Err(case.invalid(format!("AC1 fails for `{}` and `{}`", row.cause, row.effect)));
        }
        for def in DefinitionId::ALL {
            let part_of = row.part_of.iter().any(|d| d == def.name());
            let verdict = if part_of {
                let [(v, val)] = x.iter().collect::<Vec<_>>()[..] else {
                    return Err(case.invalid("part-of readings take a single conjunct"));
                };
                an.is_part_of_cause(def, (v, val), &effect, None).map_err(cerr)?
            } else {
                an.is_cause(def, &x, &effect).map_err(cerr)?
            };
            let relation = if part_of { "is part of a cause of" } else { "causes" };
            push(
                format!("{def}: {} {relation} {}", row.cause, row.effect),
                row.expect.get(def.name()).map(|b| b.to_string()),
                verdict.is_cause.to_string(),
                describe(model, &verdict),
                &row.cite,
            );
        }
    }

    for row in &case.spec.evidence {
        let def = case.definition(&row.def)?;
        let x = case.setting(&row.cause)?;
        let effect = case.effect(&row.effect)?;
        let verdict = an.is_cause(def, &x, &effect).map_err(cerr)?;
        let query = format!("{def} evidence: {} causes {}", row.cause, row.effect);
        let Some(ev) = verdict.evidence.as_ref().filter(|_| verdict.is_cause) else {
            push(query, Some("a cause with evidence".into()), "no evidence".into(), None, &row.cite);
            continue;
        };
        let mut problems = Vec::new();
        if let Some(w) = &row.witness {
            let w = if w.trim().is_empty() { PartialSetting::empty() } else { case.setting(w)? };
            if w != ev.witness {
                problems.push(format!("witness {{{}}}", ev.witness.display(model)));
            }
        }
        if let Some(c) = &row.contrast {
            if Some(&case.setting(c)?) != ev.contrast.as_ref() {
                problems.push("contrast".to_string());
            }
        }
        let network = ev.network.as_ref().map(|n| n.vars()).unwrap_or_default();
        if case.vars(&row.network_includes)?.iter().any(|v| !network.contains(v)) {
            problems.push("network".to_string());
        }
        let actual = if problems.is_empty() { "as expected".to_string() } else { format!("differs: {}", problems.join(", ")) };
        push(query, Some("as expected".into()), actual, describe(model, &verdict), &row.cite);
    }

    for row in &case.spec.causes {
        let def = case.definition(&row.def)?;
        let effect = case.effect(&row.effect)?;
        let found = an.find_all_causes(def, &effect, row.max_size).map_err(cerr)?;
        let mut actual: Vec<String> = found.iter().map(|v| v.cause.display(model).to_string()).collect();
        actual.sort();
        let mut expected = row.expect.iter().map(|s| case.setting(s).map(|x| x.display(model).to_string())).collect::<Result<Vec<_>>>()?;
        expected.sort();
        push(
            format!("{def}: causes of {} up to size {}", row.effect, row.max_size),
            Some(format!("[{}]", expected.join(", "))),
            format!("[{}]", actual.join(", ")),
            None,
            &row.cite,
        );
    }

    for row in &case.spec.suffices {
        let kind: SufficiencyKind = row.kind.parse().map_err(|e: String| case.invalid(e))?;
        let x = case.setting(&row.cause)?;
        let effect = case.effect(&row.effect)?;
        let ctx = an.context();
        let ctx = kind.is_actual().then_some(ctx);
        let query = format!("{kind} sufficient: {} for {}", row.cause, row.effect);
        match &row.network {
            Some(names) => {
                if effect.accepted().len() != 1 {
                    return Err(case.invalid("network expectations take an atomic effect"));
                }
                let y = PartialSetting::single(effect.var, effect.accepted()[0]);
                let found = sufficiency::strongly_sufficient(model, &x, &y, ctx).map_err(serr)?;
                let expected = case.vars(names)?;
                let actual = match &found {
                    Some(w) if w.vars() == expected => "true".to_string(),
                    Some(w) => format!("true along {{{}}}", w.values.display(model)),
                    None => "false".to_string(),
                };
                let detail = found.as_ref().map(|w| format!("N={{{}}}", w.values.display(model)));
                push(query, Some(row.expect.to_string()), actual, detail, &row.cite);
            }
            None => {
                let actual = sufficiency::sufficient_for_disjunction(model, &x, effect.var, effect.accepted(), kind, ctx).map_err(serr)?;
                push(query, Some(row.expect.to_string()), actual.to_string(), None, &row.cite);
            }
        }
    }

    for row in &case.spec.chain {
        let x = case.setting(&row.cause)?;
        let y = case.setting(&row.effect)?;
        let links = row.links.iter().map(|l| case.setting(l)).collect::<Result<Vec<_>>>()?;
        let actual = sufficiency::strongly_sufficient_along_chain(model, &x, &y, &links, None).map_err(serr)?;
        push(format!("chain {} -> [{}] -> {}", row.cause, row.links.join("; "), row.effect), Some(row.expect.to_string()), actual.to_string(), None, &row.cite);
    }

    for row in &case.spec.dependence {
        let x = case.setting(&row.cause)?;
        let effect = case.effect(&row.effect)?;
        let actual = an.dependence_holds(&x, &effect).map_err(cerr)?;
        push(format!("{} depends on {}", row.effect, row.cause), Some(row.expect.to_string()), actual.to_string(), None, &row.cite);
    }

    for row in &case.spec.normalized {
        let normal = normalize_exogenous(model);
        let actual: Vec<String> = normal.equations().iter().map(|eq| format!("{} := {}", normal.name(eq.target), eq.body)).collect();
        push("normalized equations".into(), Some(row.expect.join("; ")), actual.join("; "), None, &row.cite);
    }

    Ok(out)
}
