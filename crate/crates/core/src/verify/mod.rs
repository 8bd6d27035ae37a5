//! Brute-force checks of the known relationships between the definitions,
//! over bounded families of small models.
//!
//! A clean report says the claims hold on the families that were searched,
//! nothing more.

mod claims;
mod family;
mod minimize;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::causation::{Analyzer, CausationError, DefinitionId as D, Options};
use crate::dsl;

pub use claims::{Claim, Group, Limits, Query};
pub use family::{enumerate_models, Mode, ModelFamily, TableModel, TableVar};
pub use minimize::{minimize_counterexample, minimize_with};

use claims::{eval_causal_with, eval_sufficiency_with, is_causal, pair_hits, Env, PAIR_DEFS};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("the family has {size} models, more than the cap of {cap}")]
    FamilyTooLarge { size: u64, cap: u64 },
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("stored counterexample `{case}`: {detail}")]
    Stored { case: String, detail: String },
    #[error(transparent)]
    Causation(#[from] CausationError),
}

/// A claim that failed on one query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub claim: Claim,
    pub family: usize,
    pub model_index: u64,
    pub model: TableModel,
    pub context: Vec<u8>,
    pub query: Query,
    pub detail: String,
}

impl Violation {
    /// The model and context as a document in the model language, with the
    /// query attached.
    pub fn to_source(&self) -> String {
        let model = self.model.to_model();
        let mut doc = dsl::model_document(model);
        let ctx = self.model.context(&doc.model, &self.context);
        doc.contexts.push(dsl::NamedContext { name: "actual".into(), context: ctx });
        let mut out = format!("# {}: {}\n# {}\n", self.claim.id(), self.claim.text(), self.detail);
        out.push_str(&format!("# query: {}\n", self.query.display(&self.model)));
        out.push_str(&dsl::serialize(&doc));
        out
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on model #{} of family {}, context {:?}: {} ({})", self.claim, self.model_index, self.family, self.context, self.query.display(&self.model), self.detail)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyConfig {
    pub families: Vec<ModelFamily>,
    pub limits: Limits,
    #[serde(skip)]
    pub options: Options,
    /// Claims to check; empty means all.
    pub claims: Vec<Claim>,
    /// Counterexamples kept per claim.
    pub max_examples: usize,
}

impl VerifyConfig {
    /// The default exhaustive family plus 10 000 sampled models.
    pub fn standard(seed: u64) -> Self {
        VerifyConfig {
            families: vec![ModelFamily::exhaustive_default(), ModelFamily::sampled_default(seed)],
            limits: Limits::default(),
            options: Options::default(),
            claims: Vec::new(),
            max_examples: 3,
        }
    }

    pub fn with_groups(mut self, groups: &[Group]) -> Self {
        self.claims = Claim::ALL.iter().copied().filter(|c| groups.contains(&c.group())).collect();
        self
    }

    fn selected(&self) -> Vec<Claim> {
        if self.claims.is_empty() {
            Claim::ALL.to_vec()
        } else {
            self.claims.clone()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimReport {
    pub id: &'static str,
    pub claim: &'static str,
    pub group: Group,
    pub instances: u64,
    pub violations: u64,
    pub examples: Vec<Violation>,
}

/// How a pair `(A, B)` of definitions is known to differ, i.e. that some
/// cause under `A` is not one under `B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Separation {
    /// `A` implies `B`, so no separating example exists.
    Implied,
    /// Found in the searched families, this many times.
    Family(u64),
    /// Only in a stored example.
    Stored(String),
    Missing,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCoverage {
    pub holds: D,
    pub fails: D,
    pub separation: Separation,
}

#[derive(Clone, Debug, Serialize)]
pub struct StoredReport {
    pub case: &'static str,
    pub query: String,
    pub holds: Vec<D>,
    pub fails: Vec<D>,
    pub confirmed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub scope: &'static str,
    pub families: Vec<String>,
    pub models: u64,
    pub contexts: u64,
    pub queries: u64,
    pub claims: Vec<ClaimReport>,
    pub stored: Vec<StoredReport>,
    pub coverage: Vec<PairCoverage>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.claims.iter().all(|c| c.violations == 0) && self.stored.iter().all(|s| s.confirmed)
    }

    pub fn claim(&self, c: Claim) -> Option<&ClaimReport> {
        self.claims.iter().find(|r| r.id == c.id())
    }

    pub fn violations(&self) -> impl Iterator<Item = &Violation> {
        self.claims.iter().flat_map(|c| c.examples.iter())
    }

    pub fn missing_pairs(&self) -> impl Iterator<Item = &PairCoverage> {
        self.coverage.iter().filter(|p| p.separation == Separation::Missing)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scope: {}", self.scope)?;
        for fam in &self.families {
            writeln!(f, "  family: {fam}")?;
        }
        writeln!(f, "{} models, {} model/context pairs, {} queries", self.models, self.contexts, self.queries)?;
        for c in &self.claims {
            let mark = if c.violations == 0 { "ok  " } else { "FAIL" };
            writeln!(f, "[{mark}] {:<28} {:>9} instances {:>6} violations  {}", c.id, c.instances, c.violations, c.claim)?;
            for ex in &c.examples {
                writeln!(f, "         {ex}")?;
            }
        }
        for s in &self.stored {
            let mark = if s.confirmed { "ok  " } else { "FAIL" };
            writeln!(f, "[{mark}] stored {:<10} {}  {}", s.case, s.query, s.detail)?;
        }
        let missing: Vec<String> = self.missing_pairs().map(|p| format!("{}/{}", p.holds, p.fails)).collect();
        let found = self.coverage.iter().filter(|p| !matches!(p.separation, Separation::Implied | Separation::Missing)).count();
        writeln!(f, "pairs separated: {found}, implied: {}, missing: {}", self.coverage.iter().filter(|p| p.separation == Separation::Implied).count(), missing.len())?;
        if !missing.is_empty() {
            writeln!(f, "  missing: {}", missing.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
struct Tally {
    models: u64,
    contexts: u64,
    queries: u64,
    counts: BTreeMap<Claim, (u64, u64)>,
    examples: BTreeMap<Claim, Vec<Violation>>,
    pairs: [[u64; 8]; 8],
}

impl Tally {
    fn record(&mut self, claim: Claim, outcome: Result<(), String>, keep: usize, make: impl FnOnce(String) -> Violation) {
        let e = self.counts.entry(claim).or_default();
        e.0 += 1;
        if let Err(detail) = outcome {
            e.1 += 1;
            let list = self.examples.entry(claim).or_default();
            if list.len() < keep {
                list.push(make(detail));
            }
        }
    }

    fn merge(mut self, other: Tally, keep: usize) -> Tally {
        self.models += other.models;
        self.contexts += other.contexts;
        self.queries += other.queries;
        for (c, (i, v)) in other.counts {
            let e = self.counts.entry(c).or_default();
            e.0 += i;
            e.1 += v;
        }
        for (c, list) in other.examples {
            let mine = self.examples.entry(c).or_default();
            mine.extend(list);
            mine.sort_by_key(|v| (v.family, v.model_index));
            mine.truncate(keep);
        }
        for a in 0..8 {
            for b in 0..8 {
                self.pairs[a][b] += other.pairs[a][b];
            }
        }
        self
    }
}

fn check_model(tally: &mut Tally, config: &VerifyConfig, claims: &[Claim], family: usize, index: u64, tm: &TableModel) {
    let keep = config.max_examples;
    let causal: Vec<Claim> = claims.iter().copied().filter(|c| is_causal(*c)).collect();
    let suff: Vec<Claim> = claims.iter().copied().filter(|c| !is_causal(*c)).collect();
    tally.models += 1;
    for (ci, ctx) in tm.contexts().iter().enumerate() {
        tally.contexts += 1;
        let env = Env::new(tm, ctx, config.options, config.limits, ci == 0);
        let violation = |claim: Claim, query: &claims::Query, detail: String| Violation {
            claim,
            family,
            model_index: index,
            model: tm.clone(),
            context: ctx.clone(),
            query: query.clone(),
            detail,
        };
        if !causal.is_empty() {
            for q in env.causal_queries() {
                tally.queries += 1;
                for (claim, out) in eval_causal_with(&env, &q, &causal) {
                    if let Some(out) = out {
                        tally.record(claim, out, keep, |d| violation(claim, &q, d));
                    }
                }
                pair_hits(&env, &q, &mut tally.pairs);
            }
        }
        if !suff.is_empty() {
            for q in env.sufficiency_queries() {
                tally.queries += 1;
                for (claim, out) in eval_sufficiency_with(&env, &q, &suff) {
                    if let Some(out) = out {
                        tally.record(claim, out, keep, |d| violation(claim, &q, d));
                    }
                }
            }
        }
    }
}

/// Run every selected claim over every family.
pub fn run(config: &VerifyConfig) -> Result<VerifyReport, VerifyError> {
    let claims = config.selected();
    let keep = config.max_examples;
    let mut total = Tally::default();
    for (fi, family) in config.families.iter().enumerate() {
        let n = family.len()?;
        let t = (0..n)
            .into_par_iter()
            .fold(Tally::default, |mut t, i| {
                check_model(&mut t, config, &claims, fi, i, &family.model(i));
                t
            })
            .reduce(Tally::default, |a, b| a.merge(b, keep));
        total = total.merge(t, keep);
    }
    let stored = if claims.iter().any(|c| is_causal(*c)) { check_stored()? } else { Vec::new() };
    let coverage = if claims.iter().any(|c| is_causal(*c)) { coverage(&total.pairs, &stored) } else { Vec::new() };
    let reports = claims
        .iter()
        .map(|&c| {
            let (instances, violations) = total.counts.get(&c).copied().unwrap_or_default();
            ClaimReport {
                id: c.id(),
                claim: c.text(),
                group: c.group(),
                instances,
                violations,
                examples: total.examples.remove(&c).unwrap_or_default(),
            }
        })
        .collect();
    Ok(VerifyReport {
        scope: "bounded families only: no violation below means none in the models searched",
        families: config.families.iter().map(|f| f.describe()).collect(),
        models: total.models,
        contexts: total.contexts,
        queries: total.queries,
        claims: reports,
        stored,
        coverage,
    })
}

/// The equivalences between definitions.
pub fn check_equivalences(config: &VerifyConfig) -> Result<VerifyReport, VerifyError> {
    run(&config.clone().with_groups(&[Group::Equivalence]))
}

/// The implications between definitions.
pub fn check_implications(config: &VerifyConfig) -> Result<VerifyReport, VerifyError> {
    run(&config.clone().with_groups(&[Group::Implication]))
}

/// Structural properties, sufficiency lemmas and evidence checks.
pub fn check_structural_props(config: &VerifyConfig) -> Result<VerifyReport, VerifyError> {
    run(&config.clone().with_groups(&[Group::Structural, Group::Sufficiency, Group::Evidence]))
}

/// Pairs known to be implications for singleton causes (the pair matrix
/// only counts those); no separating example can exist.
const IMPLIED: [(D, D); 11] = [
    (D::ModifiedHP, D::UpdatedHP),
    (D::ModifiedHP, D::OriginalHP),
    (D::UpdatedHP, D::OriginalHP),
    (D::Def3, D::Def2),
    (D::Def3, D::Def8),
    (D::Def2, D::Def8),
    (D::Def3, D::OriginalHP),
    (D::Def10, D::Def4),
    (D::ModifiedHP, D::Def2),
    (D::ModifiedHP, D::Def4),
    (D::ModifiedHP, D::Def8),
];

struct StoredCase {
    case: &'static str,
    cause: &'static str,
    effect: &'static str,
    holds: &'static [D],
    fails: &'static [D],
}

/// Hand-built examples separating definitions that small families cannot.
const STORED: &[StoredCase] = &[
    StoredCase { case: "ex1", cause: "X=1", effect: "Y=1", holds: &[D::Def2, D::Def3, D::Def8, D::OriginalHP, D::UpdatedHP], fails: &[D::Def4, D::Def10] },
    StoredCase { case: "ex2", cause: "X=1", effect: "Y=1", holds: &[D::Def4], fails: &[D::Def10] },
    StoredCase { case: "ex3", cause: "X=1", effect: "Y=1", holds: &[D::Def4, D::Def10, D::OriginalHP, D::UpdatedHP], fails: &[D::Def2, D::Def3, D::Def8] },
    StoredCase {
        case: "ex4",
        cause: "X=1",
        effect: "Y=1",
        holds: &[D::Def2, D::Def4, D::Def8, D::Def10, D::OriginalHP, D::UpdatedHP, D::ModifiedHP],
        fails: &[D::Def3],
    },
    StoredCase { case: "ex5", cause: "X=1", effect: "Y=1", holds: &[D::Def4, D::Def10], fails: &[D::OriginalHP] },
    StoredCase { case: "ex6", cause: "X=1", effect: "Y=1", holds: &[D::Def3], fails: &[D::UpdatedHP] },
    StoredCase { case: "switch", cause: "F=1", effect: "A=1", holds: &[D::Def8], fails: &[D::Def2, D::Def4, D::UpdatedHP] },
    StoredCase {
        case: "counter",
        cause: "X=1",
        effect: "Y=1",
        holds: &[D::Def2, D::Def8],
        fails: &[D::Def3, D::Def4, D::Def10, D::OriginalHP, D::UpdatedHP, D::ModifiedHP],
    },
];

fn check_stored() -> Result<Vec<StoredReport>, VerifyError> {
    let mut out = Vec::new();
    for s in STORED {
        let err = |detail: String| VerifyError::Stored { case: s.case.into(), detail };
        let src = crate::corpus::fixture(&format!("{}.scm", s.case)).ok_or_else(|| err("missing fixture".into()))?;
        let doc = dsl::parse(src).map_err(|e| err(e.to_string()))?;
        let ctx = doc.resolve_context(None).ok_or_else(|| err("no context".into()))?;
        let x = dsl::parse_setting(&doc.model, s.cause).map_err(|e| err(e.to_string()))?;
        let y = dsl::parse_effect(&doc.model, s.effect).map_err(|e| err(e.to_string()))?;
        let an = Analyzer::new(&doc.model, &ctx.context)?;
        let mut wrong = Vec::new();
        for &d in s.holds {
            if !an.holds(d, &x, &y)? {
                wrong.push(format!("{d} should hold"));
            }
        }
        for &d in s.fails {
            if an.holds(d, &x, &y)? {
                wrong.push(format!("{d} should fail"));
            }
        }
        out.push(StoredReport {
            case: s.case,
            query: format!("{} -> {}", s.cause, s.effect),
            holds: s.holds.to_vec(),
            fails: s.fails.to_vec(),
            confirmed: wrong.is_empty(),
            detail: wrong.join(", "),
        });
    }
    Ok(out)
}

fn coverage(pairs: &[[u64; 8]; 8], stored: &[StoredReport]) -> Vec<PairCoverage> {
    let mut out = Vec::new();
    for (a, &da) in PAIR_DEFS.iter().enumerate() {
        for (b, &db) in PAIR_DEFS.iter().enumerate() {
            if a == b {
                continue;
            }
            let separation = if IMPLIED.contains(&(da, db)) {
                Separation::Implied
            } else if pairs[a][b] > 0 {
                Separation::Family(pairs[a][b])
            } else if let Some(s) = stored.iter().find(|s| s.confirmed && s.holds.contains(&da) && s.fails.contains(&db)) {
                Separation::Stored(s.case.to_string())
            } else {
                Separation::Missing
            };
            out.push(PairCoverage { holds: da, fails: db, separation });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyConfig {
        let mut family = ModelFamily::exhaustive_default();
        family.roots = 1..=1;
        family.non_roots = 1..=2;
        VerifyConfig { families: vec![family], ..VerifyConfig::standard(0) }
    }

    #[test]
    fn stored_examples_are_confirmed() {
        for s in check_stored().unwrap() {
            assert!(s.confirmed, "{}: {}", s.case, s.detail);
        }
    }

    #[test]
    fn small_family_is_clean() {
        let report = run(&small()).unwrap();
        assert!(report.ok(), "{report}");
        assert!(report.models > 0 && report.queries > 0);
    }

    #[test]
    fn mutation_is_caught() {
        let mut config = small();
        config.options.mutation = Some(crate::causation::Mutation::SkipMinimality(D::Def8));
        let report = check_structural_props(&config).unwrap();
        let ex = report.claim(Claim::MinimalSingleton).unwrap();
        assert!(ex.violations > 0);
    }
}
