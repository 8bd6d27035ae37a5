//! The structured output document and its text rendering.

use std::fmt::Write as _;

use causa::causation::{DefinitionId, Verdict};
use causa::corpus::CorpusReport;
use causa::verify::{Separation, VerifyReport, Violation};
use causa::{CausalModel, PartialSetting};
use serde::Serialize;
use serde_json::{Map, Value as Json};
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = concat!("causa ", env!("CARGO_PKG_VERSION"));

/// A setting as `{name: label}`.
fn setting_json(model: &CausalModel, s: &PartialSetting) -> Json {
    let mut map = Map::new();
    for (v, val) in s.iter() {
        map.insert(model.name(v).to_string(), Json::String(model.label(v, val).to_string()));
    }
    Json::Object(map)
}

/// `{A=1, B=0}`, or `∅`.
fn braced(model: &CausalModel, s: &PartialSetting) -> String {
    if s.is_empty() {
        "∅".into()
    } else {
        format!("{{{}}}", s.display(model))
    }
}

pub fn hash(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
pub struct QueryReport {
    pub definition: String,
    pub cause: Json,
    pub effect: String,
    pub is_cause: bool,
    pub witness: Option<Json>,
    pub network: Option<Json>,
    pub contrast: Option<Json>,
    pub citations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub part_of: Option<Json>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternative_reading: Option<bool>,
    #[serde(skip)]
    text: String,
}

impl QueryReport {
    pub fn from_verdict(model: &CausalModel, v: &Verdict, name: Option<&str>) -> Self {
        let ev = v.evidence.as_ref().filter(|_| v.is_cause);
        let mut citations = vec![format!("{}: {}", v.definition.name(), v.definition.description())];
        if let Some(n) = name {
            citations.push(format!("query `{n}`"));
        }
        let effect = v.effect.display(model).to_string();
        let cause = v.cause.display(model).to_string();
        let mut text = match &v.containing_cause {
            Some(c) if v.is_cause => format!("{}: {cause} is part of the cause {} of {effect}", v.definition, braced(model, c)),
            _ => format!("{}: {cause} {} {effect}", v.definition, if v.is_cause { "causes" } else { "does not cause" }),
        };
        if !v.ac1 {
            text.push_str(" (AC1 fails: not the actual values)");
        } else if let (false, Some(m)) = (v.is_cause, &v.minimality_counterexample) {
            let _ = write!(text, " (not minimal: {} already satisfies AC2)", braced(model, m));
        }
        if let Some(e) = ev {
            let _ = write!(text, "\n  W = {}", braced(model, &e.witness));
            if let Some(n) = &e.network {
                let _ = write!(text, "\n  N = {}", braced(model, &n.values));
            }
            if let Some(c) = &e.contrast {
                let _ = write!(text, "\n  x' = {}", braced(model, c));
            }
        }
        if let Some(alt) = v.alternative_reading {
            let _ = write!(text, "\n  alternative reading: {alt}");
        }
        QueryReport {
            definition: v.definition.name().to_string(),
            cause: setting_json(model, &v.cause),
            effect,
            is_cause: v.is_cause,
            witness: ev.map(|e| setting_json(model, &e.witness)),
            network: ev.and_then(|e| e.network.as_ref()).map(|n| setting_json(model, &n.values)),
            contrast: ev.and_then(|e| e.contrast.as_ref()).map(|c| setting_json(model, c)),
            citations,
            part_of: v.containing_cause.as_ref().filter(|_| v.is_cause).map(|c| setting_json(model, c)),
            alternative_reading: v.alternative_reading,
            text,
        }
    }
}

#[derive(Serialize)]
pub struct SufficiencyReport {
    pub kind: String,
    pub cause: Json,
    pub effect: Json,
    pub holds: bool,
    pub network: Option<Json>,
}

/// The single top-level output document.
#[derive(Serialize, Default)]
pub struct Document {
    pub tool_version: &'static str,
    pub model_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub queries: Vec<QueryReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub causes: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sufficiency: Vec<SufficiencyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<CorpusReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerifyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Violation>,
    #[serde(skip)]
    pub notes: Vec<String>,
}

impl Document {
    pub fn new(model_hash: Option<String>) -> Self {
        Document { tool_version: TOOL_VERSION, model_hash, ..Document::default() }
    }

    pub fn sufficiency(&mut self, model: &CausalModel, kind: String, x: &PartialSetting, y: &PartialSetting, holds: bool, network: Option<&PartialSetting>) {
        self.sufficiency.push(SufficiencyReport {
            kind,
            cause: setting_json(model, x),
            effect: setting_json(model, y),
            holds,
            network: network.map(|n| setting_json(model, n)),
        });
        let mut line = format!("{} sufficiency: {} -> {}: {holds}", self.sufficiency.last().unwrap().kind, braced(model, x), braced(model, y));
        if let Some(n) = network {
            let _ = write!(line, "\n  N = {}", braced(model, n));
        }
        self.notes.push(line);
    }

    pub fn json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed: {seed}");
        }
        for q in &self.queries {
            let _ = writeln!(out, "{}", q.text);
        }
        if let Some(c) = &self.causes {
            let _ = writeln!(out, "[{}]", c.join("; "));
        }
        if let Some(c) = &self.corpus {
            for check in &c.checks {
                let _ = writeln!(out, "{check}");
            }
        }
        if let Some(r) = &self.verification {
            let _ = write!(out, "{r}");
            let _ = writeln!(out, "{}", coverage_line(r));
        }
        if let Some(v) = &self.counterexample {
            let _ = writeln!(out, "minimized counterexample ({} variables):\n{}", v.model.len(), v.to_source());
        }
        for n in &self.notes {
            let _ = writeln!(out, "{n}");
        }
        out
    }
}

/// Share of definition pairs (`A` holds, `B` fails) with a separating example
/// or an implication that rules one out.
pub fn coverage_line(r: &VerifyReport) -> String {
    let total = r.coverage.len();
    if total == 0 {
        return "counterexample coverage: not computed".into();
    }
    let implied = r.coverage.iter().filter(|p| p.separation == Separation::Implied).count();
    let missing = r.missing_pairs().count();
    let covered = total - missing;
    format!("counterexample coverage: {:.0}% ({} separated, {implied} implied, {missing} missing)", 100.0 * covered as f64 / total as f64, covered - implied)
}

pub fn parse_mutation(s: &str) -> Result<causa::causation::Mutation, String> {
    use causa::causation::Mutation;
    let (kind, def) = s.split_once(':').ok_or("expected KIND:DEF, e.g. skip-minimality:Def8")?;
    let def: DefinitionId = def.parse().map_err(|_| format!("unknown definition `{def}`"))?;
    match kind {
        "skip-minimality" => Ok(Mutation::SkipMinimality(def)),
        "skip-necessity" => Ok(Mutation::SkipNecessity(def)),
        _ => Err(format!("unknown mutation `{kind}`")),
    }
}
