//! Shared fixtures for the benchmarks.

use causa::causation::{Analyzer, Effect};
use causa::corpus::fixture;
use causa::dsl::{self, ModelDocument};
use causa::PartialSetting;

pub fn load(file: &str) -> ModelDocument {
    dsl::parse(fixture(file).expect("shipped fixture")).expect("fixture parses")
}

/// A fixture with its first context, plus a query parsed against it.
pub struct Case {
    pub doc: ModelDocument,
    pub cause: PartialSetting,
    pub effect: Effect,
}

impl Case {
    pub fn new(file: &str, cause: &str, effect: &str) -> Self {
        let doc = load(file);
        let cause = dsl::parse_setting(&doc.model, cause).expect("valid cause");
        let effect = dsl::parse_effect(&doc.model, effect).expect("valid effect");
        Case { doc, cause, effect }
    }

    pub fn analyzer(&self) -> Analyzer {
        Analyzer::new(&self.doc.model, &self.doc.contexts[0].context).expect("valid context")
    }
}

/// The queries timed per definition.
pub fn cases() -> Vec<(&'static str, Case)> {
    vec![
        ("lp", Case::new("lp.scm", "ST=1", "BS=1")),
        ("voting", Case::new("voting.scm", "A1=1", "O=1")),
        ("storm", Case::new("storm.scm", "AS=1", "F=1 | F=2")),
        ("prisoner", Case::new("prisoner.scm", "X=1", "Y=1")),
    ]
}
