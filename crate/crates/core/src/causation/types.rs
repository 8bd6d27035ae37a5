use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::scm::{CausalModel, ModelError, Value, VarId};
use crate::sufficiency::SufficiencyKind;

/// The fifteen definitions. `Def1`–`Def12` enumerate
/// {contrastive, minimal} × {actual, non-actual} × {weak, strong, direct}
/// in the order: actual weak, actual strong, actual direct, weak, strong,
/// direct — contrastive first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum DefinitionId {
    Def1,
    Def2,
    Def3,
    Def4,
    Def5,
    Def6,
    Def7,
    Def8,
    Def9,
    Def10,
    Def11,
    Def12,
    OriginalHP,
    UpdatedHP,
    ModifiedHP,
    StrongHP,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Necessity {
    Contrastive,
    Minimal,
}

impl DefinitionId {
    pub const ALL: [DefinitionId; 16] = [
        DefinitionId::Def1,
        DefinitionId::Def2,
        DefinitionId::Def3,
        DefinitionId::Def4,
        DefinitionId::Def5,
        DefinitionId::Def6,
        DefinitionId::Def7,
        DefinitionId::Def8,
        DefinitionId::Def9,
        DefinitionId::Def10,
        DefinitionId::Def11,
        DefinitionId::Def12,
        DefinitionId::OriginalHP,
        DefinitionId::UpdatedHP,
        DefinitionId::ModifiedHP,
        DefinitionId::StrongHP,
    ];

    pub const GENERAL: [DefinitionId; 12] = [
        DefinitionId::Def1,
        DefinitionId::Def2,
        DefinitionId::Def3,
        DefinitionId::Def4,
        DefinitionId::Def5,
        DefinitionId::Def6,
        DefinitionId::Def7,
        DefinitionId::Def8,
        DefinitionId::Def9,
        DefinitionId::Def10,
        DefinitionId::Def11,
        DefinitionId::Def12,
    ];

    pub const HP: [DefinitionId; 4] = [DefinitionId::OriginalHP, DefinitionId::UpdatedHP, DefinitionId::ModifiedHP, DefinitionId::StrongHP];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Sufficiency kind and necessity condition of `Def1`–`Def12`.
    pub fn general_form(self) -> Option<(SufficiencyKind, Necessity)> {
        use SufficiencyKind::*;
        let n = self.index();
        if n >= 12 {
            return None;
        }
        let necessity = if n < 6 { Necessity::Contrastive } else { Necessity::Minimal };
        let kind = [ActualWeak, ActualStrong, ActualDirect, Weak, Strong, Direct][n % 6];
        Some((kind, necessity))
    }

    pub fn from_general_form(kind: SufficiencyKind, necessity: Necessity) -> DefinitionId {
        use SufficiencyKind::*;
        let k = match kind {
            ActualWeak => 0,
            ActualStrong => 1,
            ActualDirect => 2,
            Weak => 3,
            Strong => 4,
            Direct => 5,
        };
        let n = k + if necessity == Necessity::Minimal { 6 } else { 0 };
        DefinitionId::GENERAL[n]
    }

    pub fn is_hp(self) -> bool {
        self.index() >= 12
    }

    pub fn name(self) -> &'static str {
        match self {
            DefinitionId::Def1 => "Def1",
            DefinitionId::Def2 => "Def2",
            DefinitionId::Def3 => "Def3",
            DefinitionId::Def4 => "Def4",
            DefinitionId::Def5 => "Def5",
            DefinitionId::Def6 => "Def6",
            DefinitionId::Def7 => "Def7",
            DefinitionId::Def8 => "Def8",
            DefinitionId::Def9 => "Def9",
            DefinitionId::Def10 => "Def10",
            DefinitionId::Def11 => "Def11",
            DefinitionId::Def12 => "Def12",
            DefinitionId::OriginalHP => "OriginalHP",
            DefinitionId::UpdatedHP => "UpdatedHP",
            DefinitionId::ModifiedHP => "ModifiedHP",
            DefinitionId::StrongHP => "StrongHP",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            DefinitionId::Def1 => "contrastive actual weak sufficiency",
            DefinitionId::Def2 => "contrastive actual strong sufficiency",
            DefinitionId::Def3 => "contrastive actual direct sufficiency",
            DefinitionId::Def4 => "contrastive weak sufficiency",
            DefinitionId::Def5 => "contrastive strong sufficiency",
            DefinitionId::Def6 => "contrastive direct sufficiency",
            DefinitionId::Def7 => "minimal actual weak sufficiency",
            DefinitionId::Def8 => "minimal actual strong sufficiency",
            DefinitionId::Def9 => "minimal actual direct sufficiency",
            DefinitionId::Def10 => "minimal weak sufficiency",
            DefinitionId::Def11 => "minimal strong sufficiency",
            DefinitionId::Def12 => "minimal direct sufficiency",
            DefinitionId::OriginalHP => "original Halpern-Pearl",
            DefinitionId::UpdatedHP => "updated Halpern-Pearl",
            DefinitionId::ModifiedHP => "modified Halpern-Pearl",
            DefinitionId::StrongHP => "updated Halpern-Pearl with AC2(c)",
        }
    }
}

impl fmt::Display for DefinitionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownDefinition(pub String);

impl fmt::Display for UnknownDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown definition `{}` (expected Def1..Def12, OriginalHP, UpdatedHP, ModifiedHP or StrongHP)", self.0)
    }
}

impl std::error::Error for UnknownDefinition {}

impl FromStr for DefinitionId {
    type Err = UnknownDefinition;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| !matches!(c, ' ' | '_' | '-' | '(' | ')')).collect::<String>().to_ascii_lowercase();
        if let Some(d) = DefinitionId::ALL.iter().find(|d| d.name().to_ascii_lowercase() == key) {
            return Ok(*d);
        }
        Ok(match key.as_str() {
            "original" | "orig" | "hporiginal" => DefinitionId::OriginalHP,
            "updated" | "upd" | "hpupdated" => DefinitionId::UpdatedHP,
            "modified" | "mod" | "hpmodified" => DefinitionId::ModifiedHP,
            "strong" | "ac2c" | "stronghpac2c" | "hpstrong" => DefinitionId::StrongHP,
            _ => return Err(UnknownDefinition(s.to_string())),
        })
    }
}

/// `Y ∈ accepted`: an atom when `accepted` is a singleton, otherwise a
/// disjunction over values of the same variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Effect {
    pub var: VarId,
    accepted: Vec<Value>,
}

impl Effect {
    /// `accepted` is sorted and deduplicated; it must be nonempty.
    pub fn new(var: VarId, accepted: impl IntoIterator<Item = Value>) -> Option<Self> {
        let mut accepted: Vec<Value> = accepted.into_iter().collect();
        accepted.sort_unstable();
        accepted.dedup();
        (!accepted.is_empty()).then_some(Effect { var, accepted })
    }

    pub fn atom(var: VarId, value: Value) -> Self {
        Effect { var, accepted: vec![value] }
    }

    pub fn from_labels(model: &CausalModel, var: &str, labels: &[&str]) -> Result<Self, ModelError> {
        let id = model.lookup(var)?;
        if !model.is_endogenous(id) {
            return Err(ModelError::NotEndogenous(var.to_string()));
        }
        let vals = labels.iter().map(|l| model.value_of(id, l)).collect::<Result<Vec<_>, _>>()?;
        Effect::new(id, vals).ok_or_else(|| ModelError::MalformedFormula("empty effect".into()))
    }

    pub fn accepted(&self) -> &[Value] {
        &self.accepted
    }

    pub fn accepts(&self, v: Value) -> bool {
        self.accepted.contains(&v)
    }

    pub fn validate(&self, model: &CausalModel) -> Result<(), ModelError> {
        if self.var.index() >= model.var_count() {
            return Err(ModelError::UnknownVariable(format!("#{}", self.var.index())));
        }
        if !model.is_endogenous(self.var) {
            return Err(ModelError::NotEndogenous(model.name(self.var).to_string()));
        }
        if let Some(v) = self.accepted.iter().find(|v| **v as usize >= model.range(self.var).len()) {
            return Err(ModelError::ValueOutOfRange { var: model.name(self.var).to_string(), value: v.to_string() });
        }
        Ok(())
    }

    pub fn display<'a>(&'a self, model: &'a CausalModel) -> impl fmt::Display + 'a {
        EffectDisplay { model, effect: self }
    }
}

struct EffectDisplay<'a> {
    model: &'a CausalModel,
    effect: &'a Effect,
}

impl fmt::Display for EffectDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.model.name(self.effect.var);
        for (i, v) in self.effect.accepted.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{name}={}", self.model.label(self.effect.var, *v))?;
        }
        Ok(())
    }
}
