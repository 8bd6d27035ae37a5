//! Actual causation under the fifteen definitions.
//!
//! Every query runs against the exogenously normalized model (each exogenous
//! variable feeding only equations `V = U`); [`Options::strict`] rejects
//! models that are not already normalized instead. Normalization appends
//! variables, so ids from the input model stay valid.
//!
//! [`Analyzer`] is the entry point for repeated queries against one model
//! and context: it caches world tables, sufficiency projections and AC2
//! results. The free functions build a fresh analyzer per call.

mod engine;
pub mod reference;
mod search;
mod types;

use std::cell::RefCell;
use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

pub use types::*;

use crate::scm::{is_normalized, normalize_exogenous, CausalModel, Context, ModelError, PartialSetting, Value, VarId, World};
use crate::sufficiency::NetworkWitness;
use engine::{bits, get, EngineError, Mask, Session};
use search::{Found, Hp, Query, Reading};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CausationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("the model is not normalized (strict mode)")]
    NotNormalized,
    #[error("the effect variable `{0}` also occurs in the candidate cause")]
    EffectInCause(String),
    #[error("the candidate cause is empty")]
    EmptyCause,
    #[error("model too large for the causation engine: {0}")]
    ModelTooLarge(String),
    #[error(transparent)]
    Sufficiency(#[from] crate::sufficiency::SufficiencyError),
}

impl From<EngineError> for CausationError {
    fn from(e: EngineError) -> Self {
        CausationError::ModelTooLarge(match e {
            EngineError::TooManyVariables(n) => format!("{n} endogenous variables (at most {})", engine::MAX_VARS),
            EngineError::RangeTooLarge(v) => format!("range of `{v}` exceeds {} values", engine::MAX_RANGE),
        })
    }
}

type Result<T> = std::result::Result<T, CausationError>;

/// Deliberate defects, for testing that the verification harness notices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mutation {
    /// Skip AC3 for this definition.
    SkipMinimality(DefinitionId),
    /// Treat AC2(a) as always satisfied for this definition.
    SkipNecessity(DefinitionId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Options {
    /// Reject non-normalized models instead of normalizing them.
    pub strict: bool,
    /// Restrict networks `N ∖ {Y}` to non-root variables. Verdicts are
    /// unchanged on normalized models; searches are faster and witnesses
    /// keep roots in `W` rather than in `N`. On by default.
    pub restrict_networks: bool,
    /// Also compute each general-form verdict under the alternative reading
    /// of the sub-network sweep in AC2(a).
    pub verbose: bool,
    pub mutation: Option<Mutation>,
}

impl Default for Options {
    fn default() -> Self {
        Options { strict: false, restrict_networks: true, verbose: false, mutation: None }
    }
}

/// What makes AC2 hold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Evidence {
    /// `W = w`: the actual values for the general form and Modified HP, any
    /// values for Original/Updated/Strong HP.
    pub witness: PartialSetting,
    /// `N = n` (general form only).
    pub network: Option<NetworkWitness>,
    /// `x'` (absent under minimal necessity).
    pub contrast: Option<PartialSetting>,
    /// `Z`, the complement of `W` (Original/Updated/Strong HP only).
    pub partition: Option<Vec<VarId>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub definition: DefinitionId,
    pub cause: PartialSetting,
    pub effect: Effect,
    pub is_cause: bool,
    pub ac1: bool,
    /// AC2 evidence for `cause` itself, when AC2 holds.
    pub evidence: Option<Evidence>,
    /// The first strict subset (with actual values) satisfying AC2.
    pub minimality_counterexample: Option<PartialSetting>,
    /// For part-of queries: the cause containing the queried conjunct.
    pub containing_cause: Option<PartialSetting>,
    /// Verbose mode: the verdict under the alternative AC2(a) reading.
    pub alternative_reading: Option<bool>,
}

/// One model, one context, cached.
pub struct Analyzer {
    session: Session,
    context: Context,
    options: Options,
    ac2_cache: RefCell<HashMap<(DefinitionId, bool, Query), Option<Found>>>,
}

impl Analyzer {
    pub fn new(model: &CausalModel, context: &Context) -> Result<Self> {
        Self::with_options(model, context, Options::default())
    }

    pub fn with_options(model: &CausalModel, context: &Context, options: Options) -> Result<Self> {
        if context.iter().count() != model.exogenous().count() || context.iter().any(|(v, _)| v.index() >= model.var_count()) {
            return Err(ModelError::IncompleteContext("context does not match the model".into()).into());
        }
        let normalized = if is_normalized(model) {
            model.clone()
        } else if options.strict {
            return Err(CausationError::NotNormalized);
        } else {
            normalize_exogenous(model)
        };
        let session = Session::new(normalized, context)?;
        Ok(Analyzer { session, context: context.clone(), options, ac2_cache: RefCell::new(HashMap::new()) })
    }

    /// The normalized model every query runs against.
    pub fn model(&self) -> &CausalModel {
        &self.session.model
    }

    pub fn context(&self) -> &Context {
        &self.context
    }

    pub fn options(&self) -> Options {
        self.options
    }

    pub fn actual_world(&self) -> World {
        self.session.model.solve(&self.context)
    }

    fn query(&self, x: &PartialSetting, effect: &Effect) -> Result<Query> {
        let model = self.model();
        x.validate(model)?;
        effect.validate(model)?;
        if x.contains(effect.var) {
            return Err(CausationError::EffectInCause(model.name(effect.var).to_string()));
        }
        if x.is_empty() {
            return Err(CausationError::EmptyCause);
        }
        let (x_mask, x_vals) = self.session.pack(x.iter()).ok_or_else(|| ModelError::NotEndogenous("cause".into()))?;
        let y = self.session.pos_of[effect.var.index()].expect("effect validated as endogenous");
        let accept = effect.accepted().iter().fold(0u32, |a, v| a | (1 << v));
        Ok(Query { x_mask, x_vals, y, accept })
    }

    fn ac1_packed(&self, q: &Query) -> bool {
        let aw = self.session.actual_world;
        aw & self.session.spread(q.x_mask) == q.x_vals && q.accepts(get(aw, q.y))
    }

    /// `X=x` and the effect both hold in the actual world.
    pub fn ac1(&self, x: &PartialSetting, effect: &Effect) -> Result<bool> {
        Ok(self.ac1_packed(&self.query(x, effect)?))
    }

    fn ac2_packed(&self, def: DefinitionId, q: &Query, alternative: bool) -> Option<Found> {
        let key = (def, alternative, *q);
        if let Some(hit) = self.ac2_cache.borrow().get(&key) {
            return *hit;
        }
        let s = &self.session;
        let found = if self.options.mutation == Some(Mutation::SkipNecessity(def)) {
            self.ac2_without_necessity(def, q)
        } else {
            match def.general_form() {
                Some((kind, necessity)) => {
                    let reading = Reading {
                        actual_restriction: alternative && necessity == Necessity::Contrastive,
                        all_subsets: alternative && necessity == Necessity::Minimal,
                    };
                    s.ac2_general(q, kind, necessity, self.options.restrict_networks, reading)
                }
                None => s.ac2_hp(q, hp_of(def)),
            }
        };
        self.ac2_cache.borrow_mut().insert(key, found);
        found
    }

    /// The mutated search: AC2(b) alone, actual witness, no contrast.
    fn ac2_without_necessity(&self, def: DefinitionId, q: &Query) -> Option<Found> {
        let s = &self.session;
        let aw = s.actual_world;
        let ybit = 1 << q.y;
        let w = s.full & !q.x_mask & !ybit;
        let w_vals = aw & s.spread(w);
        let y_ok = q.accepts(get(s.world_of(s.actual, q.x_mask | w, q.x_vals | w_vals), q.y));
        y_ok.then_some(Found {
            w_mask: w,
            w_vals,
            n_mask: if def.is_hp() { 0 } else { ybit },
            n_vals: aw & s.spread(ybit),
            contrast: None,
            z_mask: None,
        })
    }

    fn evidence(&self, def: DefinitionId, q: &Query, f: &Found) -> Evidence {
        let s = &self.session;
        Evidence {
            witness: s.unpack(f.w_mask, f.w_vals),
            network: (!def.is_hp() && f.n_mask != 0).then(|| NetworkWitness { values: s.unpack(f.n_mask, f.n_vals) }),
            contrast: f.contrast.map(|xp| s.unpack(q.x_mask, xp)),
            partition: f.z_mask.map(|z| s.vars_of(z)),
        }
    }

    /// AC2 alone, for `X=x` (which need not be actual).
    pub fn ac2(&self, def: DefinitionId, x: &PartialSetting, effect: &Effect) -> Result<Option<Evidence>> {
        let q = self.query(x, effect)?;
        Ok(self.ac2_packed(def, &q, false).map(|f| self.evidence(def, &q, &f)))
    }

    /// First strict nonempty subset (by size, then position) with its actual
    /// values satisfying AC2.
    fn smaller_cause(&self, def: DefinitionId, q: &Query, alternative: bool) -> Option<Mask> {
        if self.options.mutation == Some(Mutation::SkipMinimality(def)) {
            return None;
        }
        let subs = self.session.subsets(q.x_mask);
        subs.iter().copied().filter(|m| *m != 0 && *m != q.x_mask).find(|&m| {
            let sub = Query { x_mask: m, x_vals: q.x_vals & self.session.spread(m), ..*q };
            self.ac2_packed(def, &sub, alternative).is_some()
        })
    }

    fn decide(&self, def: DefinitionId, q: &Query, alternative: bool) -> (bool, Option<Found>, Option<Mask>) {
        if !self.ac1_packed(q) {
            return (false, None, None);
        }
        let Some(found) = self.ac2_packed(def, q, alternative) else { return (false, None, None) };
        let smaller = self.smaller_cause(def, q, alternative);
        (smaller.is_none(), Some(found), smaller)
    }

    fn verdict(&self, def: DefinitionId, q: &Query, x: &PartialSetting, effect: &Effect) -> Verdict {
        let ac1 = self.ac1_packed(q);
        let (is_cause, found, smaller) = self.decide(def, q, false);
        let alternative_reading = (self.options.verbose && def.general_form().is_some()).then(|| self.decide(def, q, true).0);
        Verdict {
            definition: def,
            cause: x.clone(),
            effect: effect.clone(),
            is_cause,
            ac1,
            evidence: found.map(|f| self.evidence(def, q, &f)),
            minimality_counterexample: smaller.map(|m| self.session.unpack(m, q.x_vals)),
            containing_cause: None,
            alternative_reading,
        }
    }

    /// AC1 ∧ AC2 ∧ AC3.
    pub fn is_cause(&self, def: DefinitionId, x: &PartialSetting, effect: &Effect) -> Result<Verdict> {
        let q = self.query(x, effect)?;
        Ok(self.verdict(def, &q, x, effect))
    }

    /// Fast boolean form of [`Analyzer::is_cause`].
    pub fn holds(&self, def: DefinitionId, x: &PartialSetting, effect: &Effect) -> Result<bool> {
        let q = self.query(x, effect)?;
        Ok(self.decide(def, &q, false).0)
    }

    /// Is `X=x` a conjunct of some cause? Candidates containing it are tried
    /// by increasing size, up to `max_size` variables (unbounded if `None`).
    pub fn is_part_of_cause(&self, def: DefinitionId, conjunct: (VarId, Value), effect: &Effect, max_size: Option<usize>) -> Result<Verdict> {
        let x = PartialSetting::single(conjunct.0, conjunct.1);
        let q = self.query(&x, effect)?;
        let mut verdict = self.verdict(def, &q, &x, effect);
        if verdict.is_cause || !verdict.ac1 {
            verdict.containing_cause = verdict.is_cause.then(|| x.clone());
            return Ok(verdict);
        }
        let s = &self.session;
        let pool = s.full & !q.x_mask & !(1 << q.y);
        let limit = max_size.unwrap_or(usize::MAX);
        for &extra in s.subsets(pool).iter() {
            if extra == 0 {
                continue;
            }
            if extra.count_ones() as usize + 1 > limit {
                break;
            }
            let mask = q.x_mask | extra;
            let big = Query { x_mask: mask, x_vals: s.actual_world & s.spread(mask), ..q };
            if self.decide(def, &big, false).0 {
                let cause = s.unpack(mask, big.x_vals);
                verdict = self.verdict(def, &big, &cause, effect);
                verdict.containing_cause = Some(cause);
                verdict.cause = x;
                return Ok(verdict);
            }
        }
        Ok(verdict)
    }

    /// Part-of, boolean.
    pub fn part_of_holds(&self, def: DefinitionId, conjunct: (VarId, Value), effect: &Effect) -> Result<bool> {
        let x = PartialSetting::single(conjunct.0, conjunct.1);
        let q = self.query(&x, effect)?;
        if !self.ac1_packed(&q) {
            return Ok(false);
        }
        let s = &self.session;
        let pool = s.full & !q.x_mask & !(1 << q.y);
        Ok(s.subsets(pool).iter().any(|&extra| {
            let mask = q.x_mask | extra;
            let big = Query { x_mask: mask, x_vals: s.actual_world & s.spread(mask), ..q };
            self.decide(def, &big, false).0
        }))
    }

    /// Every cause with actual values and at most `max_size` conjuncts, by
    /// size then variable order.
    pub fn find_all_causes(&self, def: DefinitionId, effect: &Effect, max_size: usize) -> Result<Vec<Verdict>> {
        effect.validate(self.model())?;
        let s = &self.session;
        let y = s.pos_of[effect.var.index()].expect("validated");
        let accept = effect.accepted().iter().fold(0u32, |a, v| a | (1 << v));
        let pool = s.full & !(1 << y);
        let mut out = Vec::new();
        for &mask in s.subsets(pool).iter() {
            if mask == 0 {
                continue;
            }
            if mask.count_ones() as usize > max_size {
                break;
            }
            let q = Query { x_mask: mask, x_vals: s.actual_world & s.spread(mask), y, accept };
            if self.decide(def, &q, false).0 {
                let x = s.unpack(mask, q.x_vals);
                out.push(self.verdict(def, &q, &x, effect));
            }
        }
        Ok(out)
    }

    /// Some `x' ≠ x` with `[X<-x'] Y ∉ A` in the actual context.
    pub fn dependence_holds(&self, x: &PartialSetting, effect: &Effect) -> Result<bool> {
        let q = self.query(x, effect)?;
        Ok(self.session.depends(&q).is_some())
    }

    /// Positions of the model's root variables, as ids.
    pub fn roots(&self) -> Vec<VarId> {
        bits(self.session.roots).map(|p| self.session.endo[p]).collect()
    }
}

fn hp_of(def: DefinitionId) -> Hp {
    match def {
        DefinitionId::OriginalHP => Hp::Original,
        DefinitionId::UpdatedHP => Hp::Updated,
        DefinitionId::ModifiedHP => Hp::Modified,
        DefinitionId::StrongHP => Hp::Strong,
        _ => unreachable!("general-form definition"),
    }
}

/// AC1 for one query.
pub fn ac1(model: &CausalModel, ctx: &Context, x: &PartialSetting, effect: &Effect) -> Result<bool> {
    Analyzer::new(model, ctx)?.ac1(x, effect)
}

/// AC2 of the general form (`kind`, `necessity`): the first witness found.
pub fn ac2_general(
    model: &CausalModel,
    ctx: &Context,
    x: &PartialSetting,
    effect: &Effect,
    kind: crate::sufficiency::SufficiencyKind,
    necessity: Necessity,
) -> Result<Option<Evidence>> {
    Analyzer::new(model, ctx)?.ac2(DefinitionId::from_general_form(kind, necessity), x, effect)
}

pub fn ac2_original_hp(model: &CausalModel, ctx: &Context, x: &PartialSetting, effect: &Effect) -> Result<Option<Evidence>> {
    Analyzer::new(model, ctx)?.ac2(DefinitionId::OriginalHP, x, effect)
}

pub fn ac2_updated_hp(model: &CausalModel, ctx: &Context, x: &PartialSetting, effect: &Effect) -> Result<Option<Evidence>> {
    Analyzer::new(model, ctx)?.ac2(DefinitionId::UpdatedHP, x, effect)
}

pub fn ac2_modified_hp(model: &CausalModel, ctx: &Context, x: &PartialSetting, effect: &Effect) -> Result<Option<Evidence>> {
    Analyzer::new(model, ctx)?.ac2(DefinitionId::ModifiedHP, x, effect)
}

/// Updated HP plus AC2(c).
pub fn ac2c_strong(model: &CausalModel, ctx: &Context, x: &PartialSetting, effect: &Effect) -> Result<Option<Evidence>> {
    Analyzer::new(model, ctx)?.ac2(DefinitionId::StrongHP, x, effect)
}

pub fn is_cause(model: &CausalModel, ctx: &Context, def: DefinitionId, x: &PartialSetting, effect: &Effect) -> Result<Verdict> {
    Analyzer::new(model, ctx)?.is_cause(def, x, effect)
}

pub fn is_part_of_cause(model: &CausalModel, ctx: &Context, conjunct: (VarId, Value), effect: &Effect, def: DefinitionId) -> Result<Verdict> {
    Analyzer::new(model, ctx)?.is_part_of_cause(def, conjunct, effect, None)
}

pub fn find_all_causes(model: &CausalModel, ctx: &Context, effect: &Effect, def: DefinitionId, max_size: usize) -> Result<Vec<Verdict>> {
    Analyzer::new(model, ctx)?.find_all_causes(def, effect, max_size)
}

pub fn dependence_holds(model: &CausalModel, ctx: &Context, x: &PartialSetting, effect: &Effect) -> Result<bool> {
    Analyzer::new(model, ctx)?.dependence_holds(x, effect)
}
