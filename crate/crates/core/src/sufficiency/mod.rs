//! The six sufficiency notions (direct, strong, weak; each in an actual and
//! a non-actual version) and the general parametrised notion.
//!
//! These deciders enumerate literally and favour clarity over speed. The
//! causation engine has its own packed implementation; each is used to check
//! the other.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::scm::{CausalModel, Context, ModelError, PartialSetting, Value, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SufficiencyKind {
    Direct,
    Strong,
    Weak,
    ActualDirect,
    ActualStrong,
    ActualWeak,
}

/// Sufficiency kind with the actual/non-actual distinction removed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Strength {
    Direct,
    Strong,
    Weak,
}

impl SufficiencyKind {
    pub const ALL: [SufficiencyKind; 6] = [
        SufficiencyKind::Direct,
        SufficiencyKind::Strong,
        SufficiencyKind::Weak,
        SufficiencyKind::ActualDirect,
        SufficiencyKind::ActualStrong,
        SufficiencyKind::ActualWeak,
    ];

    pub fn is_actual(self) -> bool {
        matches!(self, SufficiencyKind::ActualDirect | SufficiencyKind::ActualStrong | SufficiencyKind::ActualWeak)
    }

    pub fn strength(self) -> Strength {
        match self {
            SufficiencyKind::Direct | SufficiencyKind::ActualDirect => Strength::Direct,
            SufficiencyKind::Strong | SufficiencyKind::ActualStrong => Strength::Strong,
            SufficiencyKind::Weak | SufficiencyKind::ActualWeak => Strength::Weak,
        }
    }

    pub fn new(strength: Strength, actual: bool) -> Self {
        match (strength, actual) {
            (Strength::Direct, false) => SufficiencyKind::Direct,
            (Strength::Strong, false) => SufficiencyKind::Strong,
            (Strength::Weak, false) => SufficiencyKind::Weak,
            (Strength::Direct, true) => SufficiencyKind::ActualDirect,
            (Strength::Strong, true) => SufficiencyKind::ActualStrong,
            (Strength::Weak, true) => SufficiencyKind::ActualWeak,
        }
    }
}

impl fmt::Display for SufficiencyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SufficiencyKind::Direct => "direct",
            SufficiencyKind::Strong => "strong",
            SufficiencyKind::Weak => "weak",
            SufficiencyKind::ActualDirect => "actual-direct",
            SufficiencyKind::ActualStrong => "actual-strong",
            SufficiencyKind::ActualWeak => "actual-weak",
        })
    }
}

impl std::str::FromStr for SufficiencyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let key = s.to_ascii_lowercase().replace(['_', ' '], "-");
        SufficiencyKind::ALL.iter().copied().find(|k| k.to_string() == key).ok_or_else(|| {
            format!("unknown sufficiency kind `{s}` (expected direct, strong, weak, actual-direct, actual-strong or actual-weak)")
        })
    }
}

/// `N = n` through which strong sufficiency is routed; `values` covers
/// exactly the variables of `N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct NetworkWitness {
    pub values: PartialSetting,
}

impl NetworkWitness {
    pub fn vars(&self) -> Vec<VarId> {
        self.values.vars().collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SufficiencyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("`{0}` occurs in more than one of the given sets")]
    OverlappingSets(String),
    #[error("the target setting is empty")]
    EmptyTarget,
    #[error("no accepted values given")]
    EmptyDisjunction,
    #[error("set constraint violated: {0}")]
    SetConstraintViolation(String),
    #[error("an actual sufficiency kind needs a context")]
    MissingContext,
    #[error("a network chain needs at least one link")]
    EmptyChain,
}

type Result<T> = std::result::Result<T, SufficiencyError>;

/// Which contexts a quantifier sweeps.
#[derive(Clone, Copy, Debug)]
pub enum Scope<'a> {
    All,
    Actual(&'a Context),
}

impl<'a> Scope<'a> {
    pub fn of(ctx: Option<&'a Context>) -> Self {
        ctx.map_or(Scope::All, Scope::Actual)
    }

    fn for_kind(kind: SufficiencyKind, ctx: Option<&'a Context>) -> Result<Self> {
        match (kind.is_actual(), ctx) {
            (true, Some(c)) => Ok(Scope::Actual(c)),
            (true, None) => Err(SufficiencyError::MissingContext),
            (false, _) => Ok(Scope::All),
        }
    }
}

/// Calls `f` with every assignment of `vars`, lexicographic with the first
/// variable slowest; stops early when `f` returns `false`.
pub(crate) fn for_each_assignment(model: &CausalModel, vars: &[VarId], mut f: impl FnMut(&[Value]) -> bool) -> bool {
    let radices: Vec<usize> = vars.iter().map(|v| model.range(*v).len()).collect();
    let mut cur = vec![0 as Value; vars.len()];
    loop {
        if !f(&cur) {
            return false;
        }
        let mut i = vars.len();
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            cur[i] += 1;
            if (cur[i] as usize) < radices[i] {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// All subsets of `pool` (given in ascending order) containing `required`,
/// by increasing size, ties broken lexicographically.
pub(crate) fn subsets_by_size(pool: &[VarId], required: &[VarId]) -> Vec<Vec<VarId>> {
    let free: Vec<VarId> = pool.iter().copied().filter(|v| !required.contains(v)).collect();
    let mut out = Vec::with_capacity(1 << free.len());
    for k in 0..=free.len() {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let mut s: Vec<VarId> = required.to_vec();
            s.extend(idx.iter().map(|i| free[*i]));
            s.sort();
            out.push(s);
            // next k-combination
            let mut i = k;
            while i > 0 && idx[i - 1] == free.len() - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}

fn check_disjoint(model: &CausalModel, sets: &[&[VarId]]) -> Result<()> {
    let mut seen: Vec<VarId> = Vec::new();
    for s in sets {
        for v in *s {
            if seen.contains(v) {
                return Err(SufficiencyError::OverlappingSets(model.name(*v).to_string()));
            }
            seen.push(*v);
        }
    }
    Ok(())
}

/// A reusable solver: contexts resolved once, one scratch buffer.
struct Sweep<'m> {
    model: &'m CausalModel,
    contexts: Vec<Context>,
    buf: Vec<Value>,
    fixed: Vec<Option<Value>>,
}

impl<'m> Sweep<'m> {
    fn new(model: &'m CausalModel, scope: Scope<'_>) -> Self {
        let contexts = match scope {
            Scope::All => Context::all(model),
            Scope::Actual(c) => vec![c.clone()],
        };
        Sweep { model, contexts, buf: vec![0; model.var_count()], fixed: vec![None; model.var_count()] }
    }

    /// Does `[X<-x, C<-c]` force `target` for every `c ∈ R(C)` and every
    /// context in scope?
    fn forces(&mut self, x: &PartialSetting, c_vars: &[VarId], target: &PartialSetting) -> bool {
        let model = self.model;
        for f in self.fixed.iter_mut() {
            *f = None;
        }
        for (v, val) in x.iter() {
            self.fixed[v.index()] = Some(val);
        }
        let contexts = std::mem::take(&mut self.contexts);
        let ok = for_each_assignment(model, c_vars, |c| {
            for (v, val) in c_vars.iter().zip(c) {
                self.fixed[v.index()] = Some(*val);
            }
            contexts.iter().all(|u| {
                solve_fixed(model, u, &self.fixed, &mut self.buf);
                target.iter().all(|(v, val)| self.buf[v.index()] == val)
            })
        });
        self.contexts = contexts;
        ok
    }

    /// The unique `S`-values forced by `[X<-x, C<-c]` across the sweep, if any.
    fn forced_values(&mut self, x: &PartialSetting, c_vars: &[VarId], s: &[VarId]) -> Option<PartialSetting> {
        // Probe one point, then verify the probed values universally.
        let model = self.model;
        let mut fixed = vec![None; model.var_count()];
        for (v, val) in x.iter() {
            fixed[v.index()] = Some(val);
        }
        for v in c_vars {
            fixed[v.index()] = Some(0);
        }
        solve_fixed(model, &self.contexts[0], &fixed, &mut self.buf);
        let probe = PartialSetting::new(s.iter().map(|v| (*v, self.buf[v.index()]))).expect("distinct");
        self.forces(x, c_vars, &probe).then_some(probe)
    }
}

fn solve_fixed(model: &CausalModel, u: &Context, fixed: &[Option<Value>], buf: &mut [Value]) {
    for (v, x) in u.iter() {
        buf[v.index()] = x;
    }
    for &v in model.order() {
        buf[v.index()] = match fixed[v.index()] {
            Some(x) => x,
            None => model.eval_var(v, buf),
        };
    }
}

fn endo_except(model: &CausalModel, excluded: &[&PartialSetting]) -> Vec<VarId> {
    model.endogenous().filter(|v| excluded.iter().all(|s| !s.contains(*v))).collect()
}

fn validate_pair(model: &CausalModel, x: &PartialSetting, y: &PartialSetting) -> Result<()> {
    x.validate(model)?;
    y.validate(model)?;
    if y.is_empty() {
        return Err(SufficiencyError::EmptyTarget);
    }
    let xs: Vec<VarId> = x.vars().collect();
    let ys: Vec<VarId> = y.vars().collect();
    check_disjoint(model, &[&xs, &ys])
}

/// `X=x` forces `Y=y` under every setting of the remaining endogenous
/// variables, in every context (or in `ctx` only).
pub fn directly_sufficient(model: &CausalModel, x: &PartialSetting, y: &PartialSetting, ctx: Option<&Context>) -> Result<bool> {
    validate_pair(model, x, y)?;
    let c = endo_except(model, &[x, y]);
    Ok(Sweep::new(model, Scope::of(ctx)).forces(x, &c, y))
}

/// `[X<-x] Y=y` in every context (or in `ctx`).
pub fn weakly_sufficient(model: &CausalModel, x: &PartialSetting, y: &PartialSetting, ctx: Option<&Context>) -> Result<bool> {
    validate_pair(model, x, y)?;
    Ok(Sweep::new(model, Scope::of(ctx)).forces(x, &[], y))
}

/// Search options for strong sufficiency.
#[derive(Clone, Copy, Debug, Default)]
pub struct SearchOptions {
    /// Only consider networks whose non-target members are not roots. Sound
    /// for normalized models; verified against the unrestricted search.
    pub non_root_networks: bool,
}

/// Some `N=n ⊇ Y=y` for which `X=x` is directly sufficient, the first in
/// order of increasing `|N|` (lexicographic among equals).
pub fn strongly_sufficient(model: &CausalModel, x: &PartialSetting, y: &PartialSetting, ctx: Option<&Context>) -> Result<Option<NetworkWitness>> {
    strongly_sufficient_with(model, x, y, ctx, SearchOptions::default())
}

pub fn strongly_sufficient_with(
    model: &CausalModel,
    x: &PartialSetting,
    y: &PartialSetting,
    ctx: Option<&Context>,
    opts: SearchOptions,
) -> Result<Option<NetworkWitness>> {
    validate_pair(model, x, y)?;
    let roots = if opts.non_root_networks { crate::scm::root_variables(model)? } else { Default::default() };
    let pool: Vec<VarId> = endo_except(model, &[x]).into_iter().filter(|v| y.contains(*v) || !roots.contains(v)).collect();
    let required: Vec<VarId> = y.vars().collect();
    let mut sweep = Sweep::new(model, Scope::of(ctx));
    for n in subsets_by_size(&pool, &required) {
        let c: Vec<VarId> = model.endogenous().filter(|v| !x.contains(*v) && !n.contains(v)).collect();
        if let Some(vals) = sweep.forced_values(x, &c, &n) {
            if y.iter().all(|(v, val)| vals.get(v) == Some(val)) {
                return Ok(Some(NetworkWitness { values: vals }));
            }
        }
    }
    Ok(None)
}

/// `X=x` directly sufficient for `N1=n1`, each link for the next, and the
/// last for `Y=y`.
pub fn strongly_sufficient_along_chain(
    model: &CausalModel,
    x: &PartialSetting,
    y: &PartialSetting,
    chain: &[PartialSetting],
    ctx: Option<&Context>,
) -> Result<bool> {
    validate_pair(model, x, y)?;
    if chain.is_empty() {
        return Err(SufficiencyError::EmptyChain);
    }
    let mut prev = x;
    for link in chain.iter().chain(std::iter::once(y)) {
        link.validate(model)?;
        // A link may repeat variables of the previous one; those must agree
        // and are dropped from the target.
        if prev.iter().any(|(v, val)| link.get(v).is_some_and(|w| w != val)) {
            return Ok(false);
        }
        let target = link.restrict(|v| !prev.contains(v));
        if !target.is_empty() && !directly_sufficient(model, prev, &target, ctx)? {
            return Ok(false);
        }
        prev = link;
    }
    Ok(true)
}

/// `∀c ∈ R(C)` and every context (or `ctx`): `[X<-x, C<-c] N=n`, where `n`
/// must extend `y`.
pub fn general_sufficient(
    model: &CausalModel,
    x: &PartialSetting,
    y: &PartialSetting,
    n: &PartialSetting,
    c: &[VarId],
    ctx: Option<&Context>,
) -> Result<bool> {
    validate_pair(model, x, y)?;
    n.validate(model)?;
    let xs: Vec<VarId> = x.vars().collect();
    let ns: Vec<VarId> = n.vars().collect();
    for v in c {
        if !model.is_endogenous(*v) {
            return Err(ModelError::NotEndogenous(model.name(*v).to_string()).into());
        }
    }
    if let Err(SufficiencyError::OverlappingSets(v)) = check_disjoint(model, &[&xs, c, &ns]) {
        return Err(SufficiencyError::SetConstraintViolation(format!("`{v}` is in more than one of X, C, N")));
    }
    if let Some((v, _)) = y.iter().find(|(v, val)| n.get(*v) != Some(*val)) {
        return Err(SufficiencyError::SetConstraintViolation(format!("N=n does not extend the target at `{}`", model.name(v))));
    }
    Ok(Sweep::new(model, Scope::of(ctx)).forces(x, c, n))
}

/// Sufficient (per `kind`) for `Y=v` for some accepted `v`.
pub fn sufficient_for_disjunction(
    model: &CausalModel,
    x: &PartialSetting,
    effect_var: VarId,
    accepted: &[Value],
    kind: SufficiencyKind,
    ctx: Option<&Context>,
) -> Result<bool> {
    if accepted.is_empty() {
        return Err(SufficiencyError::EmptyDisjunction);
    }
    for &v in accepted {
        if sufficient(model, x, &PartialSetting::single(effect_var, v), kind, ctx)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Dispatch on `kind`; actual kinds require `ctx`.
pub fn sufficient(model: &CausalModel, x: &PartialSetting, y: &PartialSetting, kind: SufficiencyKind, ctx: Option<&Context>) -> Result<bool> {
    let ctx = match Scope::for_kind(kind, ctx)? {
        Scope::All => None,
        Scope::Actual(c) => Some(c),
    };
    Ok(match kind.strength() {
        Strength::Direct => directly_sufficient(model, x, y, ctx)?,
        Strength::Weak => weakly_sufficient(model, x, y, ctx)?,
        Strength::Strong => strongly_sufficient(model, x, y, ctx)?.is_some(),
    })
}

/// Sufficient for `Y=y` along the fixed network `N`: weak and direct kinds
/// require `N = {Y}`; strong kinds look for values `n` over `N` extending
/// `Y=y`, trying every candidate `n` (no probing), and return the first.
pub fn sufficient_along(
    model: &CausalModel,
    x: &PartialSetting,
    y_var: VarId,
    y_val: Value,
    network: &[VarId],
    kind: SufficiencyKind,
    ctx: Option<&Context>,
) -> Result<Option<NetworkWitness>> {
    let scope = Scope::for_kind(kind, ctx)?;
    x.validate(model)?;
    if !network.contains(&y_var) {
        return Err(SufficiencyError::SetConstraintViolation("the network must contain the effect variable".into()));
    }
    let xs: Vec<VarId> = x.vars().collect();
    check_disjoint(model, &[&xs, network])?;
    let y = PartialSetting::single(y_var, y_val);
    let mut sweep = Sweep::new(model, scope);
    match kind.strength() {
        Strength::Weak | Strength::Direct => {
            if network.len() != 1 {
                return Err(SufficiencyError::SetConstraintViolation("weak and direct sufficiency use the network {Y}".into()));
            }
            let c = if kind.strength() == Strength::Weak { Vec::new() } else { endo_except(model, &[x, &y]) };
            Ok(sweep.forces(x, &c, &y).then(|| NetworkWitness { values: y }))
        }
        Strength::Strong => {
            let mut rest: Vec<VarId> = network.to_vec();
            rest.sort();
            let c: Vec<VarId> = model.endogenous().filter(|v| !x.contains(*v) && !rest.contains(v)).collect();
            let mut found = None;
            for_each_assignment(model, &rest, |vals| {
                let n = PartialSetting::new(rest.iter().copied().zip(vals.iter().copied())).expect("distinct");
                if n.get(y_var) == Some(y_val) && sweep.forces(x, &c, &n) {
                    found = Some(NetworkWitness { values: n });
                    return false;
                }
                true
            });
            Ok(found)
        }
    }
}
