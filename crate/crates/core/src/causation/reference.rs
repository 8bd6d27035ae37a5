//! A literal, slow implementation of the definitions, built only on the
//! [`crate::sufficiency`] deciders and [`crate::scm::holds`]. It shares no
//! code with the packed engine and exists to cross-check it: both on whole
//! verdicts and on the evidence the engine reports.
//!
//! Models are used as given (no normalization).

use super::{CausationError, DefinitionId, Effect, Evidence, Necessity};
use crate::scm::{holds, CausalFormula, CausalModel, Context, PartialSetting, Value, VarId};
use crate::sufficiency::{for_each_assignment, subsets_by_size, sufficient_along, NetworkWitness, SufficiencyKind};

type Result<T> = std::result::Result<T, CausationError>;

fn ctx_for(kind: SufficiencyKind, ctx: &Context) -> Option<&Context> {
    kind.is_actual().then_some(ctx)
}

fn effect_holds(model: &CausalModel, ctx: &Context, iv: &PartialSetting, effect: &Effect) -> Result<bool> {
    let f = CausalFormula::under(iv.clone(), CausalFormula::one_of(effect.var, effect.accepted()));
    Ok(holds(model, ctx, &f)?)
}

fn settings_of(model: &CausalModel, vars: &[VarId]) -> Vec<PartialSetting> {
    let mut out = Vec::new();
    for_each_assignment(model, vars, |vals| {
        out.push(PartialSetting::new(vars.iter().copied().zip(vals.iter().copied())).expect("distinct"));
        true
    });
    out
}

fn join(a: &PartialSetting, b: &PartialSetting) -> PartialSetting {
    a.union(b).expect("disjoint settings")
}

/// `P` is sufficient (per `kind`) for some accepted `Y=v` along `S`.
fn sufficient_for_effect(model: &CausalModel, ctx: &Context, p: &PartialSetting, effect: &Effect, s: &[VarId], kind: SufficiencyKind) -> Result<bool> {
    for &v in effect.accepted() {
        if sufficient_along(model, p, effect.var, v, s, kind, ctx_for(kind, ctx))?.is_some() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// AC2(a) for `P` along every `S ⊆ N` with `Y ∈ S`.
fn necessary(model: &CausalModel, ctx: &Context, p: &PartialSetting, effect: &Effect, n: &[VarId], kind: SufficiencyKind) -> Result<bool> {
    for s in subsets_by_size(n, &[effect.var]) {
        if sufficient_for_effect(model, ctx, p, effect, &s, kind)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn endogenous_except(model: &CausalModel, x: &PartialSetting, y: VarId) -> Vec<VarId> {
    model.endogenous().filter(|v| !x.contains(*v) && *v != y).collect()
}

fn general(model: &CausalModel, ctx: &Context, x: &PartialSetting, effect: &Effect, kind: SufficiencyKind, necessity: Necessity) -> Result<Option<Evidence>> {
    let actual = model.solve(ctx);
    let y_star = actual.get(effect.var);
    let xs: Vec<VarId> = x.vars().collect();
    let pool = endogenous_except(model, x, effect.var);
    let contrasts: Vec<PartialSetting> = settings_of(model, &xs).into_iter().filter(|c| c != x).collect();
    for w in subsets_by_size(&pool, &[]) {
        let w_star = actual.project(w.iter().copied());
        let networks = if kind.strength() == crate::sufficiency::Strength::Strong {
            let rest: Vec<VarId> = pool.iter().copied().filter(|v| !w.contains(v)).chain([effect.var]).collect();
            let mut rest = rest;
            rest.sort();
            subsets_by_size(&rest, &[effect.var])
        } else {
            vec![vec![effect.var]]
        };
        for n in networks {
            let Some(witness) = sufficient_along(model, &join(x, &w_star), effect.var, y_star, &n, kind, ctx_for(kind, ctx))? else {
                continue;
            };
            let evidence = |contrast| Evidence { witness: w_star.clone(), network: Some(witness.clone()), contrast, partition: None };
            match necessity {
                Necessity::Contrastive => {
                    for xp in &contrasts {
                        if necessary(model, ctx, &join(xp, &w_star), effect, &n, kind)? {
                            return Ok(Some(evidence(Some(xp.clone()))));
                        }
                    }
                }
                Necessity::Minimal => {
                    if necessary(model, ctx, &w_star, effect, &n, kind)? {
                        return Ok(Some(evidence(None)));
                    }
                }
            }
        }
    }
    Ok(None)
}

fn hp(model: &CausalModel, ctx: &Context, x: &PartialSetting, effect: &Effect, def: DefinitionId) -> Result<Option<Evidence>> {
    let actual = model.solve(ctx);
    let xs: Vec<VarId> = x.vars().collect();
    let pool = endogenous_except(model, x, effect.var);
    let contrasts: Vec<PartialSetting> = settings_of(model, &xs).into_iter().filter(|c| c != x).collect();
    for w in subsets_by_size(&pool, &[]) {
        let z: Vec<VarId> = model.endogenous().filter(|v| !w.contains(v)).collect();
        let candidates = if def == DefinitionId::ModifiedHP { vec![actual.project(w.iter().copied())] } else { settings_of(model, &w) };
        for wv in candidates {
            let mut contrast = None;
            for xp in &contrasts {
                if !effect_holds(model, ctx, &join(xp, &wv), effect)? {
                    contrast = Some(xp.clone());
                    break;
                }
            }
            let Some(contrast) = contrast else { continue };
            let evidence = Evidence {
                witness: wv.clone(),
                network: None,
                contrast: Some(contrast),
                partition: (def != DefinitionId::ModifiedHP).then(|| z.clone()),
            };
            if def == DefinitionId::ModifiedHP || hp_b(model, ctx, x, effect, def, &wv, &z)? {
                return Ok(Some(evidence));
            }
        }
    }
    Ok(None)
}

/// AC2(b) of Original/Updated HP, plus AC2(c) for the strong variant.
fn hp_b(model: &CausalModel, ctx: &Context, x: &PartialSetting, effect: &Effect, def: DefinitionId, wv: &PartialSetting, z: &[VarId]) -> Result<bool> {
    let actual = model.solve(ctx);
    let zx: Vec<VarId> = z.iter().copied().filter(|v| !x.contains(*v)).collect();
    let w_vars: Vec<VarId> = wv.vars().collect();
    let w_subsets = if def == DefinitionId::OriginalHP { vec![w_vars.clone()] } else { subsets_by_size(&w_vars, &[]) };
    for wp in &w_subsets {
        let wpv = wv.restrict(|v| wp.contains(&v));
        for zp in subsets_by_size(&zx, &[]) {
            let iv = join(&join(x, &wpv), &actual.project(zp.iter().copied()));
            if !effect_holds(model, ctx, &iv, effect)? {
                return Ok(false);
            }
        }
    }
    if def == DefinitionId::StrongHP {
        for other in settings_of(model, &w_vars) {
            if !effect_holds(model, ctx, &join(x, &other), effect)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// AC2 for `def`, searched in the same order as the engine.
pub fn ac2(model: &CausalModel, ctx: &Context, def: DefinitionId, x: &PartialSetting, effect: &Effect) -> Result<Option<Evidence>> {
    match def.general_form() {
        Some((kind, necessity)) => general(model, ctx, x, effect, kind, necessity),
        None => hp(model, ctx, x, effect, def),
    }
}

pub fn ac1(model: &CausalModel, ctx: &Context, x: &PartialSetting, effect: &Effect) -> bool {
    let actual = model.solve(ctx);
    x.iter().all(|(v, val)| actual.get(v) == val) && effect.accepts(actual.get(effect.var))
}

/// AC1 ∧ AC2 ∧ AC3, every strict nonempty subset checked.
pub fn is_cause(model: &CausalModel, ctx: &Context, def: DefinitionId, x: &PartialSetting, effect: &Effect) -> Result<bool> {
    if !ac1(model, ctx, x, effect) || ac2(model, ctx, def, x, effect)?.is_none() {
        return Ok(false);
    }
    let xs: Vec<VarId> = x.vars().collect();
    for sub in subsets_by_size(&xs, &[]) {
        if sub.is_empty() || sub.len() == xs.len() {
            continue;
        }
        let xr = x.restrict(|v| sub.contains(&v));
        if ac2(model, ctx, def, &xr, effect)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Re-checks reported AC2 evidence for `X=x` literally.
pub fn verify_evidence(model: &CausalModel, ctx: &Context, def: DefinitionId, x: &PartialSetting, effect: &Effect, evidence: &Evidence) -> Result<bool> {
    let actual = model.solve(ctx);
    let y_star: Value = actual.get(effect.var);
    let w = &evidence.witness;
    if w.contains(effect.var) || w.vars().any(|v| x.contains(v)) {
        return Ok(false);
    }
    let w_actual = w.iter().all(|(v, val)| actual.get(v) == val);
    match def.general_form() {
        Some((kind, necessity)) => {
            let Some(NetworkWitness { values: n }) = &evidence.network else { return Ok(false) };
            let n_vars: Vec<VarId> = n.vars().collect();
            if !w_actual || n_vars.iter().any(|v| x.contains(*v) || w.contains(*v)) {
                return Ok(false);
            }
            let b = sufficient_along(model, &join(x, w), effect.var, y_star, &n_vars, kind, ctx_for(kind, ctx))?;
            if b.as_ref().map(|nw| &nw.values) != Some(n) {
                return Ok(false);
            }
            let p = match (necessity, &evidence.contrast) {
                (Necessity::Contrastive, Some(xp)) if xp != x && xp.vars().eq(x.vars()) => join(xp, w),
                (Necessity::Minimal, None) => w.clone(),
                _ => return Ok(false),
            };
            necessary(model, ctx, &p, effect, &n_vars, kind)
        }
        None => {
            let Some(xp) = &evidence.contrast else { return Ok(false) };
            if xp == x || !xp.vars().eq(x.vars()) || effect_holds(model, ctx, &join(xp, w), effect)? {
                return Ok(false);
            }
            if def == DefinitionId::ModifiedHP {
                return Ok(w_actual);
            }
            let z: Vec<VarId> = model.endogenous().filter(|v| !w.contains(*v)).collect();
            if evidence.partition.as_deref() != Some(&z[..]) {
                return Ok(false);
            }
            hp_b(model, ctx, x, effect, def, w, &z)
        }
    }
}
