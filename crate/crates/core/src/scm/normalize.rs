use std::collections::BTreeSet;

use super::expr::Expr;
use super::model::{CausalModel, ModelError, VarId, VarKind, Variable};

/// Whether `id`'s equation has the root shape `V = U`.
fn root_source(model: &CausalModel, id: VarId) -> Option<VarId> {
    match &model.equation(id)?.body {
        Expr::Atom(name) => model.lookup(name).ok().filter(|u| model.kind(*u) == VarKind::Exogenous),
        _ => None,
    }
}

/// Exogenous variables mentioned by some equation that is not in root form.
fn offending(model: &CausalModel) -> Vec<VarId> {
    let mut out = BTreeSet::new();
    for eq in model.equations() {
        if root_source(model, eq.target).is_some() {
            continue;
        }
        for name in eq.body.names() {
            if let Ok(u) = model.lookup(name) {
                if model.kind(u) == VarKind::Exogenous {
                    out.insert(u);
                }
            }
        }
    }
    out.into_iter().collect()
}

pub fn is_normalized(model: &CausalModel) -> bool {
    offending(model).is_empty()
}

/// Rewrite so exogenous variables only appear in equations `V = U`: every
/// non-root use of `U` is routed through one fresh variable `V_U`.
pub fn normalize_exogenous(model: &CausalModel) -> CausalModel {
    let bad = offending(model);
    if bad.is_empty() {
        return model.clone();
    }
    let mut vars: Vec<Variable> = model.variables().to_vec();
    let mut equations: Vec<(String, Expr)> = model.equations().iter().map(|eq| (model.name(eq.target).to_string(), eq.body.clone())).collect();
    let is_root: Vec<bool> = model.equations().iter().map(|eq| root_source(model, eq.target).is_some()).collect();
    let mut taken: BTreeSet<String> = vars.iter().map(|v| v.name.clone()).collect();
    for v in &vars {
        taken.extend(v.range.labels().iter().cloned());
    }
    for u in bad {
        let uname = model.name(u).to_string();
        let base = format!("V_{uname}");
        let mut fresh = base.clone();
        let mut k = 2;
        while taken.contains(&fresh) {
            fresh = format!("{base}_{k}");
            k += 1;
        }
        taken.insert(fresh.clone());
        for (i, (_, body)) in equations.iter_mut().enumerate() {
            if !is_root[i] {
                *body = body.rename(&uname, &fresh);
            }
        }
        vars.push(Variable { name: fresh.clone(), kind: VarKind::Endogenous, range: model.range(u).clone() });
        equations.push((fresh, Expr::Atom(uname)));
    }
    CausalModel::new(vars, equations).expect("normalization preserves validity")
}

/// Endogenous variables with equation `V = U`.
pub fn root_variables(model: &CausalModel) -> Result<BTreeSet<VarId>, ModelError> {
    if let Some(u) = offending(model).first() {
        return Err(ModelError::NotNormalized(model.name(*u).to_string()));
    }
    let roots: BTreeSet<VarId> = model.endogenous().filter(|v| root_source(model, *v).is_some()).collect();
    if roots.is_empty() && model.exogenous().next().is_some() {
        return Err(ModelError::NotNormalized("no equation has root form".into()));
    }
    Ok(roots)
}
