use std::collections::BTreeSet;

use super::model::{CausalModel, ModelError, VarId, VarKind};

/// Topological order of the endogenous variables. Models are only ever
/// constructed acyclic, so this cannot fail on a built model; the cycle
/// report surfaces from [`CausalModel::new`] instead.
pub fn check_recursive(model: &CausalModel) -> Vec<VarId> {
    model.order().to_vec()
}

fn endogenous(model: &CausalModel, x: VarId) -> Result<(), ModelError> {
    if x.index() >= model.var_count() {
        return Err(ModelError::UnknownVariable(format!("#{}", x.index())));
    }
    match model.kind(x) {
        VarKind::Endogenous => Ok(()),
        VarKind::Exogenous => Err(ModelError::NotEndogenous(model.name(x).to_string())),
    }
}

/// Endogenous variables that `x`'s equation genuinely depends on.
pub fn parents(model: &CausalModel, x: VarId) -> Result<BTreeSet<VarId>, ModelError> {
    endogenous(model, x)?;
    Ok(model.parents_of(x).iter().copied().collect())
}

pub fn ancestors(model: &CausalModel, x: VarId) -> Result<BTreeSet<VarId>, ModelError> {
    endogenous(model, x)?;
    let mut seen = BTreeSet::new();
    let mut stack: Vec<VarId> = model.parents_of(x).to_vec();
    while let Some(v) = stack.pop() {
        if seen.insert(v) {
            stack.extend_from_slice(model.parents_of(v));
        }
    }
    Ok(seen)
}

pub fn descendants(model: &CausalModel, x: VarId) -> Result<BTreeSet<VarId>, ModelError> {
    endogenous(model, x)?;
    let mut seen = BTreeSet::new();
    // Children appear after their parents in the topological order.
    for &v in model.order() {
        if model.parents_of(v).iter().any(|p| *p == x || seen.contains(p)) {
            seen.insert(v);
        }
    }
    Ok(seen)
}
