use super::model::{CausalModel, ModelError, Value, VarId};
use super::setting::{Context, Intervention, PartialSetting};

/// Causal formulas: boolean combinations of atoms `X=x`, optionally under a
/// single outermost intervention `[Y <- y]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CausalFormula {
    Atom(VarId, Value),
    Not(Box<CausalFormula>),
    And(Vec<CausalFormula>),
    Or(Vec<CausalFormula>),
    Interventional(Intervention, Box<CausalFormula>),
}

impl CausalFormula {
    pub fn atom(var: VarId, value: Value) -> Self {
        CausalFormula::Atom(var, value)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: CausalFormula) -> Self {
        CausalFormula::Not(Box::new(f))
    }

    pub fn under(iv: Intervention, f: CausalFormula) -> Self {
        CausalFormula::Interventional(iv, Box::new(f))
    }

    /// `Y ∈ accepted` as a disjunction of atoms.
    pub fn one_of(var: VarId, accepted: &[Value]) -> Self {
        match accepted {
            [v] => CausalFormula::Atom(var, *v),
            _ => CausalFormula::Or(accepted.iter().map(|v| CausalFormula::Atom(var, *v)).collect()),
        }
    }

    /// Reject interventions anywhere but the outermost position, endogenous
    /// violations, and out-of-range values.
    pub fn validate(&self, model: &CausalModel) -> Result<(), ModelError> {
        match self {
            CausalFormula::Interventional(iv, body) => {
                iv.validate(model)?;
                body.validate_plain(model)
            }
            other => other.validate_plain(model),
        }
    }

    fn validate_plain(&self, model: &CausalModel) -> Result<(), ModelError> {
        match self {
            CausalFormula::Atom(v, x) => {
                if v.index() >= model.var_count() {
                    return Err(ModelError::MalformedFormula(format!("unknown variable #{}", v.index())));
                }
                if *x as usize >= model.range(*v).len() {
                    return Err(ModelError::ValueOutOfRange { var: model.name(*v).to_string(), value: x.to_string() });
                }
                Ok(())
            }
            CausalFormula::Not(f) => f.validate_plain(model),
            CausalFormula::And(fs) | CausalFormula::Or(fs) => fs.iter().try_for_each(|f| f.validate_plain(model)),
            CausalFormula::Interventional(..) => Err(ModelError::MalformedFormula("interventions may only appear as the outermost prefix".into())),
        }
    }

    fn eval(&self, values: &[Value]) -> bool {
        match self {
            CausalFormula::Atom(v, x) => values[v.index()] == *x,
            CausalFormula::Not(f) => !f.eval(values),
            CausalFormula::And(fs) => fs.iter().all(|f| f.eval(values)),
            CausalFormula::Or(fs) => fs.iter().any(|f| f.eval(values)),
            CausalFormula::Interventional(..) => unreachable!("validated"),
        }
    }
}

/// `(M, u) ⊨ f`.
pub fn holds(model: &CausalModel, u: &Context, f: &CausalFormula) -> Result<bool, ModelError> {
    f.validate(model)?;
    let (iv, body) = match f {
        CausalFormula::Interventional(iv, body) => (iv.clone(), body.as_ref()),
        other => (PartialSetting::empty(), other),
    };
    Ok(body.eval(model.solve_with(u, &iv).values()))
}
