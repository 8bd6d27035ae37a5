use std::fmt;

use serde::Serialize;

use super::model::{CausalModel, ModelError, Value, VarId, VarKind};

/// A partial assignment of endogenous variables, kept sorted by variable.
/// Serves as intervention `X <- x` and as the settings `x`, `w`, `n`, `c`, ...
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PartialSetting {
    entries: Vec<(VarId, Value)>,
}

pub type Intervention = PartialSetting;

impl PartialSetting {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Fails on a repeated variable.
    pub fn new(entries: impl IntoIterator<Item = (VarId, Value)>) -> Result<Self, VarId> {
        let mut entries: Vec<_> = entries.into_iter().collect();
        entries.sort_unstable();
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(w[0].0);
            }
        }
        Ok(PartialSetting { entries })
    }

    pub fn single(var: VarId, value: Value) -> Self {
        PartialSetting { entries: vec![(var, value)] }
    }

    /// Parse `("X", "1")` label pairs against a model, checking that targets
    /// are endogenous and values in range.
    pub fn from_labels<'a>(model: &CausalModel, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, ModelError> {
        let mut out = Vec::new();
        for (name, label) in pairs {
            let id = model.lookup(name)?;
            if !model.is_endogenous(id) {
                return Err(ModelError::NotEndogenous(name.to_string()));
            }
            out.push((id, model.value_of(id, label)?));
        }
        Self::new(out).map_err(|v| ModelError::DuplicateAssignment(model.name(v).to_string()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, Value)> + '_ {
        self.entries.iter().copied()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn get(&self, var: VarId) -> Option<Value> {
        self.entries.binary_search_by_key(&var, |e| e.0).ok().map(|i| self.entries[i].1)
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.get(var).is_some()
    }

    /// Union of two settings over disjoint variables.
    pub fn union(&self, other: &PartialSetting) -> Result<Self, VarId> {
        Self::new(self.iter().chain(other.iter()))
    }

    /// Keep only the listed variables.
    pub fn restrict(&self, keep: impl Fn(VarId) -> bool) -> Self {
        PartialSetting { entries: self.entries.iter().copied().filter(|e| keep(e.0)).collect() }
    }

    /// Check that every target is endogenous and every value in range.
    pub fn validate(&self, model: &CausalModel) -> Result<(), ModelError> {
        for (v, x) in self.iter() {
            if v.index() >= model.var_count() {
                return Err(ModelError::UnknownVariable(format!("#{}", v.index())));
            }
            if !model.is_endogenous(v) {
                return Err(ModelError::NotEndogenous(model.name(v).to_string()));
            }
            if x as usize >= model.range(v).len() {
                return Err(ModelError::ValueOutOfRange { var: model.name(v).to_string(), value: x.to_string() });
            }
        }
        Ok(())
    }

    pub fn display<'a>(&'a self, model: &'a CausalModel) -> impl fmt::Display + 'a {
        Labelled { model, entries: &self.entries }
    }
}

struct Labelled<'a> {
    model: &'a CausalModel,
    entries: &'a [(VarId, Value)],
}

impl fmt::Display for Labelled<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("∅");
        }
        for (i, (v, x)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}={}", self.model.name(*v), self.model.label(*v, *x))?;
        }
        Ok(())
    }
}

/// A total assignment of the exogenous variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Context {
    entries: Vec<(VarId, Value)>,
}

impl Context {
    pub fn new(model: &CausalModel, entries: impl IntoIterator<Item = (VarId, Value)>) -> Result<Self, ModelError> {
        let mut entries: Vec<_> = entries.into_iter().collect();
        entries.sort_unstable();
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(ModelError::DuplicateAssignment(model.name(w[0].0).to_string()));
            }
        }
        for &(v, x) in &entries {
            if v.index() >= model.var_count() {
                return Err(ModelError::UnknownVariable(format!("#{}", v.index())));
            }
            if model.kind(v) != VarKind::Exogenous {
                return Err(ModelError::NotExogenous(model.name(v).to_string()));
            }
            if x as usize >= model.range(v).len() {
                return Err(ModelError::ValueOutOfRange { var: model.name(v).to_string(), value: x.to_string() });
            }
        }
        for u in model.exogenous() {
            if entries.binary_search_by_key(&u, |e| e.0).is_err() {
                return Err(ModelError::IncompleteContext(model.name(u).to_string()));
            }
        }
        Ok(Context { entries })
    }

    pub fn from_labels<'a>(model: &CausalModel, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, ModelError> {
        let mut out = Vec::new();
        for (name, label) in pairs {
            let id = model.lookup(name)?;
            out.push((id, model.value_of(id, label)?));
        }
        Context::new(model, out)
    }

    pub fn get(&self, var: VarId) -> Option<Value> {
        self.entries.binary_search_by_key(&var, |e| e.0).ok().map(|i| self.entries[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, Value)> + '_ {
        self.entries.iter().copied()
    }

    /// Every context of the model, lexicographic over declared variable order
    /// (first exogenous variable varies slowest).
    pub fn all(model: &CausalModel) -> Vec<Context> {
        let exo: Vec<VarId> = model.exogenous().collect();
        let mut out = vec![Context { entries: Vec::with_capacity(exo.len()) }];
        for &u in &exo {
            let n = model.range(u).len() as Value;
            out = out
                .into_iter()
                .flat_map(|c| {
                    (0..n).map(move |x| {
                        let mut c = c.clone();
                        c.entries.push((u, x));
                        c
                    })
                })
                .collect();
        }
        out
    }

    pub fn display<'a>(&'a self, model: &'a CausalModel) -> impl fmt::Display + 'a {
        Labelled { model, entries: &self.entries }
    }
}

/// The unique solution of a model in a context; stores every variable
/// (exogenous values copied from the context).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct World {
    values: Vec<Value>,
}

impl World {
    pub fn get(&self, var: VarId) -> Value {
        self.values[var.index()]
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    /// The world's values on `vars`.
    pub fn project(&self, vars: impl IntoIterator<Item = VarId>) -> PartialSetting {
        PartialSetting::new(vars.into_iter().map(|v| (v, self.get(v)))).expect("distinct variables")
    }

    /// Re-evaluate each equation (except intervened ones) against the world.
    pub fn satisfies(&self, model: &CausalModel, iv: &Intervention) -> bool {
        model.endogenous().all(|v| match iv.get(v) {
            Some(x) => self.get(v) == x,
            None => model.eval_var(v, &self.values) == self.get(v),
        })
    }

    pub fn display<'a>(&'a self, model: &'a CausalModel) -> impl fmt::Display + 'a {
        WorldDisplay { model, world: self }
    }
}

struct WorldDisplay<'a> {
    model: &'a CausalModel,
    world: &'a World,
}

impl fmt::Display for WorldDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let endo: Vec<VarId> = self.model.endogenous().collect();
        write!(f, "{}", self.world.project(endo).display(self.model))
    }
}

impl CausalModel {
    pub fn solve(&self, u: &Context) -> World {
        self.solve_with(u, &PartialSetting::empty())
    }

    /// Solution of `M_{X<-x}` in context `u`, without building the submodel.
    pub fn solve_with(&self, u: &Context, iv: &Intervention) -> World {
        let mut values = vec![0; self.var_count()];
        self.solve_into(u, iv, &mut values);
        World { values }
    }

    pub(crate) fn solve_into(&self, u: &Context, iv: &Intervention, values: &mut [Value]) {
        for (v, x) in u.iter() {
            values[v.index()] = x;
        }
        for &v in self.order() {
            values[v.index()] = match iv.get(v) {
                Some(x) => x,
                None => self.eval_var(v, values),
            };
        }
    }

    /// The submodel `M_{X<-x}`: intervened equations replaced by constants.
    pub fn intervene(&self, iv: &Intervention) -> Result<CausalModel, ModelError> {
        iv.validate(self)?;
        let equations = self
            .equations()
            .iter()
            .map(|eq| {
                let body = match iv.get(eq.target) {
                    Some(x) => super::Expr::Atom(self.label(eq.target, x).to_string()),
                    None => eq.body.clone(),
                };
                (self.name(eq.target).to_string(), body)
            })
            .collect();
        CausalModel::new(self.variables().to_vec(), equations)
    }

    /// Build a context from `(name, label)` pairs.
    pub fn context<'a>(&self, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Context, ModelError> {
        Context::from_labels(self, pairs)
    }

    /// Build a partial setting from `(name, label)` pairs.
    pub fn setting<'a>(&self, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<PartialSetting, ModelError> {
        PartialSetting::from_labels(self, pairs)
    }
}
