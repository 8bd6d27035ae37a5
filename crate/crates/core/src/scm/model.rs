use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::expr::{compile, CompiledEq, Expr, Scope};

/// Index into a variable's range.
pub type Value = u8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VarId(pub(crate) u32);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Exogenous,
    Endogenous,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("value `{value}` is not in the range of `{var}`")]
    ValueOutOfRange { var: String, value: String },
    #[error("invalid range for `{var}`: {reason}")]
    InvalidRange { var: String, reason: String },
    #[error("dependency cycle: {}", .0.join(" -> "))]
    CyclicModel(Vec<String>),
    #[error("endogenous variable `{0}` has no equation")]
    MissingEquation(String),
    #[error("`{0}` has more than one equation")]
    DuplicateEquation(String),
    #[error("`{0}` is exogenous and cannot have an equation")]
    ExogenousEquation(String),
    #[error("`{0}` is not endogenous")]
    NotEndogenous(String),
    #[error("`{0}` is not exogenous")]
    NotExogenous(String),
    #[error("equation for `{var}`: {message}")]
    TypeError { var: String, message: String },
    #[error("context does not assign exogenous variable `{0}`")]
    IncompleteContext(String),
    #[error("model is not normalized: exogenous `{0}` feeds a non-root equation")]
    NotNormalized(String),
    #[error("`{0}` is assigned twice")]
    DuplicateAssignment(String),
    #[error("malformed formula: {0}")]
    MalformedFormula(String),
}

/// Ordered value labels; at least two, all distinct.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Range(Vec<String>);

impl Range {
    pub fn new<I, S>(labels: I) -> Result<Self, String>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err("a range needs at least two values".into());
        }
        if labels.len() > Value::MAX as usize {
            return Err(format!("at most {} values are supported", Value::MAX));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(format!("value `{l}` listed twice"));
            }
        }
        Ok(Range(labels))
    }

    /// `{0, 1, ..., n-1}`.
    pub fn numeric(n: usize) -> Self {
        Range::new((0..n).map(|i| i.to_string())).expect("numeric range of size >= 2")
    }

    pub fn binary() -> Self {
        Range::numeric(2)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn label(&self, v: Value) -> &str {
        &self.0[v as usize]
    }

    pub fn index_of(&self, label: &str) -> Option<Value> {
        self.0.iter().position(|l| l == label).map(|i| i as Value)
    }

    pub fn values(&self) -> impl Iterator<Item = Value> {
        0..self.0.len() as Value
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub range: Range,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub target: VarId,
    pub body: Expr,
}

/// A finite, strongly recursive structural causal model.
///
/// Construction validates everything: names resolve, every endogenous
/// variable has exactly one well-typed equation, and the (genuine) parent
/// relation is acyclic. Instances are immutable afterwards.
#[derive(Clone, Debug)]
pub struct CausalModel {
    vars: Vec<Variable>,
    by_name: HashMap<String, VarId>,
    equations: Vec<Equation>,
    eq_of: Vec<Option<usize>>,
    compiled: Vec<Option<CompiledEq>>,
    parents: Vec<Vec<VarId>>,
    exo_inputs: Vec<Vec<VarId>>,
    order: Vec<VarId>,
}

impl PartialEq for CausalModel {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.equations == other.equations
    }
}

impl Eq for CausalModel {}

struct SigScope<'a> {
    vars: &'a [Variable],
    by_name: &'a HashMap<String, VarId>,
}

impl Scope for SigScope<'_> {
    fn lookup(&self, name: &str) -> Option<(VarId, &Range)> {
        self.by_name.get(name).map(|id| (*id, &self.vars[id.index()].range))
    }
}

impl CausalModel {
    /// `equations` are `(target name, body)` pairs in declaration order.
    pub fn new(vars: Vec<Variable>, equations: Vec<(String, Expr)>) -> Result<Self, ModelError> {
        let mut by_name = HashMap::with_capacity(vars.len());
        for (i, v) in vars.iter().enumerate() {
            if by_name.insert(v.name.clone(), VarId(i as u32)).is_some() {
                return Err(ModelError::DuplicateName(v.name.clone()));
            }
        }
        // A label spelled like a variable would be read as that variable.
        for v in &vars {
            if let Some(l) = v.range.labels().iter().find(|l| by_name.contains_key(l.as_str())) {
                return Err(ModelError::DuplicateName(l.clone()));
            }
        }
        let n = vars.len();
        let mut eq_of = vec![None; n];
        let mut eqs = Vec::with_capacity(equations.len());
        let mut compiled = vec![None; n];
        let scope = SigScope { vars: &vars, by_name: &by_name };
        for (target, body) in equations {
            let id = *by_name.get(&target).ok_or_else(|| ModelError::UnknownVariable(target.clone()))?;
            if vars[id.index()].kind == VarKind::Exogenous {
                return Err(ModelError::ExogenousEquation(target));
            }
            if eq_of[id.index()].is_some() {
                return Err(ModelError::DuplicateEquation(target));
            }
            compiled[id.index()] = Some(compile(&scope, &target, &vars[id.index()].range, &body)?);
            eq_of[id.index()] = Some(eqs.len());
            eqs.push(Equation { target: id, body });
        }
        for (i, v) in vars.iter().enumerate() {
            if v.kind == VarKind::Endogenous && eq_of[i].is_none() {
                return Err(ModelError::MissingEquation(v.name.clone()));
            }
        }

        let mut parents = vec![Vec::new(); n];
        let mut exo_inputs = vec![Vec::new(); n];
        for (i, c) in compiled.iter().enumerate() {
            let Some(c) = c else { continue };
            for slot in c.live_slots() {
                let r = c.refs[slot];
                match vars[r.index()].kind {
                    VarKind::Endogenous => parents[i].push(r),
                    VarKind::Exogenous => exo_inputs[i].push(r),
                }
            }
            parents[i].sort();
            exo_inputs[i].sort();
        }

        let mut model = CausalModel { vars, by_name, equations: eqs, eq_of, compiled, parents, exo_inputs, order: Vec::new() };
        model.order = model.topological_order()?;
        Ok(model)
    }

    pub fn builder() -> ModelBuilder {
        ModelBuilder::default()
    }

    /// Kahn's algorithm over genuine parents, ties broken by declaration order.
    fn topological_order(&self) -> Result<Vec<VarId>, ModelError> {
        let endo: Vec<VarId> = self.endogenous().collect();
        let mut indeg = vec![0usize; self.vars.len()];
        let mut children = vec![Vec::new(); self.vars.len()];
        for &v in &endo {
            for &p in &self.parents[v.index()] {
                indeg[v.index()] += 1;
                children[p.index()].push(v);
            }
        }
        let mut ready: std::collections::BTreeSet<VarId> = endo.iter().copied().filter(|v| indeg[v.index()] == 0).collect();
        let mut order = Vec::with_capacity(endo.len());
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &children[v.index()] {
                indeg[c.index()] -= 1;
                if indeg[c.index()] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() < endo.len() {
            return Err(ModelError::CyclicModel(self.find_cycle(&indeg)));
        }
        Ok(order)
    }

    /// Some cycle among the variables Kahn could not place, rotated to start
    /// at its earliest-declared member.
    fn find_cycle(&self, indeg: &[usize]) -> Vec<String> {
        let stuck: Vec<VarId> = self.endogenous().filter(|v| indeg[v.index()] > 0).collect();
        // Walk backwards along stuck parents until a variable repeats.
        let mut path = vec![stuck[0]];
        loop {
            let cur = *path.last().unwrap();
            let next = self.parents[cur.index()].iter().copied().find(|p| indeg[p.index()] > 0).expect("stuck variable has a stuck parent");
            if let Some(pos) = path.iter().position(|v| *v == next) {
                let mut cycle: Vec<VarId> = path[pos..].to_vec();
                cycle.reverse(); // parent -> child direction
                let start = cycle.iter().enumerate().min_by_key(|(_, v)| **v).map(|(i, _)| i).unwrap();
                cycle.rotate_left(start);
                return cycle.iter().map(|v| self.name(*v).to_string()).collect();
            }
            path.push(next);
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.vars[id.index()]
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.vars[id.index()].name
    }

    pub fn range(&self, id: VarId) -> &Range {
        &self.vars[id.index()].range
    }

    pub fn kind(&self, id: VarId) -> VarKind {
        self.vars[id.index()].kind
    }

    pub fn is_endogenous(&self, id: VarId) -> bool {
        self.kind(id) == VarKind::Endogenous
    }

    pub fn lookup(&self, name: &str) -> Result<VarId, ModelError> {
        self.by_name.get(name).copied().ok_or_else(|| ModelError::UnknownVariable(name.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.vars.len() as u32).map(VarId)
    }

    pub fn exogenous(&self) -> impl Iterator<Item = VarId> + '_ {
        self.ids().filter(|v| !self.is_endogenous(*v))
    }

    /// Endogenous variables in declaration order.
    pub fn endogenous(&self) -> impl Iterator<Item = VarId> + '_ {
        self.ids().filter(|v| self.is_endogenous(*v))
    }

    /// Equations in declaration order.
    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn equation(&self, id: VarId) -> Option<&Equation> {
        self.eq_of[id.index()].map(|i| &self.equations[i])
    }

    /// Topological order of the endogenous variables.
    pub fn order(&self) -> &[VarId] {
        &self.order
    }

    /// Endogenous variables the equation of `id` genuinely depends on.
    pub fn parents_of(&self, id: VarId) -> &[VarId] {
        &self.parents[id.index()]
    }

    /// Exogenous variables the equation of `id` genuinely depends on.
    pub fn exogenous_inputs_of(&self, id: VarId) -> &[VarId] {
        &self.exo_inputs[id.index()]
    }

    /// Label to value index, with the range check.
    pub fn value_of(&self, id: VarId, label: &str) -> Result<Value, ModelError> {
        self.range(id).index_of(label).ok_or_else(|| ModelError::ValueOutOfRange { var: self.name(id).to_string(), value: label.to_string() })
    }

    pub fn label(&self, id: VarId, v: Value) -> &str {
        self.range(id).label(v)
    }

    /// Solve one equation against a full value vector (indexed by `VarId`).
    #[inline]
    pub(crate) fn eval_var(&self, id: VarId, values: &[Value]) -> Value {
        self.compiled[id.index()].as_ref().expect("endogenous").eval(values)
    }
}

/// Incremental construction; errors surface from [`ModelBuilder::build`].
#[derive(Default, Clone, Debug)]
pub struct ModelBuilder {
    vars: Vec<Variable>,
    equations: Vec<(String, Expr)>,
    error: Option<ModelError>,
}

impl ModelBuilder {
    fn var<I, S>(mut self, name: &str, kind: VarKind, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        match Range::new(labels) {
            Ok(range) => self.vars.push(Variable { name: name.to_string(), kind, range }),
            Err(reason) => {
                self.error.get_or_insert(ModelError::InvalidRange { var: name.to_string(), reason });
            }
        }
        self
    }

    pub fn exo<I, S>(self, name: &str, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.var(name, VarKind::Exogenous, labels)
    }

    pub fn endo<I, S>(self, name: &str, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.var(name, VarKind::Endogenous, labels)
    }

    /// Binary endogenous variable.
    pub fn bool(self, name: &str) -> Self {
        self.endo(name, ["0", "1"])
    }

    /// Binary exogenous variable `U_<name>` plus a root `name := U_<name>`.
    pub fn root(self, name: &str) -> Self {
        let u = format!("U_{name}");
        self.exo(&u, ["0", "1"]).bool(name).equation(name, Expr::Atom(u))
    }

    pub fn equation(mut self, target: &str, body: Expr) -> Self {
        self.equations.push((target.to_string(), body));
        self
    }

    pub fn build(self) -> Result<CausalModel, ModelError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        CausalModel::new(self.vars, self.equations)
    }
}
