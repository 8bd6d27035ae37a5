use std::fmt;

use super::model::{ModelError, Range, Value, VarId};

/// Equation bodies as written. Identifiers stay unresolved until the model is
/// compiled: a name is a variable reference if a variable of that name exists,
/// otherwise it is a value label of whatever range the context expects.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Atom(String),
    Cmp { lhs: String, negated: bool, rhs: String },
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    If { cond: Box<Expr>, then: Box<Expr>, otherwise: Box<Expr> },
    Case { arms: Vec<(Expr, Expr)>, default: Box<Expr> },
}

impl Expr {
    pub fn atom(name: impl Into<String>) -> Self {
        Expr::Atom(name.into())
    }

    pub fn eq(lhs: impl Into<String>, rhs: impl Into<String>) -> Self {
        Expr::Cmp { lhs: lhs.into(), negated: false, rhs: rhs.into() }
    }

    pub fn ne(lhs: impl Into<String>, rhs: impl Into<String>) -> Self {
        Expr::Cmp { lhs: lhs.into(), negated: true, rhs: rhs.into() }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Self {
        Expr::Not(Box::new(e))
    }

    pub fn and(items: impl IntoIterator<Item = Expr>) -> Self {
        Expr::And(items.into_iter().collect())
    }

    pub fn or(items: impl IntoIterator<Item = Expr>) -> Self {
        Expr::Or(items.into_iter().collect())
    }

    pub fn ite(cond: Expr, then: Expr, otherwise: Expr) -> Self {
        Expr::If { cond: Box::new(cond), then: Box::new(then), otherwise: Box::new(otherwise) }
    }

    /// Every identifier mentioned, in order of first appearance.
    pub fn names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names<'a>(&'a self, out: &mut Vec<&'a str>) {
        let mut push = |s: &'a str| {
            if !out.contains(&s) {
                out.push(s);
            }
        };
        match self {
            Expr::Atom(a) => push(a),
            Expr::Cmp { lhs, rhs, .. } => {
                push(lhs);
                push(rhs);
            }
            Expr::Not(e) => e.collect_names(out),
            Expr::And(es) | Expr::Or(es) => es.iter().for_each(|e| e.collect_names(out)),
            Expr::If { cond, then, otherwise } => {
                cond.collect_names(out);
                then.collect_names(out);
                otherwise.collect_names(out);
            }
            Expr::Case { arms, default } => {
                for (g, v) in arms {
                    g.collect_names(out);
                    v.collect_names(out);
                }
                default.collect_names(out);
            }
        }
    }

    /// Rename every occurrence of identifier `from` (variable positions and
    /// comparison operands alike).
    pub fn rename(&self, from: &str, to: &str) -> Expr {
        let r = |s: &String| if s == from { to.to_string() } else { s.clone() };
        match self {
            Expr::Atom(a) => Expr::Atom(r(a)),
            Expr::Cmp { lhs, negated, rhs } => Expr::Cmp { lhs: r(lhs), negated: *negated, rhs: r(rhs) },
            Expr::Not(e) => Expr::Not(Box::new(e.rename(from, to))),
            Expr::And(es) => Expr::And(es.iter().map(|e| e.rename(from, to)).collect()),
            Expr::Or(es) => Expr::Or(es.iter().map(|e| e.rename(from, to)).collect()),
            Expr::If { cond, then, otherwise } => Expr::If {
                cond: Box::new(cond.rename(from, to)),
                then: Box::new(then.rename(from, to)),
                otherwise: Box::new(otherwise.rename(from, to)),
            },
            Expr::Case { arms, default } => Expr::Case {
                arms: arms.iter().map(|(g, v)| (g.rename(from, to), v.rename(from, to))).collect(),
                default: Box::new(default.rename(from, to)),
            },
        }
    }
}

/// Concrete syntax, shared with the DSL serializer. Operator precedence is
/// `!` > `&` > `|`; `if`/`case` extend as far right as possible, so they are
/// parenthesized whenever something could follow them.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, Prec::Top)
    }
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Prec {
    Top,
    Or,
    And,
    Unary,
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, ctx: Prec) -> fmt::Result {
    let own = match e {
        Expr::If { .. } | Expr::Case { .. } => Prec::Top,
        Expr::Or(_) => Prec::Or,
        Expr::And(_) => Prec::And,
        _ => Prec::Unary,
    };
    let paren = own < ctx || matches!(e, Expr::Or(v) | Expr::And(v) if v.len() < 2);
    if paren {
        f.write_str("(")?;
    }
    match e {
        Expr::Atom(a) => f.write_str(a)?,
        Expr::Cmp { lhs, negated, rhs } => write!(f, "{lhs}{}{rhs}", if *negated { "!=" } else { "=" })?,
        Expr::Not(inner) => {
            f.write_str("!")?;
            write_expr(f, inner, Prec::Unary)?;
        }
        Expr::And(es) | Expr::Or(es) => {
            let (sep, sub) = if matches!(e, Expr::And(_)) { (" & ", Prec::Unary) } else { (" | ", Prec::And) };
            if es.is_empty() {
                // Not producible by the parser; keep it printable anyway.
                f.write_str(if matches!(e, Expr::And(_)) { "&" } else { "|" })?;
            }
            for (i, sub_e) in es.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write_expr(f, sub_e, sub)?;
            }
        }
        Expr::If { cond, then, otherwise } => {
            f.write_str("if ")?;
            write_expr(f, cond, Prec::Or)?;
            f.write_str(" then ")?;
            write_expr(f, then, Prec::Or)?;
            f.write_str(" else ")?;
            write_expr(f, otherwise, Prec::Top)?;
        }
        Expr::Case { arms, default } => {
            f.write_str("case ")?;
            for (g, v) in arms {
                write_expr(f, g, Prec::Or)?;
                f.write_str(" -> ")?;
                write_expr(f, v, Prec::Or)?;
                f.write_str("; ")?;
            }
            f.write_str("default -> ")?;
            write_expr(f, default, Prec::Top)?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Compilation

/// How the compiler sees the signature.
pub(crate) trait Scope {
    fn lookup(&self, name: &str) -> Option<(VarId, &Range)>;
}

#[derive(Clone, Debug)]
enum BoolNode {
    Test { slot: usize, accept: Vec<bool> },
    /// Two variables compared by label.
    Same { a: usize, b: usize, width: usize, table: Vec<bool> },
    Not(Box<BoolNode>),
    And(Vec<BoolNode>),
    Or(Vec<BoolNode>),
    If(Box<BoolNode>, Box<BoolNode>, Box<BoolNode>),
    Case(Vec<(BoolNode, BoolNode)>, Box<BoolNode>),
}

#[derive(Clone, Debug)]
enum ValNode {
    Const(Value),
    Map { slot: usize, map: Vec<Value> },
    FromBool { test: BoolNode, yes: Value, no: Value },
    If(BoolNode, Box<ValNode>, Box<ValNode>),
    Case(Vec<(BoolNode, ValNode)>, Box<ValNode>),
}

impl BoolNode {
    fn eval(&self, v: &[Value]) -> bool {
        match self {
            BoolNode::Test { slot, accept } => accept[v[*slot] as usize],
            BoolNode::Same { a, b, width, table } => table[v[*a] as usize * width + v[*b] as usize],
            BoolNode::Not(e) => !e.eval(v),
            BoolNode::And(es) => es.iter().all(|e| e.eval(v)),
            BoolNode::Or(es) => es.iter().any(|e| e.eval(v)),
            BoolNode::If(c, t, e) => {
                if c.eval(v) {
                    t.eval(v)
                } else {
                    e.eval(v)
                }
            }
            BoolNode::Case(arms, d) => arms.iter().find(|(g, _)| g.eval(v)).map_or_else(|| d.eval(v), |(_, r)| r.eval(v)),
        }
    }
}

impl ValNode {
    fn eval(&self, v: &[Value]) -> Value {
        match self {
            ValNode::Const(c) => *c,
            ValNode::Map { slot, map } => map[v[*slot] as usize],
            ValNode::FromBool { test, yes, no } => {
                if test.eval(v) {
                    *yes
                } else {
                    *no
                }
            }
            ValNode::If(c, t, e) => {
                if c.eval(v) {
                    t.eval(v)
                } else {
                    e.eval(v)
                }
            }
            ValNode::Case(arms, d) => arms.iter().find(|(g, _)| g.eval(v)).map_or_else(|| d.eval(v), |(_, r)| r.eval(v)),
        }
    }
}

/// Largest lookup table built for a single equation.
const TABLE_CAP: usize = 1 << 20;

/// An equation ready for evaluation: either a dense table over the referenced
/// variables or, when that would be too large, the typed tree.
#[derive(Clone, Debug)]
pub(crate) struct CompiledEq {
    pub(crate) refs: Vec<VarId>,
    pub(crate) radices: Vec<usize>,
    strides: Vec<usize>,
    pub(crate) table: Option<Vec<Value>>,
    tree: ValNode,
}

impl CompiledEq {
    #[inline]
    pub(crate) fn eval(&self, values: &[Value]) -> Value {
        match &self.table {
            Some(t) => {
                let mut idx = 0;
                for (r, s) in self.refs.iter().zip(&self.strides) {
                    idx += values[r.index()] as usize * s;
                }
                t[idx]
            }
            None => {
                let local: Vec<Value> = self.refs.iter().map(|r| values[r.index()]).collect();
                self.tree.eval(&local)
            }
        }
    }

    /// Value for a local assignment given in `refs` order.
    pub(crate) fn eval_local(&self, local: &[Value]) -> Value {
        match &self.table {
            Some(t) => t[local.iter().zip(&self.strides).map(|(v, s)| *v as usize * s).sum::<usize>()],
            None => self.tree.eval(local),
        }
    }

    /// Number of local assignments, if small enough to enumerate.
    pub(crate) fn domain_size(&self) -> Option<usize> {
        self.radices.iter().try_fold(1usize, |acc, r| acc.checked_mul(*r)).filter(|n| *n <= TABLE_CAP)
    }

    /// Slots whose value genuinely matters for some assignment of the others.
    pub(crate) fn live_slots(&self) -> Vec<usize> {
        let Some(total) = self.domain_size() else {
            return (0..self.refs.len()).collect();
        };
        let mut live = vec![false; self.refs.len()];
        let mut local = vec![0 as Value; self.refs.len()];
        for idx in 0..total {
            decode(idx, &self.radices, &mut local);
            let out = self.eval_local(&local);
            for slot in 0..self.refs.len() {
                if live[slot] || local[slot] != 0 {
                    continue;
                }
                // Vary this slot from 0 upward; each (others) assignment is visited once.
                for alt in 1..self.radices[slot] {
                    local[slot] = alt as Value;
                    if self.eval_local(&local) != out {
                        live[slot] = true;
                        break;
                    }
                }
                local[slot] = 0;
            }
            if live.iter().all(|b| *b) {
                break;
            }
        }
        (0..self.refs.len()).filter(|i| live[*i]).collect()
    }
}

/// Mixed-radix decode, first digit most significant.
pub(crate) fn decode(mut idx: usize, radices: &[usize], out: &mut [Value]) {
    for i in (0..radices.len()).rev() {
        out[i] = (idx % radices[i]) as Value;
        idx /= radices[i];
    }
}

struct Compiler<'a, S: Scope> {
    scope: &'a S,
    target: &'a str,
    target_range: &'a Range,
    refs: Vec<VarId>,
    radices: Vec<usize>,
}

pub(crate) fn compile<S: Scope>(scope: &S, target: &str, target_range: &Range, body: &Expr) -> Result<CompiledEq, ModelError> {
    let mut c = Compiler { scope, target, target_range, refs: Vec::new(), radices: Vec::new() };
    let tree = c.value(body)?;
    let mut strides = vec![0; c.refs.len()];
    let mut acc = 1usize;
    let mut fits = true;
    for i in (0..c.refs.len()).rev() {
        strides[i] = acc;
        match acc.checked_mul(c.radices[i]) {
            Some(n) if n <= TABLE_CAP => acc = n,
            _ => {
                fits = false;
                break;
            }
        }
    }
    let mut eq = CompiledEq { refs: c.refs, radices: c.radices, strides, table: None, tree };
    if fits {
        let mut local = vec![0 as Value; eq.refs.len()];
        let table = (0..acc)
            .map(|idx| {
                decode(idx, &eq.radices, &mut local);
                eq.tree.eval(&local)
            })
            .collect();
        eq.table = Some(table);
    }
    Ok(eq)
}

fn looks_like_name(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
}

impl<'a, S: Scope> Compiler<'a, S> {
    fn type_error(&self, message: impl Into<String>) -> ModelError {
        ModelError::TypeError { var: self.target.to_string(), message: message.into() }
    }

    fn slot(&mut self, id: VarId, range: &Range) -> usize {
        if let Some(i) = self.refs.iter().position(|r| *r == id) {
            return i;
        }
        self.refs.push(id);
        self.radices.push(range.len());
        self.refs.len() - 1
    }

    fn label_in(&self, label: &str, var: &str, range: &Range) -> Result<Value, ModelError> {
        range.index_of(label).ok_or_else(|| {
            if looks_like_name(label) {
                ModelError::UnknownVariable(label.to_string())
            } else {
                ModelError::ValueOutOfRange { var: var.to_string(), value: label.to_string() }
            }
        })
    }

    fn target_bool_labels(&self) -> Result<(Value, Value), ModelError> {
        match (self.target_range.index_of("1"), self.target_range.index_of("0")) {
            (Some(t), Some(f)) => Ok((t, f)),
            _ => Err(self.type_error("a boolean expression needs a target range containing 0 and 1")),
        }
    }

    fn value(&mut self, e: &Expr) -> Result<ValNode, ModelError> {
        Ok(match e {
            Expr::Atom(name) => match self.scope.lookup(name) {
                Some((id, range)) => {
                    let map = range
                        .labels()
                        .iter()
                        .map(|l| {
                            self.target_range.index_of(l).ok_or_else(|| {
                                self.type_error(format!("value {l} of {name} is not in the range of {}", self.target))
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    let range = range.clone();
                    ValNode::Map { slot: self.slot(id, &range), map }
                }
                None => ValNode::Const(self.label_in(name, self.target, self.target_range)?),
            },
            Expr::If { cond, then, otherwise } => {
                ValNode::If(self.boolean(cond)?, Box::new(self.value(then)?), Box::new(self.value(otherwise)?))
            }
            Expr::Case { arms, default } => {
                let arms = arms.iter().map(|(g, v)| Ok((self.boolean(g)?, self.value(v)?))).collect::<Result<_, ModelError>>()?;
                ValNode::Case(arms, Box::new(self.value(default)?))
            }
            Expr::Cmp { .. } | Expr::Not(_) | Expr::And(_) | Expr::Or(_) => {
                let (yes, no) = self.target_bool_labels()?;
                ValNode::FromBool { test: self.boolean(e)?, yes, no }
            }
        })
    }

    fn boolean(&mut self, e: &Expr) -> Result<BoolNode, ModelError> {
        Ok(match e {
            Expr::Atom(name) => {
                let Some((id, range)) = self.scope.lookup(name) else {
                    return Err(if looks_like_name(name) {
                        ModelError::UnknownVariable(name.clone())
                    } else {
                        self.type_error(format!("literal {name} used as a condition"))
                    });
                };
                if range.len() != 2 || range.index_of("0").is_none() || range.index_of("1").is_none() {
                    return Err(self.type_error(format!("{name} is used as a condition but its range is not {{0,1}}")));
                }
                let one = range.index_of("1").unwrap() as usize;
                let accept = (0..2).map(|i| i == one).collect();
                let range = range.clone();
                BoolNode::Test { slot: self.slot(id, &range), accept }
            }
            Expr::Cmp { lhs, negated, rhs } => {
                let node = match (self.scope.lookup(lhs), self.scope.lookup(rhs)) {
                    (Some((a, ra)), Some((b, rb))) => {
                        let (ra, rb) = (ra.clone(), rb.clone());
                        let width = rb.len();
                        let table = ra.labels().iter().flat_map(|la| rb.labels().iter().map(move |lb| la == lb)).collect();
                        BoolNode::Same { a: self.slot(a, &ra), b: self.slot(b, &rb), width, table }
                    }
                    (Some((id, range)), None) | (None, Some((id, range))) => {
                        let (var, lit) = if self.scope.lookup(lhs).is_some() { (lhs, rhs) } else { (rhs, lhs) };
                        let range = range.clone();
                        let v = self.label_in(lit, var, &range)?;
                        let accept = (0..range.len()).map(|i| i == v as usize).collect();
                        BoolNode::Test { slot: self.slot(id, &range), accept }
                    }
                    (None, None) => {
                        let name = if looks_like_name(lhs) { lhs } else { rhs };
                        return Err(if looks_like_name(name) {
                            ModelError::UnknownVariable(name.clone())
                        } else {
                            self.type_error(format!("comparison {lhs}={rhs} mentions no variable"))
                        });
                    }
                };
                if *negated {
                    BoolNode::Not(Box::new(node))
                } else {
                    node
                }
            }
            Expr::Not(inner) => BoolNode::Not(Box::new(self.boolean(inner)?)),
            Expr::And(es) => BoolNode::And(es.iter().map(|e| self.boolean(e)).collect::<Result<_, _>>()?),
            Expr::Or(es) => BoolNode::Or(es.iter().map(|e| self.boolean(e)).collect::<Result<_, _>>()?),
            Expr::If { cond, then, otherwise } => BoolNode::If(
                Box::new(self.boolean(cond)?),
                Box::new(self.boolean(then)?),
                Box::new(self.boolean(otherwise)?),
            ),
            Expr::Case { arms, default } => {
                let arms = arms.iter().map(|(g, v)| Ok((self.boolean(g)?, self.boolean(v)?))).collect::<Result<_, ModelError>>()?;
                BoolNode::Case(arms, Box::new(self.boolean(default)?))
            }
        })
    }
}
