//! The `.scm` model language.
//!
//! ```text
//! # late preemption
//! exo U_ST : {0,1}
//! var ST : {0,1}
//! ST := U_ST
//! var BS : {0,1}
//! BS := BH | SH
//! context actual { U_ST=1, U_BT=1 }
//! query q { def=Def2; cause = ST=1; effect = BS=1 }
//! ```
//!
//! One declaration per line (newlines inside braces and parentheses are
//! ignored). Equations are `target := expr` where `expr` uses `&`, `|`, `!`,
//! `=`, `!=`, `if c then a else b` and `case g -> v; ...; default -> v`. A
//! bare binary variable in a condition means `X=1`; a condition used as a
//! value yields `1`/`0`.

mod lexer;
mod parser;

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::causation::{DefinitionId, Effect};
use crate::scm::{CausalModel, Context, Expr, ModelError, PartialSetting, Range, Value, VarId, VarKind, Variable};
use lexer::{lex, Tok};
use parser::{Decl, Parser, QueryField, Spanned};

/// Line and column are 1-based (column counts characters); `start..end`
/// are byte offsets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DiagnosticKind {
    SyntaxError,
    UnknownVariable,
    ValueOutOfRange,
    CyclicModel,
    DuplicateName,
    InvalidRange,
    TypeError,
    MissingEquation,
    DuplicateEquation,
    IncompleteContext,
    CrossVariableDisjunction,
    UnknownDefinition,
    InvalidQuery,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
    pub span: SourceSpan,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {:?}: {}", self.span.line, self.span.column, self.kind, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                f.write_char('\n')?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

impl ParseError {
    /// Render each diagnostic with the offending source line and a caret.
    pub fn render(&self, src: &str, file: &str) -> String {
        let mut out = String::new();
        for d in &self.diagnostics {
            let _ = writeln!(out, "{file}:{}:{}: error[{:?}]: {}", d.span.line, d.span.column, d.kind, d.message);
            if let Some(line) = src.lines().nth(d.span.line.saturating_sub(1)) {
                let width = src[d.span.start..d.span.end.max(d.span.start)].chars().count().max(1);
                let _ = writeln!(out, "  | {line}");
                let _ = writeln!(out, "  | {}{}", " ".repeat(d.span.column.saturating_sub(1)), "^".repeat(width));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedContext {
    pub name: String,
    pub context: Context,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedQuery {
    pub name: String,
    pub definition: DefinitionId,
    pub cause: PartialSetting,
    pub effect: Effect,
    /// Context to evaluate in; the document's first context when absent.
    pub context: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelDocument {
    pub model: CausalModel,
    pub contexts: Vec<NamedContext>,
    pub queries: Vec<NamedQuery>,
}

impl ModelDocument {
    pub fn context(&self, name: &str) -> Option<&Context> {
        self.contexts.iter().find(|c| c.name == name).map(|c| &c.context)
    }

    pub fn query(&self, name: &str) -> Option<&NamedQuery> {
        self.queries.iter().find(|q| q.name == name)
    }

    /// The named context, or the first one when `name` is `None`.
    pub fn resolve_context(&self, name: Option<&str>) -> Option<&NamedContext> {
        match name {
            Some(n) => self.contexts.iter().find(|c| c.name == n),
            None => self.contexts.first(),
        }
    }
}

fn diag(kind: DiagnosticKind, span: SourceSpan, message: impl Into<String>) -> Diagnostic {
    Diagnostic { kind, message: message.into(), span }
}

/// Parse and validate a document. All syntax errors are reported (one per
/// bad line); validation stops at the first model-level error.
pub fn parse(src: &str) -> Result<ModelDocument, ParseError> {
    let eof = {
        let line = src.lines().count().max(1);
        let last_start = src.rfind('\n').map_or(0, |i| i + 1);
        let (line, column) = if src.ends_with('\n') { (line + 1, 1) } else { (line, src[last_start..].chars().count() + 1) };
        SourceSpan { line, column, start: src.len(), end: src.len() }
    };
    let toks = lex(src).map_err(|d| ParseError { diagnostics: vec![d] })?;
    let mut p = Parser::new(&toks, eof);
    let mut decls = Vec::new();
    let mut diagnostics = Vec::new();
    while !p.at_end() {
        match p.declaration() {
            Ok(Some(d)) => decls.push(d),
            Ok(None) => {}
            Err(d) => {
                diagnostics.push(d);
                p.recover();
            }
        }
    }
    if !diagnostics.is_empty() {
        return Err(ParseError { diagnostics });
    }
    build(decls).map_err(|d| ParseError { diagnostics: vec![d] })
}

fn build(decls: Vec<Decl>) -> Result<ModelDocument, Diagnostic> {
    let mut vars = Vec::new();
    let mut var_spans: HashMap<String, SourceSpan> = HashMap::new();
    let mut equations = Vec::new();
    let mut eq_info: Vec<(Spanned, Vec<Spanned>)> = Vec::new();
    let mut ctx_decls = Vec::new();
    let mut query_decls = Vec::new();
    for d in decls {
        match d {
            Decl::Var { exogenous, name, labels } => {
                if var_spans.contains_key(&name.text) {
                    return Err(diag(DiagnosticKind::DuplicateName, name.span, format!("`{}` is declared twice", name.text)));
                }
                let range = Range::new(labels.iter().map(|l| l.text.clone())).map_err(|reason| {
                    let span = labels.last().map_or(name.span, |l| l.span);
                    diag(DiagnosticKind::InvalidRange, span, format!("range of `{}`: {reason}", name.text))
                })?;
                var_spans.insert(name.text.clone(), name.span);
                let kind = if exogenous { VarKind::Exogenous } else { VarKind::Endogenous };
                vars.push(Variable { name: name.text, kind, range });
            }
            Decl::Equation { target, body, atoms } => {
                equations.push((target.text.clone(), body));
                eq_info.push((target, atoms));
            }
            Decl::Context { name, entries } => ctx_decls.push((name, entries)),
            Decl::Query { name, fields } => query_decls.push((name, fields)),
        }
    }

    let model = CausalModel::new(vars, equations).map_err(|e| locate(&e, &var_spans, &eq_info))?;

    let mut contexts: Vec<NamedContext> = Vec::new();
    for (name, entries) in ctx_decls {
        if contexts.iter().any(|c| c.name == name.text) {
            return Err(diag(DiagnosticKind::DuplicateName, name.span, format!("context `{}` is declared twice", name.text)));
        }
        let mut assignment = Vec::new();
        for (var, val) in &entries {
            let id = model.lookup(&var.text).map_err(|_| diag(DiagnosticKind::UnknownVariable, var.span, format!("unknown variable `{}`", var.text)))?;
            if model.kind(id) != VarKind::Exogenous {
                return Err(diag(DiagnosticKind::IncompleteContext, var.span, format!("`{}` is endogenous; contexts assign exogenous variables", var.text)));
            }
            let x = model.value_of(id, &val.text).map_err(|e| diag(DiagnosticKind::ValueOutOfRange, val.span, e.to_string()))?;
            assignment.push((id, x));
        }
        let context = Context::new(&model, assignment).map_err(|e| {
            let kind = match e {
                ModelError::DuplicateAssignment(_) => DiagnosticKind::DuplicateName,
                _ => DiagnosticKind::IncompleteContext,
            };
            diag(kind, name.span, format!("context `{}`: {e}", name.text))
        })?;
        contexts.push(NamedContext { name: name.text, context });
    }

    let mut queries: Vec<NamedQuery> = Vec::new();
    for (name, fields) in query_decls {
        if queries.iter().any(|q| q.name == name.text) {
            return Err(diag(DiagnosticKind::DuplicateName, name.span, format!("query `{}` is declared twice", name.text)));
        }
        queries.push(build_query(&model, &contexts, name, fields)?);
    }
    Ok(ModelDocument { model, contexts, queries })
}

fn build_query(model: &CausalModel, contexts: &[NamedContext], name: Spanned, fields: Vec<QueryField>) -> Result<NamedQuery, Diagnostic> {
    let mut definition = None;
    let mut cause = None;
    let mut effect = None;
    let mut context = None;
    for f in fields {
        match f {
            QueryField::Def(d) => {
                definition = Some(d.text.parse::<DefinitionId>().map_err(|e| diag(DiagnosticKind::UnknownDefinition, d.span, e.to_string()))?);
            }
            QueryField::Cause(items) => cause = Some(resolve_setting(model, &items)?),
            QueryField::Effect(items) => effect = Some(resolve_effect(model, &items)?),
            QueryField::Context(c) => {
                if !contexts.iter().any(|nc| nc.name == c.text) {
                    return Err(diag(DiagnosticKind::InvalidQuery, c.span, format!("unknown context `{}`", c.text)));
                }
                context = Some(c.text);
            }
        }
    }
    let missing = |what: &str| diag(DiagnosticKind::InvalidQuery, name.span, format!("query `{}` has no `{what}` field", name.text));
    let definition = definition.ok_or_else(|| missing("def"))?;
    let cause = cause.ok_or_else(|| missing("cause"))?;
    let effect = effect.ok_or_else(|| missing("effect"))?;
    if cause.contains(effect.var) {
        return Err(diag(DiagnosticKind::InvalidQuery, name.span, "the effect variable cannot be part of the cause"));
    }
    Ok(NamedQuery { name: name.text, definition, cause, effect, context })
}

fn endogenous(model: &CausalModel, var: &Spanned) -> Result<VarId, Diagnostic> {
    let id = model.lookup(&var.text).map_err(|_| diag(DiagnosticKind::UnknownVariable, var.span, format!("unknown variable `{}`", var.text)))?;
    if !model.is_endogenous(id) {
        return Err(diag(DiagnosticKind::InvalidQuery, var.span, format!("`{}` is exogenous; causes and effects are endogenous", var.text)));
    }
    Ok(id)
}

fn label_value(model: &CausalModel, id: VarId, val: &Spanned) -> Result<Value, Diagnostic> {
    model.value_of(id, &val.text).map_err(|e| diag(DiagnosticKind::ValueOutOfRange, val.span, e.to_string()))
}

fn resolve_setting(model: &CausalModel, items: &[(Spanned, Spanned)]) -> Result<PartialSetting, Diagnostic> {
    let mut entries = Vec::new();
    for (var, val) in items {
        let id = endogenous(model, var)?;
        if entries.iter().any(|(v, _)| *v == id) {
            return Err(diag(DiagnosticKind::InvalidQuery, var.span, format!("`{}` appears twice in the setting", var.text)));
        }
        entries.push((id, label_value(model, id, val)?));
    }
    Ok(PartialSetting::new(entries).expect("checked distinct"))
}

fn resolve_effect(model: &CausalModel, items: &[(Spanned, Spanned)]) -> Result<Effect, Diagnostic> {
    let first = endogenous(model, &items[0].0)?;
    let mut vals = Vec::new();
    for (var, val) in items {
        if var.text != items[0].0.text {
            return Err(diag(
                DiagnosticKind::CrossVariableDisjunction,
                var.span,
                format!("effects are disjunctions over one variable; `{}` differs from `{}`", var.text, items[0].0.text),
            ));
        }
        vals.push(label_value(model, first, val)?);
    }
    Ok(Effect::new(first, vals).expect("nonempty"))
}

fn parse_fragment<T>(src: &str, sep: Tok, resolve: impl FnOnce(&[(Spanned, Spanned)]) -> Result<T, Diagnostic>) -> Result<T, ParseError> {
    let eof = SourceSpan { line: 1, column: src.chars().count() + 1, start: src.len(), end: src.len() };
    let toks = lex(src).map_err(|d| ParseError { diagnostics: vec![d] })?;
    let mut p = Parser::new(&toks, eof);
    let items = p.assignments(&sep).map_err(|d| ParseError { diagnostics: vec![d] })?;
    if !p.at_end() {
        let d = p.trailing();
        return Err(ParseError { diagnostics: vec![d] });
    }
    resolve(&items).map_err(|d| ParseError { diagnostics: vec![d] })
}

/// A conjunction of endogenous assignments, e.g. `X=1 & D=0`.
pub fn parse_setting(model: &CausalModel, src: &str) -> Result<PartialSetting, ParseError> {
    parse_fragment(src, Tok::Amp, |items| resolve_setting(model, items))
}

/// A same-variable disjunction, e.g. `F=1 | F=2`.
pub fn parse_effect(model: &CausalModel, src: &str) -> Result<Effect, ParseError> {
    parse_fragment(src, Tok::Pipe, |items| resolve_effect(model, items))
}

/// Attach a span to a model-construction error.
fn locate(e: &ModelError, var_spans: &HashMap<String, SourceSpan>, eqs: &[(Spanned, Vec<Spanned>)]) -> Diagnostic {
    let msg = e.to_string();
    let eq_span = |target: &str| eqs.iter().find(|(t, _)| t.text == target).map(|(t, _)| t.span);
    let atom_span = |text: &str| eqs.iter().flat_map(|(_, atoms)| atoms.iter()).find(|a| a.text == text).map(|a| a.span);
    let first = eqs.first().map(|(t, _)| t.span).or_else(|| var_spans.values().next().copied()).unwrap_or(SourceSpan { line: 1, column: 1, start: 0, end: 0 });
    let (kind, span) = match e {
        ModelError::UnknownVariable(n) => (
            DiagnosticKind::UnknownVariable,
            atom_span(n).or_else(|| eqs.iter().find(|(t, _)| &t.text == n).map(|(t, _)| t.span)),
        ),
        ModelError::DuplicateName(n) => (DiagnosticKind::DuplicateName, var_spans.get(n).copied()),
        ModelError::ValueOutOfRange { var, value } => (DiagnosticKind::ValueOutOfRange, atom_span(value).or_else(|| eq_span(var))),
        ModelError::InvalidRange { var, .. } => (DiagnosticKind::InvalidRange, var_spans.get(var).copied()),
        ModelError::CyclicModel(cycle) => (DiagnosticKind::CyclicModel, cycle.first().and_then(|v| eq_span(v))),
        ModelError::MissingEquation(n) => (DiagnosticKind::MissingEquation, var_spans.get(n).copied()),
        ModelError::DuplicateEquation(n) => {
            (DiagnosticKind::DuplicateEquation, eqs.iter().filter(|(t, _)| &t.text == n).nth(1).map(|(t, _)| t.span))
        }
        ModelError::ExogenousEquation(n) => (DiagnosticKind::TypeError, eq_span(n)),
        ModelError::TypeError { var, .. } => (DiagnosticKind::TypeError, eq_span(var)),
        _ => (DiagnosticKind::TypeError, None),
    };
    diag(kind, span.unwrap_or(first), msg)
}

/// Canonical text: variables, equations, contexts, queries — each group in
/// declaration order, one declaration per line.
pub fn serialize(doc: &ModelDocument) -> String {
    let m = &doc.model;
    let mut out = String::new();
    for v in m.variables() {
        let kw = if v.kind == VarKind::Exogenous { "exo" } else { "var" };
        let _ = writeln!(out, "{kw} {} : {}", v.name, v.range);
    }
    for eq in m.equations() {
        let _ = writeln!(out, "{} := {}", m.name(eq.target), eq.body);
    }
    for c in &doc.contexts {
        let items: Vec<String> = c.context.iter().map(|(v, x)| format!("{}={}", m.name(v), m.label(v, x))).collect();
        let _ = writeln!(out, "context {} {{ {} }}", c.name, items.join(", "));
    }
    for q in &doc.queries {
        let cause: Vec<String> = q.cause.iter().map(|(v, x)| format!("{}={}", m.name(v), m.label(v, x))).collect();
        let _ = write!(out, "query {} {{ def={}; cause = {}; effect = {}", q.name, q.definition, cause.join(" & "), q.effect.display(m));
        if let Some(c) = &q.context {
            let _ = write!(out, "; context = {c}");
        }
        out.push_str(" }\n");
    }
    out
}

/// A document holding just a model.
pub fn model_document(model: CausalModel) -> ModelDocument {
    ModelDocument { model, contexts: Vec::new(), queries: Vec::new() }
}

/// Render a single equation body the way the serializer does.
pub fn render_expr(e: &Expr) -> String {
    e.to_string()
}
