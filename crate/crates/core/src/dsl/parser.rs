use super::lexer::{Tok, Token};
use super::{Diagnostic, DiagnosticKind, SourceSpan};
use crate::scm::Expr;

/// One declaration, names and labels still unresolved.
#[derive(Debug)]
pub(crate) enum Decl {
    Var { exogenous: bool, name: Spanned, labels: Vec<Spanned> },
    Equation { target: Spanned, body: Expr, atoms: Vec<Spanned> },
    Context { name: Spanned, entries: Vec<(Spanned, Spanned)> },
    Query { name: Spanned, fields: Vec<QueryField> },
}

#[derive(Debug)]
pub(crate) enum QueryField {
    Def(Spanned),
    Cause(Vec<(Spanned, Spanned)>),
    Effect(Vec<(Spanned, Spanned)>),
    Context(Spanned),
}

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub text: String,
    pub span: SourceSpan,
}

pub(crate) struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    eof: SourceSpan,
    /// Identifiers/labels seen while parsing the current expression.
    atoms: Vec<Spanned>,
}

type PResult<T> = Result<T, Diagnostic>;

const KEYWORDS: [&str; 9] = ["exo", "var", "context", "query", "if", "then", "else", "case", "default"];

impl<'t> Parser<'t> {
    pub(crate) fn new(toks: &'t [Token], eof: SourceSpan) -> Self {
        Parser { toks, pos: 0, eof, atoms: Vec::new() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn span(&self) -> SourceSpan {
        self.toks.get(self.pos).map_or(self.eof, |t| t.span)
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(Diagnostic { kind: DiagnosticKind::SyntaxError, message: message.into(), span: self.span() })
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        let found = self.peek().map_or("end of input".to_string(), Tok::describe);
        self.error(format!("expected {wanted}, found {found}"))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.unexpected(&t.describe())
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn name(&mut self) -> PResult<Spanned> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let out = Spanned { text: s.clone(), span: self.span() };
                self.pos += 1;
                Ok(out)
            }
            _ => self.unexpected("a name"),
        }
    }

    /// Identifier or literal label.
    fn operand(&mut self) -> PResult<Spanned> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {}
            Some(Tok::Label(_)) => {}
            _ => return self.unexpected("a variable or value"),
        }
        let (Some(Tok::Ident(s)) | Some(Tok::Label(s))) = self.peek() else { unreachable!() };
        let out = Spanned { text: s.clone(), span: self.span() };
        self.pos += 1;
        Ok(out)
    }

    pub(crate) fn trailing(&self) -> Diagnostic {
        Diagnostic { kind: DiagnosticKind::SyntaxError, message: "unexpected trailing input".into(), span: self.span() }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    /// Skip to just past the next top-level newline (error recovery).
    pub(crate) fn recover(&mut self) {
        while let Some(t) = self.peek() {
            let newline = *t == Tok::Newline;
            self.pos += 1;
            if newline {
                break;
            }
        }
    }

    /// `None` for a blank line.
    pub(crate) fn declaration(&mut self) -> PResult<Option<Decl>> {
        if self.eat(&Tok::Newline) {
            return Ok(None);
        }
        let decl = if self.is_keyword("exo") || self.is_keyword("var") {
            let exogenous = self.is_keyword("exo");
            self.pos += 1;
            let name = self.name()?;
            self.expect(Tok::Colon)?;
            let labels = self.range()?;
            Decl::Var { exogenous, name, labels }
        } else if self.is_keyword("context") && !matches!(self.peek_at(1), Some(Tok::Assign | Tok::Eq)) {
            self.pos += 1;
            let name = self.name()?;
            self.expect(Tok::LBrace)?;
            let mut entries = Vec::new();
            while !self.eat(&Tok::RBrace) {
                let var = self.name()?;
                self.expect(Tok::Eq)?;
                let val = self.operand()?;
                entries.push((var, val));
                if !(self.eat(&Tok::Comma) || self.eat(&Tok::Semi)) && self.peek() != Some(&Tok::RBrace) {
                    return self.unexpected("`,`, `;` or `}`");
                }
            }
            Decl::Context { name, entries }
        } else if self.is_keyword("query") && !matches!(self.peek_at(1), Some(Tok::Assign | Tok::Eq)) {
            self.pos += 1;
            let name = self.name()?;
            self.expect(Tok::LBrace)?;
            let mut fields = Vec::new();
            while !self.eat(&Tok::RBrace) {
                fields.push(self.query_field()?);
                if !self.eat(&Tok::Semi) && self.peek() != Some(&Tok::RBrace) {
                    return self.unexpected("`;` or `}`");
                }
            }
            Decl::Query { name, fields }
        } else {
            let target = self.name()?;
            if !(self.eat(&Tok::Assign) || self.eat(&Tok::Eq)) {
                return self.unexpected("`:=`");
            }
            self.atoms.clear();
            let body = self.expr()?;
            Decl::Equation { target, body, atoms: std::mem::take(&mut self.atoms) }
        };
        if !self.at_end() && !self.eat(&Tok::Newline) {
            return self.unexpected("end of line");
        }
        Ok(Some(decl))
    }

    fn range(&mut self) -> PResult<Vec<Spanned>> {
        self.expect(Tok::LBrace)?;
        let mut labels = vec![self.operand()?];
        while self.eat(&Tok::Comma) {
            labels.push(self.operand()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(labels)
    }

    /// `V=v sep V=v ...`
    pub(crate) fn assignments(&mut self, sep: &Tok) -> PResult<Vec<(Spanned, Spanned)>> {
        let mut out = Vec::new();
        loop {
            let var = self.name()?;
            self.expect(Tok::Eq)?;
            out.push((var, self.operand()?));
            if !self.eat(sep) {
                return Ok(out);
            }
        }
    }

    fn query_field(&mut self) -> PResult<QueryField> {
        let key = self.name().or_else(|_| self.unexpected("`def`, `cause`, `effect` or `context`"))?;
        self.expect(Tok::Eq)?;
        Ok(match key.text.as_str() {
            "def" => QueryField::Def(self.name()?),
            "cause" => QueryField::Cause(self.assignments(&Tok::Amp)?),
            "effect" => QueryField::Effect(self.assignments(&Tok::Pipe)?),
            "context" => QueryField::Context(self.name()?),
            other => {
                return Err(Diagnostic {
                    kind: DiagnosticKind::SyntaxError,
                    message: format!("unknown query field `{other}`"),
                    span: key.span,
                })
            }
        })
    }

    fn expr(&mut self) -> PResult<Expr> {
        if self.eat_keyword("if") {
            let cond = self.expr()?;
            self.expect_keyword("then")?;
            let then = self.expr()?;
            self.expect_keyword("else")?;
            let otherwise = self.expr()?;
            return Ok(Expr::ite(cond, then, otherwise));
        }
        if self.eat_keyword("case") {
            let mut arms = Vec::new();
            loop {
                if self.eat_keyword("default") {
                    self.expect(Tok::Arrow)?;
                    let default = self.expr()?;
                    return Ok(Expr::Case { arms, default: Box::new(default) });
                }
                let guard = self.expr()?;
                self.expect(Tok::Arrow)?;
                let value = self.expr()?;
                self.expect(Tok::Semi)?;
                arms.push((guard, value));
            }
        }
        self.or()
    }

    fn or(&mut self) -> PResult<Expr> {
        let first = self.and()?;
        if self.peek() != Some(&Tok::Pipe) {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat(&Tok::Pipe) {
            items.push(self.and()?);
        }
        Ok(Expr::Or(items))
    }

    fn and(&mut self) -> PResult<Expr> {
        let first = self.unary()?;
        if self.peek() != Some(&Tok::Amp) {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat(&Tok::Amp) {
            items.push(self.unary()?);
        }
        Ok(Expr::And(items))
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat(&Tok::Bang) {
            return Ok(Expr::not(self.unary()?));
        }
        if self.eat(&Tok::LParen) {
            let inner = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(inner);
        }
        let lhs = self.operand()?;
        self.atoms.push(lhs.clone());
        let negated = match self.peek() {
            Some(Tok::Eq) => false,
            Some(Tok::Ne) => true,
            _ => return Ok(Expr::Atom(lhs.text)),
        };
        self.pos += 1;
        let rhs = self.operand()?;
        self.atoms.push(rhs.clone());
        Ok(Expr::Cmp { lhs: lhs.text, negated, rhs: rhs.text })
    }
}
