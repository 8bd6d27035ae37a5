use super::{Diagnostic, DiagnosticKind, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    /// Numbers, negative numbers and tuple labels like `(1,0)`.
    Label(String),
    Assign,
    Colon,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Eq,
    Ne,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Newline,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Label(s) => format!("`{s}`"),
            Tok::Assign => "`:=`".into(),
            Tok::Colon => "`:`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Newline => "end of line".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    line_start: usize,
}

impl Cursor<'_> {
    fn span_from(&self, start: usize, line: usize, line_start: usize) -> SourceSpan {
        SourceSpan { line, column: self.src[line_start..start].chars().count() + 1, start, end: self.pos }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.src[self.pos..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.line_start = self.pos;
        }
        Some(c)
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// `(a,b,...)` where every component is a plain label: returns the label
/// with whitespace removed and its byte length in the source.
fn tuple_label(rest: &str) -> Option<(String, usize)> {
    let close = rest.find(')')?;
    let inner = &rest[1..close];
    if !inner.contains(',') || inner.contains('(') {
        return None;
    }
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    let ok = parts.iter().all(|p| {
        let body = p.strip_prefix('-').unwrap_or(p);
        !body.is_empty() && body.chars().all(is_ident_char)
    });
    ok.then(|| (format!("({})", parts.join(",")), close + 1))
}

/// Newlines inside braces or parentheses are insignificant.
pub(crate) fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut c = Cursor { src, pos: 0, line: 1, line_start: 0 };
    let mut out = Vec::new();
    let mut depth = 0usize;
    while let Some(ch) = c.peek() {
        let (start, line, line_start) = (c.pos, c.line, c.line_start);
        if ch == '\n' {
            c.bump();
            if depth == 0 {
                out.push(Token { tok: Tok::Newline, span: c.span_from(start, line, line_start) });
            }
            continue;
        }
        if ch.is_whitespace() {
            c.bump();
            continue;
        }
        if ch == '#' {
            while c.peek().is_some_and(|ch| ch != '\n') {
                c.bump();
            }
            continue;
        }
        let tok = if is_ident_start(ch) {
            while c.peek().is_some_and(is_ident_char) {
                c.bump();
            }
            Tok::Ident(src[start..c.pos].to_string())
        } else if ch.is_ascii_digit() || (ch == '-' && c.peek2().is_some_and(|d| d.is_ascii_digit())) {
            c.bump();
            while c.peek().is_some_and(is_ident_char) {
                c.bump();
            }
            Tok::Label(src[start..c.pos].to_string())
        } else if ch == '(' {
            if let Some((label, len)) = tuple_label(&src[start..]) {
                let end = start + len;
                while c.pos < end {
                    c.bump();
                }
                Tok::Label(label)
            } else {
                c.bump();
                depth += 1;
                Tok::LParen
            }
        } else {
            c.bump();
            match ch {
                ':' if c.peek() == Some('=') => {
                    c.bump();
                    Tok::Assign
                }
                ':' => Tok::Colon,
                '{' => {
                    depth += 1;
                    Tok::LBrace
                }
                '}' => {
                    depth = depth.saturating_sub(1);
                    Tok::RBrace
                }
                ')' => {
                    depth = depth.saturating_sub(1);
                    Tok::RParen
                }
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '=' => Tok::Eq,
                '!' if c.peek() == Some('=') => {
                    c.bump();
                    Tok::Ne
                }
                '!' => Tok::Bang,
                '&' => Tok::Amp,
                '|' => Tok::Pipe,
                '-' if c.peek() == Some('>') => {
                    c.bump();
                    Tok::Arrow
                }
                other => {
                    return Err(Diagnostic {
                        kind: DiagnosticKind::SyntaxError,
                        message: format!("unexpected character `{other}`"),
                        span: c.span_from(start, line, line_start),
                    });
                }
            }
        };
        out.push(Token { tok, span: c.span_from(start, line, line_start) });
    }
    Ok(out)
}
