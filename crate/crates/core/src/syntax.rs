//! Concrete syntax: lexer, parser and printer.
//!
//! ```text
//! term   ::= value | "[" binder "]" term | "(" term ")"
//! value  ::= var | "\" var term | "!" term | "<" term "," term ">"
//! binder ::= value "-" var | evar "?" var | mvar ">" value "," var
//!          | mvar "@" var "," var
//! mvar   ::= "m" digits        evar ::= "e" digits | "_"
//! ```
//!
//! The parser also reads the Unicode rendering produced by [`print`]
//! (`λ`, `→`, `▷`, `⊗`, `⟨ ⟩`). Input must be well-bound: binders are
//! pairwise distinct and never reused as free names. `_` is a binder with no
//! occurrences.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::term::{Kind, Term, Value, Var};

pub const GRAMMAR: &str = "\
term   ::= value | \"[\" binder \"]\" term | \"(\" term \")\"
value  ::= var | \"\\\" var term | \"!\" term | \"<\" term \",\" term \">\"
binder ::= value \"-\" var            (cut)
         | evar \"?\" var             (dereliction)
         | mvar \">\" value \",\" var   (subtraction)
         | mvar \"@\" var \",\" var     (unpairing)
mvar   ::= \"m\" digits
evar   ::= \"e\" digits | \"_\"";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("syntax error at {span}: expected {}, found {found}", expected.join(" or "))]
pub struct SyntaxError {
    pub span: SourceSpan,
    pub expected: Vec<&'static str>,
    pub found: String,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("binding error at {span}: {name} {reason}")]
pub struct BindingError {
    pub span: SourceSpan,
    pub name: String,
    pub reason: &'static str,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Binding(#[from] BindingError),
}

impl ParseError {
    pub fn span(&self) -> SourceSpan {
        match self {
            ParseError::Syntax(e) => e.span,
            ParseError::Binding(e) => e.span,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Tok {
    LBracket,
    RBracket,
    LParen,
    RParen,
    Lambda,
    Bang,
    LAngle,
    RAngle,
    Comma,
    Arrow,
    Query,
    Triangle,
    At,
    Name(Kind, u32),
    Wildcard,
    Eof,
}

impl Tok {
    fn describe(self) -> String {
        match self {
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Lambda => "'\\'".into(),
            Tok::Bang => "'!'".into(),
            Tok::LAngle => "'<'".into(),
            Tok::RAngle => "'>'".into(),
            Tok::Comma => "','".into(),
            Tok::Arrow => "'-'".into(),
            Tok::Query => "'?'".into(),
            Tok::Triangle => "'>'".into(),
            Tok::At => "'@'".into(),
            Tok::Name(k, i) => format!("'{}{}'", k.prefix(), i),
            Tok::Wildcard => "'_'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, SourceSpan)>, SyntaxError> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some((start, c)) = it.next() {
        let single = |t: Tok| (t, SourceSpan { start, end: start + c.len_utf8() });
        let tok = match c {
            c if c.is_whitespace() => continue,
            '[' => single(Tok::LBracket),
            ']' => single(Tok::RBracket),
            '(' => single(Tok::LParen),
            ')' => single(Tok::RParen),
            '\\' | 'λ' => single(Tok::Lambda),
            '!' => single(Tok::Bang),
            '<' | '⟨' => single(Tok::LAngle),
            '⟩' => single(Tok::RAngle),
            // '>' closes a pair or introduces a subtraction; the parser decides.
            '>' | '▷' => single(Tok::Triangle),
            ',' => single(Tok::Comma),
            '-' | '→' => single(Tok::Arrow),
            '?' => single(Tok::Query),
            '@' | '⊗' => single(Tok::At),
            '_' => single(Tok::Wildcard),
            'm' | 'e' => {
                let kind = if c == 'm' { Kind::Multiplicative } else { Kind::Exponential };
                let mut end = start + 1;
                let mut digits = String::new();
                while let Some(&(i, d)) = it.peek() {
                    if d.is_ascii_digit() {
                        digits.push(d);
                        end = i + 1;
                        it.next();
                    } else {
                        break;
                    }
                }
                let span = SourceSpan { start, end };
                let index = digits.parse::<u32>().map_err(|_| SyntaxError {
                    span,
                    expected: vec!["digits after the variable prefix"],
                    found: src[start..end].to_string(),
                })?;
                (Tok::Name(kind, index), span)
            }
            other => {
                return Err(SyntaxError {
                    span: SourceSpan { start, end: start + other.len_utf8() },
                    expected: vec!["a term"],
                    found: format!("'{other}'"),
                })
            }
        };
        out.push(tok);
    }
    out.push((Tok::Eof, SourceSpan { start: src.len(), end: src.len() }));
    Ok(out)
}

/// One binder of a spine, waiting for its body.
enum Frame {
    Cut(Value, Var),
    Subtract(Var, Value, Var),
    Derelict(Var, Var),
    Unpair(Var, Var, Var),
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    scope: HashMap<Var, u32>,
    binders: HashSet<Var>,
    free: Vec<(Var, SourceSpan)>,
    wildcards: u32,
}

impl Parser {
    fn peek(&self) -> Tok {
        self.toks[self.pos].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos];
        if t.0 != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: Vec<&'static str>) -> Result<T, ParseError> {
        Err(SyntaxError { span: self.span(), expected, found: self.peek().describe() }.into())
    }

    fn expect(&mut self, tok: Tok, what: &'static str) -> Result<SourceSpan, ParseError> {
        if self.peek() == tok {
            Ok(self.bump().1)
        } else {
            self.fail(vec![what])
        }
    }

    /// A variable in binding position; `_` gets a placeholder index.
    fn binder(&mut self) -> Result<Var, ParseError> {
        let (tok, span) = self.toks[self.pos];
        let x = match tok {
            Tok::Name(kind, index) => Var { kind, index, wildcard: false },
            Tok::Wildcard => {
                self.wildcards += 1;
                Var::wildcard(self.wildcards - 1)
            }
            _ => return self.fail(vec!["a variable"]),
        };
        self.bump();
        if !x.wildcard && !self.binders.insert(x) {
            return Err(BindingError { span, name: x.to_string(), reason: "is bound twice" }.into());
        }
        Ok(x)
    }

    fn open(&mut self, x: Var) {
        *self.scope.entry(x).or_insert(0) += 1;
    }

    fn close(&mut self, x: Var) {
        if let Some(c) = self.scope.get_mut(&x) {
            *c -= 1;
        }
    }

    /// A variable in occurrence position, with a required sort if any.
    fn occurrence(&mut self, want: Option<Kind>) -> Result<Var, ParseError> {
        let (tok, span) = self.toks[self.pos];
        match tok {
            Tok::Name(kind, index) => {
                if let Some(k) = want {
                    if k != kind {
                        return self.fail(vec![match k {
                            Kind::Multiplicative => "a multiplicative variable",
                            Kind::Exponential => "an exponential variable",
                        }]);
                    }
                }
                self.bump();
                let x = Var { kind, index, wildcard: false };
                if self.scope.get(&x).copied().unwrap_or(0) == 0 {
                    self.free.push((x, span));
                }
                Ok(x)
            }
            Tok::Wildcard => Err(BindingError { span, name: "_".into(), reason: "cannot occur, it only binds" }.into()),
            _ => self.fail(vec!["a variable"]),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut frames: Vec<Frame> = Vec::new();
        let mut opened: Vec<Var> = Vec::new();
        let tail = loop {
            match self.peek() {
                Tok::LBracket => {
                    self.bump();
                    let frame = self.binder_frame()?;
                    match &frame {
                        Frame::Cut(_, x) | Frame::Subtract(_, _, x) | Frame::Derelict(_, x) => {
                            self.open(*x);
                            opened.push(*x);
                        }
                        Frame::Unpair(_, l, r) => {
                            self.open(*l);
                            self.open(*r);
                            opened.extend([*l, *r]);
                        }
                    }
                    frames.push(frame);
                }
                Tok::LParen => {
                    self.bump();
                    let inner = self.term()?;
                    self.expect(Tok::RParen, "')'")?;
                    break inner;
                }
                _ => break Term::Val(self.value()?),
            }
        };
        for x in opened {
            self.close(x);
        }
        let mut out = tail;
        for f in frames.into_iter().rev() {
            out = match f {
                Frame::Cut(v, x) => Term::cut(v, x, out),
                Frame::Subtract(h, v, x) => Term::subtract(h, v, x, out),
                Frame::Derelict(h, x) => Term::derelict(h, x, out),
                Frame::Unpair(h, l, r) => Term::unpair(h, l, r, out),
            };
        }
        Ok(out)
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        match self.peek() {
            Tok::Name(..) | Tok::Wildcard => Ok(Value::Var(self.occurrence(None)?)),
            Tok::Lambda => {
                self.bump();
                let x = self.binder()?;
                self.open(x);
                let body = self.term()?;
                self.close(x);
                Ok(Value::Abs(x, Box::new(body)))
            }
            Tok::Bang => {
                self.bump();
                Ok(Value::Bang(Box::new(self.term()?)))
            }
            Tok::LAngle => {
                self.bump();
                let l = self.term()?;
                self.expect(Tok::Comma, "','")?;
                let r = self.term()?;
                match self.peek() {
                    Tok::Triangle | Tok::RAngle => {
                        self.bump();
                    }
                    _ => return self.fail(vec!["'>'"]),
                }
                Ok(Value::Pair(Box::new(l), Box::new(r)))
            }
            Tok::LParen => {
                let start = self.span();
                self.bump();
                let inner = self.term()?;
                self.expect(Tok::RParen, "')'")?;
                inner.into_value().map_err(|_| {
                    SyntaxError {
                        span: start,
                        expected: vec!["a value inside the parentheses"],
                        found: "a term".into(),
                    }
                    .into()
                })
            }
            _ => self.fail(vec!["a variable", "'\\'", "'!'", "'<'"]),
        }
    }

    /// Everything between `[` and `]`.
    fn binder_frame(&mut self) -> Result<Frame, ParseError> {
        // A leading variable is either a cut value or the head of a left rule.
        if let Tok::Name(kind, _) = self.peek() {
            let next = self.toks.get(self.pos + 1).map(|t| t.0);
            match (kind, next) {
                (Kind::Exponential, Some(Tok::Query)) => {
                    let head = self.occurrence(Some(Kind::Exponential))?;
                    self.bump();
                    let x = self.binder()?;
                    self.expect(Tok::RBracket, "']'")?;
                    return Ok(Frame::Derelict(head, x));
                }
                (Kind::Multiplicative, Some(Tok::Triangle)) => {
                    let head = self.occurrence(Some(Kind::Multiplicative))?;
                    self.bump();
                    let v = self.value()?;
                    self.expect(Tok::Comma, "','")?;
                    let x = self.binder()?;
                    self.expect(Tok::RBracket, "']'")?;
                    return Ok(Frame::Subtract(head, v, x));
                }
                (Kind::Multiplicative, Some(Tok::At)) => {
                    let head = self.occurrence(Some(Kind::Multiplicative))?;
                    self.bump();
                    let l = self.binder()?;
                    self.expect(Tok::Comma, "','")?;
                    let r = self.binder()?;
                    if l == r {
                        let span = self.toks[self.pos - 1].1;
                        return Err(BindingError { span, name: r.to_string(), reason: "is bound twice" }.into());
                    }
                    self.expect(Tok::RBracket, "']'")?;
                    return Ok(Frame::Unpair(head, l, r));
                }
                (_, Some(Tok::Arrow)) => {}
                _ => {
                    self.bump();
                    return self.fail(vec!["'-'", "'?'", "'>'", "'@'"]);
                }
            }
        }
        let v = self.value()?;
        self.expect(Tok::Arrow, "'-'")?;
        let x = self.binder()?;
        self.expect(Tok::RBracket, "']'")?;
        Ok(Frame::Cut(v, x))
    }
}

/// Parses a well-bound term.
pub fn parse(src: &str) -> Result<Term, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, scope: HashMap::new(), binders: HashSet::new(), free: Vec::new(), wildcards: 0 };
    let t = p.term()?;
    if p.peek() != Tok::Eof {
        return p.fail(vec!["end of input"]);
    }
    for (x, span) in &p.free {
        if p.binders.contains(x) {
            return Err(BindingError {
                span: *span,
                name: x.to_string(),
                reason: "occurs outside the scope of its binder",
            }
            .into());
        }
    }
    Ok(number_wildcards(t))
}

/// Gives wildcard binders indices above every named variable.
fn number_wildcards(t: Term) -> Term {
    let mut max = 0;
    t.visit_vars(&mut |x| {
        if !x.wildcard {
            max = max.max(x.index);
        }
    });
    let base = max + 1;
    crate::names::map_vars(t, &mut |x| if x.wildcard { x.with_index(base + x.index) } else { x })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Style {
    #[default]
    Ascii,
    Unicode,
}

/// The connectives of a printing style.
#[derive(Clone, Copy, Debug)]
pub struct Symbols {
    pub lambda: &'static str,
    pub cut: &'static str,
    pub sub: &'static str,
    pub unpair: &'static str,
    pub pair_open: &'static str,
    pub pair_close: &'static str,
}

impl Style {
    pub fn symbols(self) -> Symbols {
        match self {
            Style::Ascii => Symbols { lambda: "\\", cut: "-", sub: ">", unpair: "@", pair_open: "<", pair_close: ">" },
            Style::Unicode => {
                Symbols { lambda: "λ", cut: "→", sub: "▷", unpair: "⊗", pair_open: "⟨", pair_close: "⟩" }
            }
        }
    }
}

pub fn print(t: &Term, style: Style) -> String {
    let mut out = String::new();
    write_term(&mut out, t, style.symbols());
    out
}

pub fn print_value(v: &Value, style: Style) -> String {
    let mut out = String::new();
    write_value(&mut out, v, style.symbols());
    out
}

pub fn write_term(out: &mut String, t: &Term, s: Symbols) {
    use std::fmt::Write;
    let mut cur = t;
    loop {
        match cur {
            Term::Val(v) => return write_value(out, v, s),
            Term::Cut { value, var, body } => {
                out.push('[');
                write_value(out, value, s);
                let _ = write!(out, "{}{}]", s.cut, var);
                cur = body;
            }
            Term::Subtract { head, value, var, body } => {
                let _ = write!(out, "[{}{}", head, s.sub);
                write_value(out, value, s);
                let _ = write!(out, ",{}]", var);
                cur = body;
            }
            Term::Derelict { head, var, body } => {
                let _ = write!(out, "[{}?{}]", head, var);
                cur = body;
            }
            Term::Unpair { head, left, right, body } => {
                let _ = write!(out, "[{}{}{},{}]", head, s.unpair, left, right);
                cur = body;
            }
        }
    }
}

pub fn write_value(out: &mut String, v: &Value, s: Symbols) {
    use std::fmt::Write;
    match v {
        Value::Var(x) => {
            let _ = write!(out, "{x}");
        }
        Value::Abs(x, t) => {
            let _ = write!(out, "{}{}", s.lambda, x);
            write_term(out, t, s);
        }
        Value::Bang(t) => {
            out.push('!');
            write_term(out, t, s);
        }
        Value::Pair(l, r) => {
            out.push_str(s.pair_open);
            write_term(out, l, s);
            out.push(',');
            write_term(out, r, s);
            out.push_str(s.pair_close);
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self, Style::Ascii))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_value(self, Style::Ascii))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::alpha_eq;

    fn m(i: u32) -> Var {
        Var::mult(i)
    }
    fn e(i: u32) -> Var {
        Var::exp(i)
    }

    #[test]
    fn parses_the_running_example() {
        let t = parse("[!\\m1m1-e1][e1?m2][e1?m3][m2>m3,m4]m4").unwrap();
        let expected = Term::cut(
            Value::Bang(Box::new(Term::abs(m(1), Term::var(m(1))))),
            e(1),
            Term::derelict(
                e(1),
                m(2),
                Term::derelict(e(1), m(3), Term::subtract(m(2), Value::Var(m(3)), m(4), Term::var(m(4)))),
            ),
        );
        assert_eq!(t, expected);
        assert_eq!(print(&t, Style::Unicode), "[!λm1m1→e1][e1?m2][e1?m3][m2▷m3,m4]m4");
        assert_eq!(print(&t, Style::Ascii), "[!\\m1m1-e1][e1?m2][e1?m3][m2>m3,m4]m4");
    }

    #[test]
    fn whitespace_and_parentheses_are_accepted() {
        let a = parse("[ !(\\m1 m1) - e1 ] \\m6 m6").unwrap();
        let b = parse("[!\\m1m1-e1]\\m6m6").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unicode_output_reparses() {
        let t = parse("[\\e1[e1?m1]m1-m2][m2>!e2,m3]<m3,\\m4[m4@m5,m6]<m5,m6>>").unwrap();
        let u = print(&t, Style::Unicode);
        assert_eq!(parse(&u).unwrap(), t);
    }

    #[test]
    fn missing_bracket_reports_position_and_expectation() {
        let err = parse("[m1>m2,m3 m3").unwrap_err();
        let ParseError::Syntax(s) = err else { panic!("{err:?}") };
        assert_eq!(s.span.start, 10);
        assert!(s.expected.contains(&"']'"));
    }

    #[test]
    fn rebinding_is_a_binding_error() {
        let err = parse("[!\\m1m1-e1][e1?m1]m1").unwrap_err();
        assert!(matches!(err, ParseError::Binding(BindingError { reason: "is bound twice", .. })));
        let err = parse("[e1?m1][m1>e2,m2]\\e2 m2").unwrap_err();
        assert!(matches!(err, ParseError::Binding(_)), "{err:?}");
    }

    #[test]
    fn wildcards_get_distinct_fresh_indices() {
        let t = parse("[e1?_][e1?_][e1?e2]e2").unwrap();
        let binders = t.binders();
        assert_eq!(binders.len(), 3);
        assert!(binders[0].wildcard && binders[1].wildcard);
        assert_ne!(binders[0], binders[1]);
        assert!(binders[0].index > 2 && binders[1].index > 2);
        assert_eq!(print(&t, Style::Ascii), "[e1?_][e1?_][e1?e2]e2");
        assert!(alpha_eq(&t, &parse("[e1?e7][e1?e8][e1?e2]e2").unwrap()));
    }

    #[test]
    fn wildcard_cannot_occur() {
        assert!(matches!(parse("\\_ _"), Err(ParseError::Binding(_))));
    }

    #[test]
    fn sort_of_heads_is_checked() {
        assert!(matches!(parse("[m1?m2]m2"), Err(ParseError::Syntax(_))));
        assert!(matches!(parse("[e1>e2,m2]m2"), Err(ParseError::Syntax(_))));
    }
}
