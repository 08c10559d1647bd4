//! A small expression language for spectral-parameter-dependent entries.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | pow
//! pow    := atom ('^' integer)?
//! atom   := number | identifier | '(' expr ')'
//! ```
//!
//! `+ - * /` associate to the left and `^` binds tighter than unary minus,
//! so `-u^2` is `-(u^2)`. Exponents are non-negative integer literals. The
//! identifier `i` is always the imaginary unit.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Divisors smaller than this in absolute value are reported as poles.
pub const POLE_THRESHOLD: f64 = 1e-12;

/// Name of the predefined imaginary unit.
pub const IMAGINARY_UNIT: &str = "i";

/// Half-open range of character offsets into the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unbound identifier `{name}` at {span}")]
    UnboundIdentifier { name: String, span: Span },

    #[error("division by a value near zero at {span}")]
    DivisionNearZero { span: Span },

    #[error("`{0}` is reserved and cannot be rebound")]
    ReservedName(String),
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    Number(f64),
    Ident(String),
    Neg(Box<ExprNode>),
    Add(Box<ExprNode>, Box<ExprNode>),
    Sub(Box<ExprNode>, Box<ExprNode>),
    Mul(Box<ExprNode>, Box<ExprNode>),
    Div(Box<ExprNode>, Box<ExprNode>),
    Pow(Box<ExprNode>, u32),
}

/// A parsed expression. Equality is structural and ignores source spans.
#[derive(Clone, Debug)]
pub struct ExprNode {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for ExprKind {
    fn eq(&self, other: &Self) -> bool {
        use ExprKind::*;
        match (self, other) {
            (Number(a), Number(b)) => a == b,
            (Ident(a), Ident(b)) => a == b,
            (Neg(a), Neg(b)) => a == b,
            (Add(a, b), Add(c, d))
            | (Sub(a, b), Sub(c, d))
            | (Mul(a, b), Mul(c, d))
            | (Div(a, b), Div(c, d)) => a == c && b == d,
            (Pow(a, n), Pow(b, m)) => n == m && a == b,
            _ => false,
        }
    }
}

impl PartialEq for ExprNode {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl ExprNode {
    fn new(kind: ExprKind, span: Span) -> Self {
        Self { kind, span }
    }

    pub fn number(x: f64) -> Self {
        Self::new(ExprKind::Number(x), Span { start: 0, end: 0 })
    }

    pub fn ident(name: &str) -> Self {
        Self::new(ExprKind::Ident(name.to_string()), Span { start: 0, end: 0 })
    }

    /// Identifiers referenced anywhere in the tree, sorted and deduplicated.
    pub fn identifiers(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_idents(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_idents(&self, out: &mut Vec<String>) {
        match &self.kind {
            ExprKind::Number(_) => {}
            ExprKind::Ident(name) => out.push(name.clone()),
            ExprKind::Neg(a) | ExprKind::Pow(a, _) => a.collect_idents(out),
            ExprKind::Add(a, b) | ExprKind::Sub(a, b) | ExprKind::Mul(a, b) | ExprKind::Div(a, b) => {
                a.collect_idents(out);
                b.collect_idents(out);
            }
        }
    }

    pub fn depends_on(&self, name: &str) -> bool {
        self.identifiers().iter().any(|n| n == name)
    }

    fn precedence(&self) -> u8 {
        match self.kind {
            ExprKind::Add(..) | ExprKind::Sub(..) => 1,
            ExprKind::Mul(..) | ExprKind::Div(..) => 2,
            ExprKind::Neg(..) => 3,
            ExprKind::Pow(..) => 4,
            ExprKind::Number(_) | ExprKind::Ident(_) => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &ExprNode, min_prec: u8) -> fmt::Result {
    if child.precedence() < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for ExprNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Number(x) => write!(f, "{x}"),
            ExprKind::Ident(name) => f.write_str(name),
            ExprKind::Neg(a) => {
                f.write_str("-")?;
                write_child(f, a, 3)
            }
            ExprKind::Add(a, b) | ExprKind::Sub(a, b) => {
                let op = if matches!(self.kind, ExprKind::Add(..)) { '+' } else { '-' };
                write_child(f, a, 1)?;
                write!(f, " {op} ")?;
                write_child(f, b, 2)
            }
            ExprKind::Mul(a, b) | ExprKind::Div(a, b) => {
                let op = if matches!(self.kind, ExprKind::Mul(..)) { '*' } else { '/' };
                write_child(f, a, 2)?;
                write!(f, "{op}")?;
                write_child(f, b, 3)
            }
            ExprKind::Pow(a, n) => {
                write_child(f, a, 5)?;
                write!(f, "^{n}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Int(u32),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => format!("number {x}"),
            Tok::Int(n) => format!("integer {n}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < chars.len() {
        let c = chars[pos];
        let start = pos;
        if c.is_whitespace() {
            pos += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            pos += 1;
            out.push((tok, Span { start, end: pos }));
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut is_int = true;
            while pos < chars.len() && chars[pos].is_ascii_digit() {
                pos += 1;
            }
            if pos < chars.len() && chars[pos] == '.' {
                is_int = false;
                pos += 1;
                while pos < chars.len() && chars[pos].is_ascii_digit() {
                    pos += 1;
                }
            }
            if pos < chars.len() && (chars[pos] == 'e' || chars[pos] == 'E') {
                let mut look = pos + 1;
                if look < chars.len() && (chars[look] == '+' || chars[look] == '-') {
                    look += 1;
                }
                if look < chars.len() && chars[look].is_ascii_digit() {
                    is_int = false;
                    pos = look;
                    while pos < chars.len() && chars[pos].is_ascii_digit() {
                        pos += 1;
                    }
                }
            }
            let lexeme: String = chars[start..pos].iter().collect();
            let span = Span { start, end: pos };
            let value: f64 = lexeme.parse().map_err(|_| ExprError::Parse {
                offset: start,
                message: format!("malformed number `{lexeme}`"),
            })?;
            let tok = match (is_int, lexeme.parse::<u32>()) {
                (true, Ok(n)) => Tok::Int(n),
                _ => Tok::Num(value),
            };
            out.push((tok, span));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while pos < chars.len() && (chars[pos].is_alphanumeric() || chars[pos] == '_') {
                pos += 1;
            }
            out.push((Tok::Ident(chars[start..pos].iter().collect()), Span { start, end: pos }));
            continue;
        }
        return Err(ExprError::Parse {
            offset: start,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push((Tok::End, Span { start: chars.len(), end: chars.len() }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ExprError> {
        Err(ExprError::Parse {
            offset: self.span().start,
            message: format!("expected {expected}, found {}", self.peek().describe()),
        })
    }

    fn expr(&mut self) -> Result<ExprNode, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let ctor: fn(Box<ExprNode>, Box<ExprNode>) -> ExprKind = match self.peek() {
                Tok::Plus => ExprKind::Add,
                Tok::Minus => ExprKind::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            let span = Span { start: lhs.span.start, end: rhs.span.end };
            lhs = ExprNode::new(ctor(Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn term(&mut self) -> Result<ExprNode, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            let ctor: fn(Box<ExprNode>, Box<ExprNode>) -> ExprKind = match self.peek() {
                Tok::Star => ExprKind::Mul,
                Tok::Slash => ExprKind::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            let span = Span { start: lhs.span.start, end: rhs.span.end };
            lhs = ExprNode::new(ctor(Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn factor(&mut self) -> Result<ExprNode, ExprError> {
        if *self.peek() == Tok::Minus {
            let (_, op) = self.bump();
            let inner = self.factor()?;
            let span = Span { start: op.start, end: inner.span.end };
            return Ok(ExprNode::new(ExprKind::Neg(Box::new(inner)), span));
        }
        self.pow()
    }

    fn pow(&mut self) -> Result<ExprNode, ExprError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        match self.peek().clone() {
            Tok::Int(n) => {
                let (_, s) = self.bump();
                let span = Span { start: base.span.start, end: s.end };
                Ok(ExprNode::new(ExprKind::Pow(Box::new(base), n), span))
            }
            _ => self.fail("integer exponent"),
        }
    }

    fn atom(&mut self) -> Result<ExprNode, ExprError> {
        match self.peek().clone() {
            Tok::Num(x) => {
                let (_, s) = self.bump();
                Ok(ExprNode::new(ExprKind::Number(x), s))
            }
            Tok::Int(n) => {
                let (_, s) = self.bump();
                Ok(ExprNode::new(ExprKind::Number(n as f64), s))
            }
            Tok::Ident(name) => {
                let (_, s) = self.bump();
                Ok(ExprNode::new(ExprKind::Ident(name), s))
            }
            Tok::LParen => {
                let (_, open) = self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.fail("`)`");
                }
                let (_, close) = self.bump();
                Ok(ExprNode::new(inner.kind, Span { start: open.start, end: close.end }))
            }
            _ => self.fail("number, identifier or `(`"),
        }
    }
}

/// Parses `text` into an expression tree.
pub fn parse(text: &str) -> Result<ExprNode, ExprError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail("operator or end of input");
    }
    Ok(e)
}

/// Values for identifiers. `i` is always bound to the imaginary unit.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bindings {
    values: BTreeMap<String, Complex64>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: &str, value: Complex64) -> Result<(), ExprError> {
        if name == IMAGINARY_UNIT {
            return Err(ExprError::ReservedName(name.to_string()));
        }
        self.values.insert(name.to_string(), value);
        Ok(())
    }

    /// Builder-style `set` for names known to be bindable.
    pub fn with(mut self, name: &str, value: impl Into<Complex64>) -> Self {
        self.set(name, value.into()).expect("`i` cannot be rebound");
        self
    }

    pub fn get(&self, name: &str) -> Option<Complex64> {
        if name == IMAGINARY_UNIT {
            Some(Complex64::i())
        } else {
            self.values.get(name).copied()
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }
}

fn powi(mut base: Complex64, mut n: u32) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    acc
}

/// Evaluates `e` under `env` in complex arithmetic.
pub fn evaluate(e: &ExprNode, env: &Bindings) -> Result<Complex64, ExprError> {
    Ok(match &e.kind {
        ExprKind::Number(x) => Complex64::new(*x, 0.0),
        ExprKind::Ident(name) => env.get(name).ok_or_else(|| ExprError::UnboundIdentifier {
            name: name.clone(),
            span: e.span,
        })?,
        ExprKind::Neg(a) => -evaluate(a, env)?,
        ExprKind::Add(a, b) => evaluate(a, env)? + evaluate(b, env)?,
        ExprKind::Sub(a, b) => evaluate(a, env)? - evaluate(b, env)?,
        ExprKind::Mul(a, b) => evaluate(a, env)? * evaluate(b, env)?,
        ExprKind::Div(a, b) => {
            let num = evaluate(a, env)?;
            let den = evaluate(b, env)?;
            if den.norm() < POLE_THRESHOLD {
                return Err(ExprError::DivisionNearZero { span: b.span });
            }
            num / den
        }
        ExprKind::Pow(a, n) => powi(evaluate(a, env)?, *n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(text: &str, env: &Bindings) -> Result<Complex64, ExprError> {
        evaluate(&parse(text).unwrap(), env)
    }

    #[test]
    fn parses_rational_entry_shape() {
        let e = parse("u/(k-u)").unwrap();
        let expected = ExprNode::new(
            ExprKind::Div(
                Box::new(ExprNode::ident("u")),
                Box::new(ExprNode::new(
                    ExprKind::Sub(Box::new(ExprNode::ident("k")), Box::new(ExprNode::ident("u"))),
                    Span { start: 0, end: 0 },
                )),
            ),
            Span { start: 0, end: 0 },
        );
        assert_eq!(e, expected);
        assert_eq!(e.span, Span { start: 0, end: 7 });
    }

    #[test]
    fn pow_binds_tighter_than_negation() {
        let e = parse("-u^2").unwrap();
        assert!(matches!(&e.kind, ExprKind::Neg(inner) if matches!(inner.kind, ExprKind::Pow(_, 2))));
        let env = Bindings::new().with("u", 3.0);
        assert_eq!(evaluate(&e, &env).unwrap(), Complex64::new(-9.0, 0.0));
    }

    #[test]
    fn evaluation_examples() {
        let env = Bindings::new().with("u", 1.0).with("k", 2.0);
        assert_eq!(ev("u/(k-u)", &env).unwrap(), Complex64::new(1.0, 0.0));
        let env = Bindings::new().with("t", 1.0).with("q", 3.0).with("p", 1.0);
        assert_eq!(ev("2*t^2/(q-p)", &env).unwrap(), Complex64::new(1.0, 0.0));
        let env = Bindings::new().with("u", 2.0).with("k", 2.0);
        assert!(matches!(
            ev("u/(k-u)", &env),
            Err(ExprError::DivisionNearZero { span: Span { start: 2, end: 7 } })
        ));
    }

    #[test]
    fn unbound_and_reserved_names() {
        let err = ev("u + w", &Bindings::new().with("u", 1.0)).unwrap_err();
        assert!(matches!(err, ExprError::UnboundIdentifier { ref name, .. } if name == "w"));
        let mut env = Bindings::new();
        assert!(matches!(env.set("i", Complex64::new(2.0, 0.0)), Err(ExprError::ReservedName(_))));
        assert_eq!(ev("i*i", &env).unwrap(), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn error_offset_for_unbalanced_paren() {
        match parse("u/(k-") {
            Err(ExprError::Parse { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn number_forms() {
        let env = Bindings::new();
        assert_eq!(ev("1.5e2", &env).unwrap().re, 150.0);
        assert_eq!(ev(".25", &env).unwrap().re, 0.25);
        assert_eq!(ev("2^0", &env).unwrap().re, 1.0);
        assert!(parse("2^1.5").is_err());
        assert!(parse("2^-1").is_err());
    }

    #[test]
    fn identifiers_are_collected() {
        let e = parse("2*t^2/(q-p) + t").unwrap();
        assert_eq!(e.identifiers(), vec!["p", "q", "t"]);
        assert!(e.depends_on("q"));
        assert!(!e.depends_on("u"));
    }
}
