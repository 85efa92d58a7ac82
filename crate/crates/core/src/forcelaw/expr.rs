//! Expression DSL for force functions of the radius `r`.
//!
//! ```text
//! expr   := term (('+'|'-') term)* ;
//! term   := factor (('*'|'/') factor)* ;
//! factor := ('-')? base ('^' exponent)? ;
//! base   := number | 'r' | ident | '(' expr ')' | func '(' expr ')' ;
//! func   := 'sin'|'cos'|'exp'|'ln'|'sqrt' ;
//! ```
//!
//! An exponent is a signed number, a parameter name, or a parenthesised
//! expression that does not mention `r`. Parameters stay symbolic in the
//! tree until [`Expr::bind`] replaces them with constants.

use std::collections::BTreeMap;
use std::fmt;

use super::{EvalError, LawError};

/// Unary functions accepted by the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply(self, x: f64, r: f64) -> Result<f64, EvalError> {
        match self {
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Exp => Ok(x.exp()),
            Func::Ln if x > 0.0 => Ok(x.ln()),
            Func::Ln => Err(EvalError::Domain { op: "ln", r }),
            Func::Sqrt if x >= 0.0 => Ok(x.sqrt()),
            Func::Sqrt => Err(EvalError::Domain { op: "sqrt", r }),
        }
    }
}

/// Expression tree over the radius `r` and named parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Base raised to an exponent that never mentions `r`.
    Pow(Box<Expr>, Box<Expr>),
    Func(Func, Box<Expr>),
}

// Smart constructors: constant folding plus the 0/1 identities, nothing else.

fn konst(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(c) => Some(*c),
        _ => None,
    }
}

fn folded(v: f64, fallback: Expr) -> Expr {
    if v.is_finite() {
        Expr::Const(v)
    } else {
        fallback
    }
}

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => folded(x + y, Expr::Add(Box::new(a), Box::new(b))),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => folded(x - y, Expr::Sub(Box::new(a), Box::new(b))),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => folded(x * y, Expr::Mul(Box::new(a), Box::new(b))),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::Const(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn div(a: Expr, b: Expr) -> Expr {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => folded(x / y, Expr::Div(Box::new(a), Box::new(b))),
        (Some(x), _) if x == 0.0 => Expr::Const(0.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn pow(a: Expr, p: Expr) -> Expr {
    match (konst(&a), konst(&p)) {
        (_, Some(y)) if y == 0.0 => Expr::Const(1.0),
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), Some(y)) => folded(powf_exact(x, y), Expr::Pow(Box::new(a), Box::new(p))),
        _ => Expr::Pow(Box::new(a), Box::new(p)),
    }
}

pub(crate) fn func(f: Func, a: Expr) -> Expr {
    if let Some(x) = konst(&a) {
        if let Ok(v) = f.apply(x, f64::NAN) {
            if v.is_finite() {
                return Expr::Const(v);
            }
        }
    }
    Expr::Func(f, Box::new(a))
}

/// Integer exponents go through `powi` so that negative bases work and small
/// powers are exact.
fn powf_exact(x: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

impl Expr {
    /// Parse DSL text into an unbound tree.
    pub fn parse(source: &str) -> Result<Expr, LawError> {
        let tokens = lex(source)?;
        let mut parser = Parser { tokens, pos: 0 };
        let expr = parser.expr()?;
        match parser.peek() {
            (Token::End, _) => Ok(expr),
            (tok, pos) => Err(LawError::Syntax {
                pos,
                message: format!("unexpected {}", tok.describe()),
            }),
        }
    }

    /// Whether the tree mentions `r`.
    pub fn depends_on_r(&self) -> bool {
        match self {
            Expr::Var => true,
            Expr::Const(_) | Expr::Param(_) => false,
            Expr::Neg(a) | Expr::Func(_, a) => a.depends_on_r(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.depends_on_r() || b.depends_on_r(),
        }
    }

    /// Parameter names in order of first appearance.
    pub fn params(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Param(name) => {
                    if !out.contains(name) {
                        out.push(name.clone());
                    }
                }
                Expr::Const(_) | Expr::Var => {}
                Expr::Neg(a) | Expr::Func(_, a) => walk(a, out),
                Expr::Add(a, b)
                | Expr::Sub(a, b)
                | Expr::Mul(a, b)
                | Expr::Div(a, b)
                | Expr::Pow(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Replace every parameter by its bound value and fold constants.
    pub fn bind(&self, params: &BTreeMap<String, f64>) -> Result<Expr, LawError> {
        Ok(match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var => Expr::Var,
            Expr::Param(name) => match params.get(name) {
                Some(v) => Expr::Const(*v),
                None => return Err(LawError::UnboundParameter(name.clone())),
            },
            Expr::Neg(a) => neg(a.bind(params)?),
            Expr::Add(a, b) => add(a.bind(params)?, b.bind(params)?),
            Expr::Sub(a, b) => sub(a.bind(params)?, b.bind(params)?),
            Expr::Mul(a, b) => mul(a.bind(params)?, b.bind(params)?),
            Expr::Div(a, b) => div(a.bind(params)?, b.bind(params)?),
            Expr::Pow(a, b) => pow(a.bind(params)?, b.bind(params)?),
            Expr::Func(f, a) => func(*f, a.bind(params)?),
        })
    }

    /// Evaluate at radius `r`. Parameters must already be bound.
    pub fn eval(&self, r: f64) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => r,
            Expr::Param(name) => return Err(EvalError::Unbound(name.clone())),
            Expr::Neg(a) => -a.eval(r)?,
            Expr::Add(a, b) => a.eval(r)? + b.eval(r)?,
            Expr::Sub(a, b) => a.eval(r)? - b.eval(r)?,
            Expr::Mul(a, b) => a.eval(r)? * b.eval(r)?,
            Expr::Div(a, b) => {
                let den = b.eval(r)?;
                if den == 0.0 {
                    return Err(EvalError::Domain { op: "division", r });
                }
                a.eval(r)? / den
            }
            Expr::Pow(a, p) => {
                let base = a.eval(r)?;
                let p = p.eval(r)?;
                if base < 0.0 && p.fract() != 0.0 {
                    return Err(EvalError::Domain { op: "power", r });
                }
                if base == 0.0 && p < 0.0 {
                    return Err(EvalError::Domain { op: "power", r });
                }
                powf_exact(base, p)
            }
            Expr::Func(f, a) => f.apply(a.eval(r)?, r)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { r })
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Const(c) if *c < 0.0 => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

/// Symbolic derivative with respect to `r`.
pub fn diff(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Param(_) => Expr::Const(0.0),
        Expr::Var => Expr::Const(1.0),
        Expr::Neg(a) => neg(diff(a)),
        Expr::Add(a, b) => add(diff(a), diff(b)),
        Expr::Sub(a, b) => sub(diff(a), diff(b)),
        Expr::Mul(a, b) => add(
            mul(diff(a), (**b).clone()),
            mul((**a).clone(), diff(b)),
        ),
        Expr::Div(a, b) => div(
            sub(
                mul(diff(a), (**b).clone()),
                mul((**a).clone(), diff(b)),
            ),
            pow((**b).clone(), Expr::Const(2.0)),
        ),
        Expr::Pow(a, p) => mul(
            mul(
                (**p).clone(),
                pow((**a).clone(), sub((**p).clone(), Expr::Const(1.0))),
            ),
            diff(a),
        ),
        Expr::Func(f, a) => {
            let inner = (**a).clone();
            let outer = match f {
                Func::Sin => func(Func::Cos, inner),
                Func::Cos => neg(func(Func::Sin, inner)),
                Func::Exp => func(Func::Exp, inner),
                Func::Ln => div(Expr::Const(1.0), inner),
                Func::Sqrt => div(
                    Expr::Const(1.0),
                    mul(Expr::Const(2.0), func(Func::Sqrt, inner)),
                ),
            };
            mul(outer, diff(a))
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Operands are parenthesised whenever the grammar would otherwise
        // re-associate them, so the output parses back to the same tree.
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
            if e.precedence() < min_prec {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => write!(f, "r"),
            Expr::Param(name) => write!(f, "{name}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                // factor := '-' base ('^' ..)?, so only atoms and powers follow bare.
                child(f, a, 4)
            }
            Expr::Add(a, b) => {
                child(f, a, 1)?;
                write!(f, "+")?;
                child(f, b, 2)
            }
            Expr::Sub(a, b) => {
                child(f, a, 1)?;
                write!(f, "-")?;
                child(f, b, 2)
            }
            Expr::Mul(a, b) => {
                child(f, a, 2)?;
                write!(f, "*")?;
                child(f, b, 3)
            }
            Expr::Div(a, b) => {
                child(f, a, 2)?;
                write!(f, "/")?;
                child(f, b, 3)
            }
            Expr::Pow(a, p) => {
                child(f, a, 5)?;
                write!(f, "^")?;
                match &**p {
                    Expr::Const(_) | Expr::Param(_) => write!(f, "{p}"),
                    _ => write!(f, "({p})"),
                }
            }
            Expr::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
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

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(v) => format!("number {v}"),
            Token::Ident(s) => format!("identifier '{s}'"),
            Token::Plus => "'+'".into(),
            Token::Minus => "'-'".into(),
            Token::Star => "'*'".into(),
            Token::Slash => "'/'".into(),
            Token::Caret => "'^'".into(),
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Token, usize)>, LawError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Some(Token::Plus),
            b'-' => Some(Token::Minus),
            b'*' => Some(Token::Star),
            b'/' => Some(Token::Slash),
            b'^' => Some(Token::Caret),
            b'(' => Some(Token::LParen),
            b')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push((tok, start));
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let value: f64 = text.parse().map_err(|_| LawError::Syntax {
                pos: start,
                message: format!("malformed number '{text}'"),
            })?;
            out.push((Token::Num(value), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Token::Ident(src[start..i].to_string()), start));
        } else {
            let ch = src[start..].chars().next().unwrap_or('?');
            return Err(LawError::Syntax {
                pos: start,
                message: format!("unexpected character '{ch}'"),
            });
        }
    }
    out.push((Token::End, src.len()));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> (Token, usize) {
        self.tokens[self.pos].clone()
    }

    fn bump(&mut self) -> (Token, usize) {
        let t = self.tokens[self.pos].clone();
        if t.0 != Token::End {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Token) -> Result<(), LawError> {
        let (tok, pos) = self.bump();
        if tok == want {
            Ok(())
        } else {
            Err(LawError::Syntax {
                pos,
                message: format!("expected {}, found {}", want.describe(), tok.describe()),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, LawError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().0 {
                Token::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Token::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, LawError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek().0 {
                Token::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Token::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, LawError> {
        let negate = if self.peek().0 == Token::Minus {
            self.bump();
            true
        } else {
            false
        };
        let mut base = self.base()?;
        if self.peek().0 == Token::Caret {
            self.bump();
            let exponent = self.exponent()?;
            base = Expr::Pow(Box::new(base), Box::new(exponent));
        }
        Ok(if negate { Expr::Neg(Box::new(base)) } else { base })
    }

    fn exponent(&mut self) -> Result<Expr, LawError> {
        let (tok, pos) = self.peek();
        let e = match tok {
            Token::Minus | Token::Plus => {
                self.bump();
                match self.bump() {
                    (Token::Num(v), _) if tok == Token::Minus => Expr::Const(-v),
                    (Token::Num(v), _) => Expr::Const(v),
                    (other, p) => {
                        return Err(LawError::Syntax {
                            pos: p,
                            message: format!("expected number after sign, found {}", other.describe()),
                        })
                    }
                }
            }
            Token::Num(v) => {
                self.bump();
                Expr::Const(v)
            }
            Token::Ident(name) if name == "r" => {
                return Err(LawError::NonConstantExponent { pos });
            }
            Token::Ident(name) => {
                self.bump();
                Expr::Param(name)
            }
            Token::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                if inner.depends_on_r() {
                    return Err(LawError::NonConstantExponent { pos });
                }
                inner
            }
            other => {
                return Err(LawError::Syntax {
                    pos,
                    message: format!("expected exponent, found {}", other.describe()),
                })
            }
        };
        Ok(e)
    }

    fn base(&mut self) -> Result<Expr, LawError> {
        let (tok, pos) = self.bump();
        match tok {
            Token::Num(v) => Ok(Expr::Const(v)),
            Token::Ident(name) if name == "r" => Ok(Expr::Var),
            Token::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    self.expect(Token::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Token::RParen)?;
                    Ok(Expr::Func(f, Box::new(arg)))
                } else {
                    Ok(Expr::Param(name))
                }
            }
            Token::LParen => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            other => Err(LawError::Syntax {
                pos,
                message: format!("expected operand, found {}", other.describe()),
            }),
        }
    }
}
