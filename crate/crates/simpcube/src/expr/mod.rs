//! A small expression language over `x` and `y`: `+ - * / ^`,
//! parentheses, numeric literals, the constants `pi` and `e`, and the
//! functions `sin`, `cos`, `exp`, `ln`, `sqrt`, `abs`.
//!
//! The grammar is a stable contract:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := unary ('^' factor)?            right-associative
//! unary   := '-' unary | primary
//! primary := number | 'x' | 'y' | 'pi' | 'e'
//!          | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! Consequences worth knowing: `-x^2` parses as `(-x)^2` and `2^x^2`
//! as `2^(x^2)`. Offsets in errors are 0-based character positions.

mod eval;
mod hyperdual;

pub use eval::{
    convexity_probe, eval, eval_hyperdual, eval_hyperdual_with_warnings, eval_with_warnings,
    Axis, ConvexityReport, ConvexityViolation, EvalWarnings, ExprFn,
};
pub use hyperdual::HyperDual;

use std::fmt;

use thiserror::Error;

/// Half-open range of 0-based character offsets into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ast {
    pub kind: AstKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AstKind {
    Number(f64),
    X,
    Y,
    Pi,
    E,
    Neg(Box<Ast>),
    Binary(BinOp, Box<Ast>, Box<Ast>),
    Call(Func, Box<Ast>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: found {found}, expected one of: {}", .expected.join(", "))]
    Syntax {
        offset: usize,
        found: String,
        expected: Vec<&'static str>,
    },

    #[error("unknown name '{name}' at offset {offset}")]
    UnknownName { name: String, offset: usize },

    #[error("domain error at offsets {}..{}: {kind}", .span.start, .span.end)]
    Domain { span: Span, kind: DomainErrorKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainErrorKind {
    DivisionByZero,
    LogNonPositive,
    SqrtNegative,
    PowNonPositiveBase,
    PowZeroNegative,
}

impl fmt::Display for DomainErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainErrorKind::DivisionByZero => "division by zero",
            DomainErrorKind::LogNonPositive => "ln of a non-positive value",
            DomainErrorKind::SqrtNegative => "sqrt of a negative value",
            DomainErrorKind::PowNonPositiveBase => "non-integer power of a non-positive base",
            DomainErrorKind::PowZeroNegative => "zero raised to a negative power",
        })
    }
}

const EXPECTED_OPERAND: &[&str] = &[
    "a number", "'x'", "'y'", "'pi'", "'e'", "a function name", "'-'", "'('",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone, PartialEq)]
struct SpannedTok {
    tok: Tok,
    start: usize,
    end: usize,
}

fn lex(src: &[char]) -> Result<Vec<SpannedTok>, ExprError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < src.len() {
        let c = src[i];
        let simple = match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(SpannedTok { tok, start: i, end: i + 1 });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < src.len() && src[i].is_ascii_digit() {
                i += 1;
            }
            if i < src.len() && src[i] == '.' {
                i += 1;
                while i < src.len() && src[i].is_ascii_digit() {
                    i += 1;
                }
            }
            // Exponent only when digits actually follow; "2*e" keeps
            // its 'e' for the constant.
            if i < src.len() && (src[i] == 'e' || src[i] == 'E') {
                let mut j = i + 1;
                if j < src.len() && (src[j] == '+' || src[j] == '-') {
                    j += 1;
                }
                if j < src.len() && src[j].is_ascii_digit() {
                    i = j;
                    while i < src.len() && src[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = src[start..i].iter().collect();
            let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
                offset: start,
                found: format!("'{text}'"),
                expected: vec!["a number"],
            })?;
            if !value.is_finite() {
                return Err(ExprError::Syntax {
                    offset: start,
                    found: format!("'{text}'"),
                    expected: vec!["a number representable as f64"],
                });
            }
            out.push(SpannedTok { tok: Tok::Num(value), start, end: i });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < src.len() && (src[i].is_ascii_alphanumeric() || src[i] == '_') {
                i += 1;
            }
            let name: String = src[start..i].iter().collect();
            out.push(SpannedTok { tok: Tok::Name(name), start, end: i });
            continue;
        }
        return Err(ExprError::Syntax {
            offset: i,
            found: format!("'{c}'"),
            expected: EXPECTED_OPERAND.to_vec(),
        });
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [char],
    toks: Vec<SpannedTok>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&SpannedTok> {
        self.toks.get(self.pos)
    }

    fn describe_current(&self) -> (usize, String) {
        match self.peek() {
            Some(t) => {
                let text: String = self.src[t.start..t.end].iter().collect();
                (t.start, format!("'{text}'"))
            }
            None => (self.src.len(), "end of input".to_string()),
        }
    }

    fn syntax(&self, expected: &[&'static str]) -> ExprError {
        let (offset, found) = self.describe_current();
        ExprError::Syntax { offset, found, expected: expected.to_vec() }
    }

    fn expr(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.term()?;
        while let Some(op) = self.peek().and_then(|t| match t.tok {
            Tok::Plus => Some(BinOp::Add),
            Tok::Minus => Some(BinOp::Sub),
            _ => None,
        }) {
            self.pos += 1;
            let rhs = self.term()?;
            let span = Span { start: lhs.span.start, end: rhs.span.end };
            lhs = Ast { kind: AstKind::Binary(op, Box::new(lhs), Box::new(rhs)), span };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.factor()?;
        while let Some(op) = self.peek().and_then(|t| match t.tok {
            Tok::Star => Some(BinOp::Mul),
            Tok::Slash => Some(BinOp::Div),
            _ => None,
        }) {
            self.pos += 1;
            let rhs = self.factor()?;
            let span = Span { start: lhs.span.start, end: rhs.span.end };
            lhs = Ast { kind: AstKind::Binary(op, Box::new(lhs), Box::new(rhs)), span };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Ast, ExprError> {
        let base = self.unary()?;
        if matches!(self.peek(), Some(t) if t.tok == Tok::Caret) {
            self.pos += 1;
            let exp = self.factor()?;
            let span = Span { start: base.span.start, end: exp.span.end };
            return Ok(Ast {
                kind: AstKind::Binary(BinOp::Pow, Box::new(base), Box::new(exp)),
                span,
            });
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Ast, ExprError> {
        if let Some(t) = self.peek() {
            if t.tok == Tok::Minus {
                let start = t.start;
                self.pos += 1;
                let inner = self.unary()?;
                let span = Span { start, end: inner.span.end };
                return Ok(Ast { kind: AstKind::Neg(Box::new(inner)), span });
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Ast, ExprError> {
        let t = match self.peek() {
            Some(t) => t.clone(),
            None => return Err(self.syntax(EXPECTED_OPERAND)),
        };
        match t.tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Ast { kind: AstKind::Number(v), span: Span { start: t.start, end: t.end } })
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                let close = match self.peek() {
                    Some(c) if c.tok == Tok::RParen => c.end,
                    _ => return Err(self.syntax(&["')'"])),
                };
                self.pos += 1;
                Ok(Ast { kind: inner.kind, span: Span { start: t.start, end: close } })
            }
            Tok::Name(ref name) => {
                self.pos += 1;
                let atom = match name.as_str() {
                    "x" => Some(AstKind::X),
                    "y" => Some(AstKind::Y),
                    "pi" => Some(AstKind::Pi),
                    "e" => Some(AstKind::E),
                    _ => None,
                };
                if let Some(kind) = atom {
                    return Ok(Ast { kind, span: Span { start: t.start, end: t.end } });
                }
                let func = Func::from_name(name).ok_or_else(|| ExprError::UnknownName {
                    name: name.clone(),
                    offset: t.start,
                })?;
                match self.peek() {
                    Some(p) if p.tok == Tok::LParen => self.pos += 1,
                    _ => return Err(self.syntax(&["'('"])),
                }
                let arg = self.expr()?;
                let close = match self.peek() {
                    Some(c) if c.tok == Tok::RParen => c.end,
                    _ => return Err(self.syntax(&["')'"])),
                };
                self.pos += 1;
                Ok(Ast {
                    kind: AstKind::Call(func, Box::new(arg)),
                    span: Span { start: t.start, end: close },
                })
            }
            _ => Err(self.syntax(EXPECTED_OPERAND)),
        }
    }
}

/// Parses `text` into an [`Ast`]. Offsets in errors count characters
/// from 0.
pub fn parse(text: &str) -> Result<Ast, ExprError> {
    let src: Vec<char> = text.chars().collect();
    let toks = lex(&src)?;
    let mut p = Parser { src: &src, toks, pos: 0 };
    let ast = p.expr()?;
    if p.peek().is_some() {
        return Err(p.syntax(&["an operator", "end of input"]));
    }
    Ok(ast)
}

fn prec(kind: &AstKind) -> u8 {
    match kind {
        AstKind::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        AstKind::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        AstKind::Neg(_) => 3,
        AstKind::Binary(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

impl fmt::Display for Ast {
    /// Prints a canonical form that reparses to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrapped(f: &mut fmt::Formatter<'_>, node: &Ast, wrap: bool) -> fmt::Result {
            if wrap {
                write!(f, "(")?;
                write_node(f, node)?;
                write!(f, ")")
            } else {
                write_node(f, node)
            }
        }

        fn write_node(f: &mut fmt::Formatter<'_>, node: &Ast) -> fmt::Result {
            match &node.kind {
                AstKind::Number(v) => write!(f, "{v}"),
                AstKind::X => write!(f, "x"),
                AstKind::Y => write!(f, "y"),
                AstKind::Pi => write!(f, "pi"),
                AstKind::E => write!(f, "e"),
                AstKind::Neg(inner) => {
                    write!(f, "-")?;
                    // A bare "-a^b" would rebind as (-a)^b, so a Pow
                    // child keeps its parentheses.
                    let wrap =
                        prec(&inner.kind) < 3 || matches!(inner.kind, AstKind::Binary(BinOp::Pow, ..));
                    wrapped(f, inner, wrap)
                }
                AstKind::Binary(op, l, r) => {
                    let my = prec(&node.kind);
                    let sym = match op {
                        BinOp::Add => "+",
                        BinOp::Sub => "-",
                        BinOp::Mul => "*",
                        BinOp::Div => "/",
                        BinOp::Pow => "^",
                    };
                    let wrap_left = prec(&l.kind) < my
                        || (*op == BinOp::Pow && matches!(l.kind, AstKind::Binary(BinOp::Pow, ..)));
                    let wrap_right = prec(&r.kind) < my
                        || (prec(&r.kind) == my && *op != BinOp::Pow);
                    wrapped(f, l, wrap_left)?;
                    write!(f, "{sym}")?;
                    wrapped(f, r, wrap_right)
                }
                AstKind::Call(func, arg) => {
                    write!(f, "{}(", func.name())?;
                    write_node(f, arg)?;
                    write!(f, ")")
                }
            }
        }

        write_node(f, self)
    }
}
