//! Integrand expression language.
//!
//! Grammar (recursive descent, `^` right-associative, no implicit
//! multiplication):
//!
//! ```text
//! expr  := term (("+"|"-") term)* ;
//! term  := unary (("*"|"/") unary)* ;
//! unary := "-" unary | power ;
//! power := atom ("^" unary)? ;
//! atom  := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")" ;
//! ```
//!
//! `NUMBER` is a decimal with optional fraction and exponent part; `IDENT`
//! is lowercase ASCII letters followed by optional digits. Variables are
//! `s1..s9` (point coordinates), `t1..t9` (parameters), and the constants
//! `pi`, `e`. Functions: `sin cos exp log sqrt abs` (unary), `pow min max`
//! (binary). `log` is the natural logarithm.
//!
//! Note the precedence of unary minus: `-a^b` parses as `-(a^b)` (the common
//! mathematical convention), while `2^-3` is accepted because the exponent
//! slot takes a full unary.
//!
//! Evaluation is pure and total over floats: `log` of a non-positive value,
//! division by zero and `0^negative` produce a non-finite result, which the
//! estimators' non-finite policy then handles — no exception is raised here.

use core::fmt;

use crate::error::Error;
use crate::{cst, FloatScalar};

/// Maximum accepted source length.
const MAX_SOURCE_BYTES: usize = 64 * 1024;

/// Maximum grammar nesting depth; keeps recursive descent off the guard
/// page for adversarial inputs that fit the size limit (e.g. 40k `(`s).
const MAX_DEPTH: usize = 512;

/// Named variables of the language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    /// Point coordinate `s1..s9` (1-based index).
    S(u8),
    /// Parameter `t1..t9` (1-based index).
    Theta(u8),
    /// The constant π.
    Pi,
    /// Euler's number.
    E,
}

/// Binary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Built-in functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    Pow,
    Min,
    Max,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "pow" => Func::Pow,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Pow => "pow",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arg_count(self) -> usize {
        match self {
            Func::Pow | Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

/// Expression tree node. Immutable after parsing.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// A parsed integrand expression.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    root: Expr,
    max_s: u8,
    max_t: u8,
}

/// Parse failure with the byte offset it occurred at.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("input exceeds 64 KiB")]
    TooLarge,
    #[error("unexpected character {ch:?} at byte {offset}")]
    UnexpectedChar { ch: char, offset: usize },
    #[error("invalid number at byte {offset}")]
    InvalidNumber { offset: usize },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("`{name}` expects {expected} argument(s), got {got}, at byte {offset}")]
    WrongArgCount {
        name: String,
        expected: usize,
        got: usize,
        offset: usize,
    },
    #[error("expected {expected} at byte {offset}")]
    Expected {
        expected: &'static str,
        offset: usize,
    },
    #[error("unexpected end of input at byte {offset}")]
    UnexpectedEnd { offset: usize },
    #[error("unexpected trailing input at byte {offset}")]
    TrailingInput { offset: usize },
    #[error("expression nesting exceeds depth {MAX_DEPTH} at byte {offset}")]
    NestingTooDeep { offset: usize },
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                toks.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                toks.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            b'/' => {
                toks.push((Tok::Slash, i));
                i += 1;
            }
            b'^' => {
                toks.push((Tok::Caret, i));
                i += 1;
            }
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            b',' => {
                toks.push((Tok::Comma, i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    } else {
                        return Err(ParseError::InvalidNumber { offset: start });
                    }
                }
                let value: f64 = text[start..i]
                    .parse()
                    .map_err(|_| ParseError::InvalidNumber { offset: start })?;
                toks.push((Tok::Number(value), start));
            }
            b'a'..=b'z' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_lowercase() {
                    i += 1;
                }
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                toks.push((Tok::Ident(text[start..i].to_string()), start));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('\u{fffd}');
                return Err(ParseError::UnexpectedChar { ch, offset: i });
            }
        }
    }
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|&(_, o)| o)
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t);
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &'static str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(ParseError::Expected {
                expected: what,
                offset: self.offset(),
            }),
            None => Err(ParseError::UnexpectedEnd { offset: self.end }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.descend()?;
        let result = self.expr_body();
        self.depth -= 1;
        result
    }

    fn descend(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::NestingTooDeep {
                offset: self.offset(),
            });
        }
        Ok(())
    }

    fn expr_body(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            self.pos += 1;
            self.descend()?;
            let inner = self.unary();
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(inner?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let exponent = self.unary()?; // right-associative
            return Ok(Expr::Binary(
                BinOp::Pow,
                Box::new(base),
                Box::new(exponent),
            ));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Some(Tok::Number(v)) => Ok(Expr::Number(*v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                if let Some(Tok::LParen) = self.peek() {
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while let Some(Tok::Comma) = self.peek() {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    let func = Func::from_name(&name)
                        .ok_or(ParseError::UnknownFunction {
                            name: name.clone(),
                            offset,
                        })?;
                    if args.len() != func.arg_count() {
                        return Err(ParseError::WrongArgCount {
                            name,
                            expected: func.arg_count(),
                            got: args.len(),
                            offset,
                        });
                    }
                    Ok(Expr::Call(func, args))
                } else {
                    Ok(Expr::Var(parse_var(&name, offset)?))
                }
            }
            Some(_) => Err(ParseError::Expected {
                expected: "a number, variable, function call or `(`",
                offset,
            }),
            None => Err(ParseError::UnexpectedEnd { offset: self.end }),
        }
    }
}

fn parse_var(name: &str, offset: usize) -> Result<Var, ParseError> {
    match name {
        "pi" => return Ok(Var::Pi),
        "e" => return Ok(Var::E),
        _ => {}
    }
    let unknown = || ParseError::UnknownIdentifier {
        name: name.to_string(),
        offset,
    };
    let (head, digits) = name.split_at(1);
    if digits.len() != 1 || !digits.as_bytes()[0].is_ascii_digit() {
        return Err(unknown());
    }
    let index: u8 = digits.parse().map_err(|_| unknown())?;
    if index == 0 {
        return Err(unknown());
    }
    match head {
        "s" => Ok(Var::S(index)),
        "t" => Ok(Var::Theta(index)),
        _ => Err(unknown()),
    }
}

impl ExprAst {
    /// Parse an integrand expression.
    ///
    /// ```
    /// use singmc::ExprAst;
    ///
    /// let ast = ExprAst::parse("exp(-t1*(s1+s2))").unwrap();
    /// ast.validate_arity(2, 1).unwrap();
    /// let v: f64 = ast.eval(&[0.25, 0.5], &[2.0]);
    /// assert!((v - (-1.5f64).exp()).abs() < 1e-15);
    /// ```
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        if text.len() > MAX_SOURCE_BYTES {
            return Err(ParseError::TooLarge);
        }
        let toks = lex(text)?;
        let mut parser = Parser {
            toks: &toks,
            pos: 0,
            end: text.len(),
            depth: 0,
        };
        let root = parser.expr()?;
        if parser.pos < toks.len() {
            return Err(ParseError::TrailingInput {
                offset: parser.offset(),
            });
        }
        let (mut max_s, mut max_t) = (0u8, 0u8);
        walk_vars(&root, &mut max_s, &mut max_t);
        Ok(Self { root, max_s, max_t })
    }

    /// Build an AST from a tree directly (used by generators and tests).
    pub fn from_root(root: Expr) -> Self {
        let (mut max_s, mut max_t) = (0u8, 0u8);
        walk_vars(&root, &mut max_s, &mut max_t);
        Self { root, max_s, max_t }
    }

    /// The expression tree.
    pub fn root(&self) -> &Expr {
        &self.root
    }

    /// Largest coordinate index referenced (0 when none).
    pub fn max_coordinate_index(&self) -> u8 {
        self.max_s
    }

    /// Largest parameter index referenced (0 when none).
    pub fn max_parameter_index(&self) -> u8 {
        self.max_t
    }

    /// Check every referenced variable index against the declared point
    /// arity and parameter dimension.
    pub fn validate_arity(&self, arity: usize, theta_dim: usize) -> Result<(), Error> {
        if usize::from(self.max_s) > arity {
            return Err(Error::Domain(format!(
                "expression references s{} but the point dimension is {arity}",
                self.max_s
            )));
        }
        if usize::from(self.max_t) > theta_dim {
            return Err(Error::Domain(format!(
                "expression references t{} but the parameter dimension is {theta_dim}",
                self.max_t
            )));
        }
        Ok(())
    }

    /// Evaluate at a point and parameter vector.
    ///
    /// Callers must have checked [`ExprAst::validate_arity`] against the
    /// slice lengths; out-of-range variables are a programming error here.
    pub fn eval<T: FloatScalar>(&self, coords: &[T], theta: &[T]) -> T {
        eval_node(&self.root, coords, theta)
    }
}

fn walk_vars(node: &Expr, max_s: &mut u8, max_t: &mut u8) {
    match node {
        Expr::Number(_) => {}
        Expr::Var(Var::S(i)) => *max_s = (*max_s).max(*i),
        Expr::Var(Var::Theta(i)) => *max_t = (*max_t).max(*i),
        Expr::Var(_) => {}
        Expr::Neg(inner) => walk_vars(inner, max_s, max_t),
        Expr::Binary(_, l, r) => {
            walk_vars(l, max_s, max_t);
            walk_vars(r, max_s, max_t);
        }
        Expr::Call(_, args) => {
            for a in args {
                walk_vars(a, max_s, max_t);
            }
        }
    }
}

fn eval_node<T: FloatScalar>(node: &Expr, coords: &[T], theta: &[T]) -> T {
    match node {
        Expr::Number(v) => cst::<T>(*v),
        Expr::Var(Var::S(i)) => coords[usize::from(*i) - 1],
        Expr::Var(Var::Theta(i)) => theta[usize::from(*i) - 1],
        Expr::Var(Var::Pi) => T::PI(),
        Expr::Var(Var::E) => T::E(),
        Expr::Neg(inner) => -eval_node(inner, coords, theta),
        Expr::Binary(op, l, r) => {
            let a = eval_node(l, coords, theta);
            let b = eval_node(r, coords, theta);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
                BinOp::Pow => a.powf(b),
            }
        }
        Expr::Call(func, args) => {
            let a = eval_node(&args[0], coords, theta);
            match func {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Log => a.ln(),
                Func::Sqrt => a.sqrt(),
                Func::Abs => a.abs(),
                Func::Pow => a.powf(eval_node(&args[1], coords, theta)),
                Func::Min => a.min(eval_node(&args[1], coords, theta)),
                Func::Max => a.max(eval_node(&args[1], coords, theta)),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Pretty printing (fully parenthesized; re-parses to the same tree)
// ---------------------------------------------------------------------------

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(v) => write!(f, "{v}"),
            Expr::Var(Var::S(i)) => write!(f, "s{i}"),
            Expr::Var(Var::Theta(i)) => write!(f, "t{i}"),
            Expr::Var(Var::Pi) => write!(f, "pi"),
            Expr::Var(Var::E) => write!(f, "e"),
            Expr::Neg(inner) => write!(f, "(-{inner})"),
            Expr::Binary(op, l, r) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({l} {sym} {r})")
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}
