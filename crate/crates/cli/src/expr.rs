//! Arithmetic expression grammar for kernels, forcings, and operator bodies.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term  { ('+' | '-') term }
//! term   := power { ('*' | '/') power }
//! power  := unary [ '^' power ]                // '^' is right-associative
//! unary  := '-' unary | atom
//! atom   := NUMBER | IDENT '(' expr ')' | IDENT | '(' expr ')'
//! ```
//!
//! Unary minus binds tighter than the base of `^`, so `-x^2` parses as
//! `(-x)^2` while `2^-3` is `2^(-3)`. Functions: `sin cos exp sqrt abs asin`.
//! Evaluation follows round-to-nearest double semantics and is total on
//! finite inputs except for division by zero and domain errors (negative
//! square roots, `asin` outside [-1, 1], non-finite results), which surface
//! as [`ExprError::Eval`] carrying the source span.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("parse error at offset {offset}: {msg}")]
    Parse { offset: usize, msg: String },
    #[error("unknown variable '{name}' at offset {offset}")]
    UnboundVariable { name: String, offset: usize },
    #[error("evaluation error at {start}..{end}: {msg}")]
    Eval {
        start: usize,
        end: usize,
        msg: String,
    },
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
    Sqrt,
    Abs,
    Asin,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "asin" => Func::Asin,
            _ => return None,
        })
    }
}

/// Expression tree; `V` is the variable representation (name after parsing,
/// slot index after compilation).
#[derive(Debug, Clone, PartialEq)]
pub struct Expr<V> {
    pub node: Node<V>,
    /// Byte span in the source string.
    pub span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node<V> {
    Num(f64),
    Var(V),
    Neg(Box<Expr<V>>),
    Bin(BinOp, Box<Expr<V>>, Box<Expr<V>>),
    Call(Func, Box<Expr<V>>),
}

pub type ParsedExpr = Expr<String>;

/// An expression whose variables are resolved to slot indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledExpr {
    root: Expr<usize>,
    arity: usize,
}

#[derive(Debug, Clone, PartialEq)]
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
}

fn lex(source: &str) -> Result<Vec<(Token, usize, usize)>, ExprError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                let tok = match c {
                    '+' => Token::Plus,
                    '-' => Token::Minus,
                    '*' => Token::Star,
                    '/' => Token::Slash,
                    '^' => Token::Caret,
                    '(' => Token::LParen,
                    _ => Token::RParen,
                };
                tokens.push((tok, i, i + 1));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                if i < bytes.len() && matches!(bytes[i] as char, 'e' | 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && matches!(bytes[j] as char, '+' | '-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &source[start..i];
                let value: f64 = text.parse().map_err(|_| ExprError::Parse {
                    offset: start,
                    msg: format!("malformed number '{text}'"),
                })?;
                tokens.push((Token::Num(value), start, i));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                tokens.push((Token::Ident(source[start..i].to_string()), start, i));
            }
            other => {
                return Err(ExprError::Parse {
                    offset: i,
                    msg: format!("unexpected character '{other}'"),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: &'a [(Token, usize, usize)],
    pos: usize,
    source_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|t| &t.0)
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|t| t.1)
            .unwrap_or(self.source_len)
    }

    fn bump(&mut self) -> Option<(Token, usize, usize)> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(usize, usize), ExprError> {
        match self.bump() {
            Some((tok, s, e)) if tok == want => Ok((s, e)),
            _ => Err(ExprError::Parse {
                offset: self.here().min(self.source_len),
                msg: format!("expected {what}"),
            }),
        }
    }

    fn expr(&mut self) -> Result<ParsedExpr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(op) = match self.peek() {
            Some(Token::Plus) => Some(BinOp::Add),
            Some(Token::Minus) => Some(BinOp::Sub),
            _ => None,
        } {
            self.bump();
            let rhs = self.term()?;
            let span = (lhs.span.0, rhs.span.1);
            lhs = Expr {
                node: Node::Bin(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<ParsedExpr, ExprError> {
        let mut lhs = self.power()?;
        while let Some(op) = match self.peek() {
            Some(Token::Star) => Some(BinOp::Mul),
            Some(Token::Slash) => Some(BinOp::Div),
            _ => None,
        } {
            self.bump();
            let rhs = self.power()?;
            let span = (lhs.span.0, rhs.span.1);
            lhs = Expr {
                node: Node::Bin(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn power(&mut self) -> Result<ParsedExpr, ExprError> {
        let base = self.unary()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.bump();
            let exponent = self.power()?;
            let span = (base.span.0, exponent.span.1);
            return Ok(Expr {
                node: Node::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)),
                span,
            });
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<ParsedExpr, ExprError> {
        if matches!(self.peek(), Some(Token::Minus)) {
            let (_, start, _) = self.bump().expect("peeked");
            let inner = self.unary()?;
            let span = (start, inner.span.1);
            return Ok(Expr {
                node: Node::Neg(Box::new(inner)),
                span,
            });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<ParsedExpr, ExprError> {
        match self.bump() {
            Some((Token::Num(v), s, e)) => Ok(Expr {
                node: Node::Num(v),
                span: (s, e),
            }),
            Some((Token::Ident(name), s, e)) => {
                if matches!(self.peek(), Some(Token::LParen)) {
                    let func = Func::from_name(&name).ok_or_else(|| ExprError::Parse {
                        offset: s,
                        msg: format!("unknown function '{name}'"),
                    })?;
                    self.bump();
                    let arg = self.expr()?;
                    let (_, close) = self.expect(Token::RParen, "closing ')'")?;
                    Ok(Expr {
                        node: Node::Call(func, Box::new(arg)),
                        span: (s, close),
                    })
                } else {
                    Ok(Expr {
                        node: Node::Var(name),
                        span: (s, e),
                    })
                }
            }
            Some((Token::LParen, s, _)) => {
                let inner = self.expr()?;
                let (_, close) = self.expect(Token::RParen, "closing ')'")?;
                Ok(Expr {
                    node: inner.node,
                    span: (s, close),
                })
            }
            Some((tok, s, _)) => Err(ExprError::Parse {
                offset: s,
                msg: format!("unexpected token {tok:?}"),
            }),
            None => Err(ExprError::Parse {
                offset: self.source_len,
                msg: "unexpected end of expression".into(),
            }),
        }
    }
}

/// Parses a source string into an expression tree with named variables.
pub fn parse(source: &str) -> Result<ParsedExpr, ExprError> {
    let tokens = lex(source)?;
    if tokens.is_empty() {
        return Err(ExprError::Parse {
            offset: 0,
            msg: "empty expression".into(),
        });
    }
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        source_len: source.len(),
    };
    let expr = parser.expr()?;
    if parser.pos != tokens.len() {
        return Err(ExprError::Parse {
            offset: parser.here(),
            msg: "trailing input after expression".into(),
        });
    }
    Ok(expr)
}

fn resolve(expr: Expr<String>, vars: &[&str]) -> Result<Expr<usize>, ExprError> {
    let span = expr.span;
    let node = match expr.node {
        Node::Num(v) => Node::Num(v),
        Node::Var(name) => {
            let slot = vars.iter().position(|v| *v == name).ok_or_else(|| {
                ExprError::UnboundVariable {
                    name,
                    offset: span.0,
                }
            })?;
            Node::Var(slot)
        }
        Node::Neg(inner) => Node::Neg(Box::new(resolve(*inner, vars)?)),
        Node::Bin(op, a, b) => Node::Bin(
            op,
            Box::new(resolve(*a, vars)?),
            Box::new(resolve(*b, vars)?),
        ),
        Node::Call(f, a) => Node::Call(f, Box::new(resolve(*a, vars)?)),
    };
    Ok(Expr { node, span })
}

/// Parses and binds variables against an ordered legal-variable list; any
/// other identifier is rejected by name.
pub fn compile(source: &str, vars: &[&str]) -> Result<CompiledExpr, ExprError> {
    let parsed = parse(source)?;
    Ok(CompiledExpr {
        root: resolve(parsed, vars)?,
        arity: vars.len(),
    })
}

impl CompiledExpr {
    /// Evaluates with `slots[i]` bound to the i-th legal variable.
    pub fn eval(&self, slots: &[f64]) -> Result<f64, ExprError> {
        assert_eq!(slots.len(), self.arity, "slot count must match compile-time arity");
        eval_node(&self.root, slots)
    }
}

fn eval_node(expr: &Expr<usize>, slots: &[f64]) -> Result<f64, ExprError> {
    let (start, end) = expr.span;
    let err = |msg: &str| ExprError::Eval {
        start,
        end,
        msg: msg.into(),
    };
    let value = match &expr.node {
        Node::Num(v) => *v,
        Node::Var(slot) => slots[*slot],
        Node::Neg(inner) => -eval_node(inner, slots)?,
        Node::Bin(op, a, b) => {
            let x = eval_node(a, slots)?;
            let y = eval_node(b, slots)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == 0.0 {
                        return Err(err("division by zero"));
                    }
                    x / y
                }
                BinOp::Pow => x.powf(y),
            }
        }
        Node::Call(f, a) => {
            let x = eval_node(a, slots)?;
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Abs => x.abs(),
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(err("square root of a negative value"));
                    }
                    x.sqrt()
                }
                Func::Asin => {
                    if !(-1.0..=1.0).contains(&x) {
                        return Err(err("asin argument outside [-1, 1]"));
                    }
                    x.asin()
                }
            }
        }
    };
    if !value.is_finite() {
        return Err(err("non-finite result"));
    }
    Ok(value)
}

/// Variable names used by an expression source, for validation diagnostics.
pub fn free_variables(source: &str) -> Result<Vec<(String, usize)>, ExprError> {
    let parsed = parse(source)?;
    let mut vars = Vec::new();
    collect_vars(&parsed, &mut vars);
    Ok(vars)
}

fn collect_vars(expr: &ParsedExpr, out: &mut Vec<(String, usize)>) {
    match &expr.node {
        Node::Var(name) => {
            if !out.iter().any(|(n, _)| n == name) {
                out.push((name.clone(), expr.span.0));
            }
        }
        Node::Neg(a) | Node::Call(_, a) => collect_vars(a, out),
        Node::Bin(_, a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
        Node::Num(_) => {}
    }
}
