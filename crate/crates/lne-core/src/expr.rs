//! A small expression language for parametrized arcs.
//!
//! Grammar: floating literals, the parameter `t`, the constant `pi`,
//! `+ - * / ^` with usual precedence (`^` binds tightest, right-assoc),
//! unary minus, parentheses, and the one-argument functions
//! `sin cos tan exp ln log sqrt abs sinh cosh asinh atan`.
//!
//! Derivatives come from forward-mode dual numbers, so every parsed arc
//! is C¹ wherever its expression is.

use std::fmt;
use std::rc::Rc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sinh,
    Cosh,
    Asinh,
    Atan,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "asinh" => Func::Asinh,
            "atan" => Func::Atan,
            _ => return None,
        })
    }

    fn name(&self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Asinh => "asinh",
            Func::Atan => "atan",
        }
    }

    fn apply(&self, v: Dual) -> Dual {
        match self {
            Func::Sin => Dual { v: v.v.sin(), d: v.d * v.v.cos() },
            Func::Cos => Dual { v: v.v.cos(), d: -v.d * v.v.sin() },
            Func::Tan => {
                let c = v.v.cos();
                Dual { v: v.v.tan(), d: v.d / (c * c) }
            }
            Func::Exp => {
                let e = v.v.exp();
                Dual { v: e, d: v.d * e }
            }
            Func::Ln => Dual { v: v.v.ln(), d: v.d / v.v },
            Func::Sqrt => {
                let s = v.v.sqrt();
                Dual { v: s, d: v.d / (2.0 * s) }
            }
            Func::Abs => Dual { v: v.v.abs(), d: v.d * v.v.signum() },
            Func::Sinh => Dual { v: v.v.sinh(), d: v.d * v.v.cosh() },
            Func::Cosh => Dual { v: v.v.cosh(), d: v.d * v.v.sinh() },
            Func::Asinh => Dual { v: v.v.asinh(), d: v.d / (1.0 + v.v * v.v).sqrt() },
            Func::Atan => Dual { v: v.v.atan(), d: v.d / (1.0 + v.v * v.v) },
        }
    }
}

/// Value together with its derivative in `t`.
#[derive(Debug, Clone, Copy)]
struct Dual {
    v: f64,
    d: f64,
}

#[derive(Debug, Clone)]
enum Ast {
    Const(f64),
    Var,
    Neg(Rc<Ast>),
    Add(Rc<Ast>, Rc<Ast>),
    Sub(Rc<Ast>, Rc<Ast>),
    Mul(Rc<Ast>, Rc<Ast>),
    Div(Rc<Ast>, Rc<Ast>),
    Pow(Rc<Ast>, Rc<Ast>),
    Call(Func, Rc<Ast>),
}

impl Ast {
    fn eval(&self, t: f64) -> Dual {
        match self {
            Ast::Const(c) => Dual { v: *c, d: 0.0 },
            Ast::Var => Dual { v: t, d: 1.0 },
            Ast::Neg(a) => {
                let a = a.eval(t);
                Dual { v: -a.v, d: -a.d }
            }
            Ast::Add(a, b) => {
                let (a, b) = (a.eval(t), b.eval(t));
                Dual { v: a.v + b.v, d: a.d + b.d }
            }
            Ast::Sub(a, b) => {
                let (a, b) = (a.eval(t), b.eval(t));
                Dual { v: a.v - b.v, d: a.d - b.d }
            }
            Ast::Mul(a, b) => {
                let (a, b) = (a.eval(t), b.eval(t));
                Dual { v: a.v * b.v, d: a.d * b.v + a.v * b.d }
            }
            Ast::Div(a, b) => {
                let (a, b) = (a.eval(t), b.eval(t));
                Dual { v: a.v / b.v, d: (a.d * b.v - a.v * b.d) / (b.v * b.v) }
            }
            Ast::Pow(a, b) => {
                let (a, b) = (a.eval(t), b.eval(t));
                if b.d == 0.0 {
                    // constant exponent: handle integer powers of negative bases
                    let e = b.v;
                    if e.fract() == 0.0 && e.abs() < 64.0 {
                        let v = a.v.powi(e as i32);
                        Dual { v, d: a.d * e * a.v.powi(e as i32 - 1) }
                    } else {
                        let v = a.v.powf(e);
                        Dual { v, d: a.d * e * a.v.powf(e - 1.0) }
                    }
                } else {
                    // general a^b = exp(b ln a)
                    let v = a.v.powf(b.v);
                    Dual { v, d: v * (b.d * a.v.ln() + b.v * a.d / a.v) }
                }
            }
            Ast::Call(f, a) => f.apply(a.eval(t)),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        let my = match self {
            Ast::Const(_) | Ast::Var | Ast::Call(..) => 4,
            Ast::Neg(_) => 3,
            Ast::Pow(..) => 3,
            Ast::Mul(..) | Ast::Div(..) => 2,
            Ast::Add(..) | Ast::Sub(..) => 1,
        };
        if my < prec {
            write!(f, "(")?;
        }
        match self {
            Ast::Const(c) => write!(f, "{c}")?,
            Ast::Var => write!(f, "t")?,
            Ast::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 4)?;
            }
            Ast::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            Ast::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            Ast::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)?;
            }
            Ast::Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, 3)?;
            }
            Ast::Pow(a, b) => {
                a.fmt_prec(f, 4)?;
                write!(f, "^")?;
                b.fmt_prec(f, 3)?;
            }
            Ast::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
        }
        if my < prec {
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// A parsed expression of the single parameter `t`.
#[derive(Clone)]
pub struct Expr {
    ast: Rc<Ast>,
    source: String,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.source.is_empty() {
            self.ast.fmt_prec(f, 0)
        } else {
            write!(f, "{}", self.source)
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0, src };
        let ast = p.expr(0)?;
        if p.pos != p.tokens.len() {
            return Err(Error::Eval(format!(
                "unexpected trailing input in expression `{src}`"
            )));
        }
        Ok(Expr { ast: Rc::new(ast), source: src.trim().to_string() })
    }

    pub fn constant(c: f64) -> Expr {
        Expr { ast: Rc::new(Ast::Const(c)), source: String::new() }
    }

    pub fn var() -> Expr {
        Expr { ast: Rc::new(Ast::Var), source: String::new() }
    }

    /// Value at `t`; errors on non-finite results.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let r = self.ast.eval(t);
        if r.v.is_finite() {
            Ok(r.v)
        } else {
            Err(Error::Eval(format!("`{self}` is not finite at t = {t}")))
        }
    }

    /// Value and derivative at `t`.
    pub fn eval_with_derivative(&self, t: f64) -> Result<(f64, f64)> {
        let r = self.ast.eval(t);
        if r.v.is_finite() && r.d.is_finite() {
            Ok((r.v, r.d))
        } else {
            Err(Error::Eval(format!("`{self}` is not C1 at t = {t}")))
        }
    }

    /// Value at `t` without the finiteness check (±∞ treated as data).
    pub fn eval_unchecked(&self, t: f64) -> f64 {
        self.ast.eval(t).v
    }

    fn binary(op: fn(Rc<Ast>, Rc<Ast>) -> Ast, a: &Expr, b: &Expr) -> Expr {
        Expr { ast: Rc::new(op(a.ast.clone(), b.ast.clone())), source: String::new() }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        Expr::binary(Ast::Add, self, other)
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        Expr::binary(Ast::Sub, self, other)
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        Expr::binary(Ast::Mul, self, other)
    }

    pub fn div(&self, other: &Expr) -> Expr {
        Expr::binary(Ast::Div, self, other)
    }
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

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || bytes[i] == '.'
                        || ((bytes[i] == 'e' || bytes[i] == 'E')
                            && i + 1 < bytes.len()
                            && (bytes[i + 1].is_ascii_digit()
                                || bytes[i + 1] == '+'
                                || bytes[i + 1] == '-'))
                        || ((bytes[i] == '+' || bytes[i] == '-')
                            && i > start
                            && (bytes[i - 1] == 'e' || bytes[i - 1] == 'E')))
                {
                    i += 1;
                }
                let text: String = bytes[start..i].iter().collect();
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::Eval(format!("bad numeric literal `{text}`")))?;
                out.push(Token::Num(v));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                out.push(Token::Ident(bytes[start..i].iter().collect()));
            }
            other => {
                return Err(Error::Eval(format!("unexpected character `{other}` in expression")))
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    // precedence climbing: 0 = add/sub, 1 = mul/div, then unary, then power
    fn expr(&mut self, min_prec: u8) -> Result<Ast> {
        let mut lhs = self.unary()?;
        loop {
            let (prec, tok) = match self.peek() {
                Some(Token::Plus) => (1, Token::Plus),
                Some(Token::Minus) => (1, Token::Minus),
                Some(Token::Star) => (2, Token::Star),
                Some(Token::Slash) => (2, Token::Slash),
                _ => break,
            };
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.expr(prec + 1)?;
            lhs = match tok {
                Token::Plus => Ast::Add(Rc::new(lhs), Rc::new(rhs)),
                Token::Minus => Ast::Sub(Rc::new(lhs), Rc::new(rhs)),
                Token::Star => Ast::Mul(Rc::new(lhs), Rc::new(rhs)),
                Token::Slash => Ast::Div(Rc::new(lhs), Rc::new(rhs)),
                _ => unreachable!(),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ast> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.bump();
            return Ok(Ast::Neg(Rc::new(self.unary()?)));
        }
        if matches!(self.peek(), Some(Token::Plus)) {
            self.bump();
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.bump();
            // right-associative; exponent may carry a unary minus
            let exp = self.unary()?;
            return Ok(Ast::Pow(Rc::new(base), Rc::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Ast> {
        match self.bump() {
            Some(Token::Num(v)) => Ok(Ast::Const(v)),
            Some(Token::Ident(name)) => {
                if let Some(f) = Func::from_name(&name) {
                    match self.bump() {
                        Some(Token::LParen) => {}
                        _ => {
                            return Err(Error::Eval(format!(
                                "function `{name}` requires parentheses in `{}`",
                                self.src
                            )))
                        }
                    }
                    let arg = self.expr(0)?;
                    match self.bump() {
                        Some(Token::RParen) => Ok(Ast::Call(f, Rc::new(arg))),
                        _ => Err(Error::Eval(format!("unclosed call to `{name}`"))),
                    }
                } else {
                    match name.as_str() {
                        "t" | "x" => Ok(Ast::Var),
                        "pi" => Ok(Ast::Const(std::f64::consts::PI)),
                        other => {
                            Err(Error::Eval(format!("unknown identifier `{other}` in expression")))
                        }
                    }
                }
            }
            Some(Token::LParen) => {
                let inner = self.expr(0)?;
                match self.bump() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(Error::Eval(format!("unbalanced parentheses in `{}`", self.src))),
                }
            }
            other => Err(Error::Eval(format!(
                "expected a value, found {other:?} in `{}`",
                self.src
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_eval() {
        let e = Expr::parse("exp(t)*cos(2*pi*t)").unwrap();
        let v = e.eval(0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let v = e.eval(1.0).unwrap();
        assert!((v - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn derivative_via_duals() {
        let e = Expr::parse("t^2 + 3*t").unwrap();
        let (v, d) = e.eval_with_derivative(2.0).unwrap();
        assert!((v - 10.0).abs() < 1e-15);
        assert!((d - 7.0).abs() < 1e-15);

        let e = Expr::parse("t^0.5*sin(t)").unwrap();
        let (_, d) = e.eval_with_derivative(4.0).unwrap();
        let expect = 0.5 * 4.0f64.powf(-0.5) * 4.0f64.sin() + 4.0f64.powf(0.5) * 4.0f64.cos();
        assert!((d - expect).abs() < 1e-12);
    }

    #[test]
    fn fractional_power_precedence() {
        let e = Expr::parse("t^-0.5*sin(t)").unwrap();
        let v = e.eval(4.0).unwrap();
        assert!((v - 0.5 * 4.0f64.sin()).abs() < 1e-15);
        // unary minus binds below power: -t^2 = -(t^2)
        let e = Expr::parse("-t^2").unwrap();
        assert!((e.eval(3.0).unwrap() + 9.0).abs() < 1e-15);
    }

    #[test]
    fn pole_reports_eval_error() {
        let e = Expr::parse("1/((1-t)*(1+t))").unwrap();
        assert!(e.eval(1.0).is_err());
        assert!((e.eval(0.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("t +* 2").is_err());
        assert!(Expr::parse("foo(t)").is_err());
        assert!(Expr::parse("(t").is_err());
        assert!(Expr::parse("t 2").is_err());
    }

    #[test]
    fn ast_composition() {
        let x = Expr::parse("cos(t)").unwrap();
        let y = Expr::parse("sin(t)").unwrap();
        // x/(x^2+y^2) on the unit circle is just cos(t)
        let n2 = x.mul(&x).add(&y.mul(&y));
        let inv_x = x.div(&n2);
        for &t in &[0.3, 1.1, 2.9] {
            assert!((inv_x.eval(t).unwrap() - t.cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn negative_base_integer_power() {
        let e = Expr::parse("t^3").unwrap();
        assert!((e.eval(-2.0).unwrap() + 8.0).abs() < 1e-15);
        let (_, d) = e.eval_with_derivative(-2.0).unwrap();
        assert!((d - 12.0).abs() < 1e-15);
    }
}
