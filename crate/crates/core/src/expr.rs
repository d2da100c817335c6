//! A small arithmetic expression language in one variable `x`.
//!
//! Grammar (usual precedence, `^` right-associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'x' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | exp | ln | sqrt
//! ```
//!
//! Expressions are evaluated in truncated Taylor arithmetic, which gives
//! exact (up to rounding) derivatives of any order at a point. The
//! smoothness checks on boundary data rely on this.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    X,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expression(format!(
                "unexpected trailing input in {src:?}"
            )));
        }
        Ok(e)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.jet(x, 0).coeffs[0]
    }

    /// Derivatives `f(x), f'(x), ..., f^(order)(x)`.
    pub fn derivatives(&self, x: f64, order: usize) -> Vec<f64> {
        let jet = self.jet(x, order);
        let mut fact = 1.0;
        jet.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k > 0 {
                    fact *= k as f64;
                }
                c * fact
            })
            .collect()
    }

    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        self.derivatives(x, order)[order]
    }

    /// `Some(c)` when the expression does not depend on `x`.
    pub fn as_constant(&self) -> Option<f64> {
        if self.mentions_x() {
            None
        } else {
            Some(self.eval(0.0))
        }
    }

    fn mentions_x(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::X => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.mentions_x(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.mentions_x() || b.mentions_x(),
        }
    }

    pub(crate) fn jet(&self, x: f64, order: usize) -> Jet {
        match self {
            Expr::Const(c) => Jet::constant(*c, order),
            Expr::X => Jet::variable(x, order),
            Expr::Neg(a) => a.jet(x, order).scale(-1.0),
            Expr::Add(a, b) => a.jet(x, order).add(&b.jet(x, order)),
            Expr::Sub(a, b) => a.jet(x, order).sub(&b.jet(x, order)),
            Expr::Mul(a, b) => a.jet(x, order).mul(&b.jet(x, order)),
            Expr::Div(a, b) => a.jet(x, order).div(&b.jet(x, order)),
            Expr::Pow(a, b) => {
                let base = a.jet(x, order);
                match b.as_constant() {
                    Some(p) if p.fract() == 0.0 && p.abs() <= 64.0 => base.powi(p as i32),
                    Some(p) => base.powf(p),
                    None => base.ln().mul(&b.jet(x, order)).exp(),
                }
            }
            Expr::Call(f, a) => {
                let j = a.jet(x, order);
                match f {
                    Func::Sin => j.sin_cos().0,
                    Func::Cos => j.sin_cos().1,
                    Func::Exp => j.exp(),
                    Func::Ln => j.ln(),
                    Func::Sqrt => j.powf(0.5),
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::X => write!(f, "x"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => {
                let name = match func {
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                    Func::Exp => "exp",
                    Func::Ln => "ln",
                    Func::Sqrt => "sqrt",
                };
                write!(f, "{name}({a})")
            }
        }
    }
}

/// Truncated Taylor series `sum c_k t^k` around the evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Jet {
    pub coeffs: Vec<f64>,
}

impl Jet {
    fn constant(c: f64, order: usize) -> Jet {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = c;
        Jet { coeffs }
    }

    fn variable(x: f64, order: usize) -> Jet {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = x;
        if order > 0 {
            coeffs[1] = 1.0;
        }
        Jet { coeffs }
    }

    fn len(&self) -> usize {
        self.coeffs.len()
    }

    fn scale(mut self, s: f64) -> Jet {
        self.coeffs.iter_mut().for_each(|c| *c *= s);
        self
    }

    fn add(&self, o: &Jet) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    fn sub(&self, o: &Jet) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    pub(crate) fn mul(&self, o: &Jet) -> Jet {
        let n = self.len();
        let coeffs = (0..n)
            .map(|k| (0..=k).map(|j| self.coeffs[j] * o.coeffs[k - j]).sum())
            .collect();
        Jet { coeffs }
    }

    fn div(&self, o: &Jet) -> Jet {
        let n = self.len();
        let mut c = vec![0.0; n];
        for k in 0..n {
            let s: f64 = (1..=k).map(|j| o.coeffs[j] * c[k - j]).sum();
            c[k] = (self.coeffs[k] - s) / o.coeffs[0];
        }
        Jet { coeffs: c }
    }

    fn exp(&self) -> Jet {
        let n = self.len();
        let mut e = vec![0.0; n];
        e[0] = self.coeffs[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k)
                .map(|j| j as f64 * self.coeffs[j] * e[k - j])
                .sum();
            e[k] = s / k as f64;
        }
        Jet { coeffs: e }
    }

    fn ln(&self) -> Jet {
        let n = self.len();
        let a0 = self.coeffs[0];
        let mut l = vec![0.0; n];
        l[0] = a0.ln();
        for k in 1..n {
            let s: f64 = (1..k)
                .map(|j| j as f64 * l[j] * self.coeffs[k - j])
                .sum();
            l[k] = (self.coeffs[k] - s / k as f64) / a0;
        }
        Jet { coeffs: l }
    }

    fn sin_cos(&self) -> (Jet, Jet) {
        let n = self.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = self.coeffs[0].sin();
        c[0] = self.coeffs[0].cos();
        for k in 1..n {
            let mut ss = 0.0;
            let mut cc = 0.0;
            for j in 1..=k {
                let ja = j as f64 * self.coeffs[j];
                ss += ja * c[k - j];
                cc += ja * s[k - j];
            }
            s[k] = ss / k as f64;
            c[k] = -cc / k as f64;
        }
        (Jet { coeffs: s }, Jet { coeffs: c })
    }

    fn powi(&self, p: i32) -> Jet {
        let n = self.len();
        let mut acc = Jet::constant(1.0, n - 1);
        let mut base = self.clone();
        let mut e = p.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        if p < 0 {
            Jet::constant(1.0, n - 1).div(&acc)
        } else {
            acc
        }
    }

    fn powf(&self, r: f64) -> Jet {
        let n = self.len();
        let a0 = self.coeffs[0];
        let mut p = vec![0.0; n];
        p[0] = a0.powf(r);
        for k in 1..n {
            let s: f64 = (1..=k)
                .map(|j| ((r + 1.0) * j as f64 - k as f64) * self.coeffs[j] * p[k - j])
                .sum();
            p[k] = s / (k as f64 * a0);
        }
        Jet { coeffs: p }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part, e.g. 1e-3; a bare `e` after a number is not allowed
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::Expression(format!("bad number {text:?}")))?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else if c == '(' {
            out.push(Token::LParen);
            i += 1;
        } else if c == ')' {
            out.push(Token::RParen);
            i += 1;
        } else {
            return Err(Error::Expression(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some(Token::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if let Some(Token::Op('+')) = self.peek() {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Expr::Const(v)),
            Some(Token::LParen) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(e),
                    _ => Err(Error::Expression("missing ')'".into())),
                }
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "x" => Ok(Expr::X),
                "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                "e" => Ok(Expr::Const(std::f64::consts::E)),
                "sin" | "cos" | "exp" | "ln" | "sqrt" => {
                    let func = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "exp" => Func::Exp,
                        "ln" => Func::Ln,
                        _ => Func::Sqrt,
                    };
                    if self.next() != Some(Token::LParen) {
                        return Err(Error::Expression(format!("expected '(' after {name}")));
                    }
                    let arg = self.expr()?;
                    if self.next() != Some(Token::RParen) {
                        return Err(Error::Expression(format!("missing ')' in {name}(...)")));
                    }
                    Ok(Expr::Call(func, Box::new(arg)))
                }
                other => Err(Error::Expression(format!("unknown identifier {other:?}"))),
            },
            Some(t) => Err(Error::Expression(format!("unexpected token {t:?}"))),
            None => Err(Error::Expression("unexpected end of expression".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn parses_and_evaluates() {
        let e = Expr::parse("sin(x) + 0.3*sin(2*x)").unwrap();
        assert!(close(e.eval(PI / 2.0), 1.0, 1e-15));
        let e = Expr::parse("x*(pi - x)").unwrap();
        assert!(close(e.eval(1.0), PI - 1.0, 1e-15));
        let e = Expr::parse("-x^2").unwrap();
        assert_eq!(e.eval(3.0), -9.0);
        let e = Expr::parse("2^3^2").unwrap();
        assert_eq!(e.eval(0.0), 512.0);
        let e = Expr::parse("1e-3*x + 2.5E2").unwrap();
        assert!(close(e.eval(1000.0), 251.0, 1e-15));
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("sin x").is_err());
        assert!(Expr::parse("foo(x)").is_err());
        assert!(Expr::parse("(x + 1").is_err());
        assert!(Expr::parse("x $ 2").is_err());
        assert!(Expr::parse("").is_err());
    }

    #[test]
    fn taylor_derivatives_of_polynomial() {
        let e = Expr::parse("x*(pi - x)").unwrap();
        let d = e.derivatives(0.0, 3);
        assert!(close(d[0], 0.0, 1e-15));
        assert!(close(d[1], PI, 1e-15));
        assert!(close(d[2], -2.0, 1e-15));
        assert!(close(d[3], 0.0, 1e-15));
    }

    #[test]
    fn taylor_derivatives_of_transcendentals() {
        let x = 0.7;
        let e = Expr::parse("sin(3*x)").unwrap();
        let d = e.derivatives(x, 6);
        for (j, dj) in d.iter().enumerate() {
            let expect = 3f64.powi(j as i32) * (3.0 * x + j as f64 * PI / 2.0).sin();
            assert!(close(*dj, expect, 1e-12), "order {j}");
        }
        let e = Expr::parse("exp(2*x)/(1 + x)").unwrap();
        // finite-difference cross-check on the first derivative
        let h = 1e-6;
        let fd = (e.eval(x + h) - e.eval(x - h)) / (2.0 * h);
        assert!(close(e.derivative(x, 1), fd, 1e-8));
        let e = Expr::parse("sqrt(x)").unwrap();
        assert!(close(e.derivative(4.0, 2), -0.25 * 4f64.powf(-1.5), 1e-14));
        let e = Expr::parse("x^x").unwrap();
        assert!(close(e.derivative(2.0, 1), 4.0 * (2f64.ln() + 1.0), 1e-13));
        let e = Expr::parse("ln(x)").unwrap();
        assert!(close(e.derivative(2.0, 3), 2.0 / 8.0, 1e-14));
    }

    #[test]
    fn constants_are_detected() {
        assert_eq!(Expr::parse("2*pi - pi").unwrap().as_constant(), Some(PI));
        assert_eq!(Expr::parse("0").unwrap().as_constant(), Some(0.0));
        assert!(Expr::parse("x - x").unwrap().as_constant().is_none());
    }

    #[test]
    fn negative_integer_powers() {
        let e = Expr::parse("x^-2").unwrap();
        assert!(close(e.eval(2.0), 0.25, 1e-15));
        assert!(close(e.derivative(2.0, 1), -0.25, 1e-14));
        let e = Expr::parse("(x - 3)^3").unwrap();
        assert!(close(e.eval(1.0), -8.0, 1e-15));
    }
}
