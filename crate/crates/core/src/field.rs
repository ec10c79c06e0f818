//! Scalar fields in 3D with exact first and second derivatives.
//!
//! Fields are evaluated on [`Jet`]s, a second-order forward-mode dual
//! number, so that one closed-form expression gives the exact solution,
//! its gradient (for energy errors) and its Hessian (for the manufactured
//! source term).

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::Point3;

/// Value, gradient and Hessian of a function of `(x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl Jet {
    pub const fn constant(v: f64) -> Self {
        Self { v, g: [0.0; 3], h: [[0.0; 3]; 3] }
    }

    /// The `i`-th coordinate as an independent variable.
    pub fn variable(v: f64, i: usize) -> Self {
        let mut j = Self::constant(v);
        j.g[i] = 1.0;
        j
    }

    pub fn coords(p: Point3) -> [Jet; 3] {
        [Self::variable(p.x, 0), Self::variable(p.y, 1), Self::variable(p.z, 2)]
    }

    fn is_constant(&self) -> bool {
        self.g.iter().all(|&d| d == 0.0) && self.h.iter().flatten().all(|&d| d == 0.0)
    }

    /// `f(self)` given `f`, `f'`, `f''` at `self.v`.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Self::constant(f0);
        for i in 0..3 {
            out.g[i] = f1 * self.g[i];
            for j in 0..3 {
                out.h[i][j] = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        self.chain(self.v.ln(), 1.0 / self.v, -1.0 / (self.v * self.v))
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn abs(self) -> Self {
        let s = if self.v < 0.0 { -1.0 } else { 1.0 };
        self.chain(self.v.abs(), s, 0.0)
    }

    pub fn atan(self) -> Self {
        let d = 1.0 + self.v * self.v;
        self.chain(self.v.atan(), 1.0 / d, -2.0 * self.v / (d * d))
    }

    pub fn powf(self, p: f64) -> Self {
        if p == 0.0 {
            return Self::constant(1.0);
        }
        if p == 1.0 {
            return self;
        }
        let f2 = if p == 2.0 { 2.0 } else { p * (p - 1.0) * self.v.powf(p - 2.0) };
        self.chain(self.v.powf(p), p * self.v.powf(p - 1.0), f2)
    }

    pub fn pow(self, e: Jet) -> Self {
        if e.is_constant() {
            self.powf(e.v)
        } else {
            (e * self.ln()).exp()
        }
    }

    /// Two-argument arctangent `atan2(self, x)`, principal value in `(-π, π]`.
    pub fn atan2(self, x: Jet) -> Self {
        let y = self;
        let r2 = x.v * x.v + y.v * y.v;
        let mut out = Self::constant(y.v.atan2(x.v));
        // θ = atan2(y, x): dθ = (x dy - y dx) / r²
        let (ty, tx) = (x.v / r2, -y.v / r2);
        // second derivatives of θ with respect to (y, x)
        let r4 = r2 * r2;
        let tyy = -2.0 * x.v * y.v / r4;
        let txx = 2.0 * x.v * y.v / r4;
        let txy = (y.v * y.v - x.v * x.v) / r4;
        for i in 0..3 {
            out.g[i] = ty * y.g[i] + tx * x.g[i];
            for j in 0..3 {
                out.h[i][j] = ty * y.h[i][j]
                    + tx * x.h[i][j]
                    + tyy * y.g[i] * y.g[j]
                    + txx * x.g[i] * x.g[j]
                    + txy * (x.g[i] * y.g[j] + y.g[i] * x.g[j]);
            }
        }
        out
    }

    /// Gradient as a point.
    pub fn grad(&self) -> Point3 {
        Point3::from(self.g)
    }

    /// `tᵀ H t`.
    pub fn hess_along(&self, t: Point3) -> f64 {
        let t = t.as_array();
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += t[i] * self.h[i][j] * t[j];
            }
        }
        s
    }
}

impl Add for Jet {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for i in 0..3 {
            self.g[i] += o.g[i];
            for j in 0..3 {
                self.h[i][j] += o.h[i][j];
            }
        }
        self
    }
}

impl Neg for Jet {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Sub for Jet {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul<f64> for Jet {
    type Output = Self;
    fn mul(mut self, s: f64) -> Self {
        self.v *= s;
        for i in 0..3 {
            self.g[i] *= s;
            for j in 0..3 {
                self.h[i][j] *= s;
            }
        }
        self
    }
}

impl Mul for Jet {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::constant(self.v * o.v);
        for i in 0..3 {
            out.g[i] = self.v * o.g[i] + o.v * self.g[i];
            for j in 0..3 {
                out.h[i][j] = self.v * o.h[i][j]
                    + o.v * self.h[i][j]
                    + self.g[i] * o.g[j]
                    + o.g[i] * self.g[j];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let v = o.v;
        self * o.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }
}

/// Something that can be evaluated with derivatives at a 3D point.
pub trait ScalarField: Send + Sync {
    fn eval(&self, p: Point3) -> Jet;

    fn value(&self, p: Point3) -> f64 {
        self.eval(p).v
    }
}

impl<F> ScalarField for F
where
    F: Fn(Point3) -> Jet + Send + Sync,
{
    fn eval(&self, p: Point3) -> Jet {
        self(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl ScalarField for Constant {
    fn eval(&self, _: Point3) -> Jet {
        Jet::constant(self.0)
    }
}

/// `r^{2/3} sin(2/3 (θ + π/2))`, harmonic on the L-shaped domain
/// `(-1,1)² \ [-1,0]²` and vanishing on the two edges of the re-entrant
/// corner at the origin (θ = π and θ = -π/2). The branch cut of θ lies in
/// the removed quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LShapeSolution;

impl ScalarField for LShapeSolution {
    fn eval(&self, p: Point3) -> Jet {
        let [x, y, _] = Jet::coords(p);
        if p.x == 0.0 && p.y == 0.0 {
            return Jet::constant(0.0);
        }
        let mut theta = y.atan2(x);
        if theta.v < -FRAC_PI_2 {
            theta.v += 2.0 * PI;
        }
        let r2 = x * x + y * y;
        let r23 = r2.powf(1.0 / 3.0);
        r23 * ((theta + Jet::constant(FRAC_PI_2)) * (2.0 / 3.0)).sin()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("unexpected character '{0}' at position {1}")]
    BadChar(char, usize),
    #[error("unexpected end of expression")]
    UnexpectedEnd,
    #[error("unexpected token '{0}'")]
    Unexpected(String),
    #[error("unknown identifier '{0}'")]
    Unknown(String),
    #[error("function '{name}' takes {expected} argument(s), got {got}")]
    Arity { name: String, expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Atan,
    Atan2,
    Pow,
}

impl Func {
    fn parse(name: &str) -> Option<(Self, usize)> {
        Some(match name {
            "sin" => (Self::Sin, 1),
            "cos" => (Self::Cos, 1),
            "tan" => (Self::Tan, 1),
            "exp" => (Self::Exp, 1),
            "ln" | "log" => (Self::Ln, 1),
            "sqrt" => (Self::Sqrt, 1),
            "abs" => (Self::Abs, 1),
            "atan" | "arctan" => (Self::Atan, 1),
            "atan2" | "arctan2" => (Self::Atan2, 2),
            "pow" => (Self::Pow, 2),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed arithmetic expression in the global coordinates `x`, `y`, `z`.
///
/// Supports `+ - * / ^`, parentheses, the constants `pi` and `e`, and the
/// functions `sin cos tan exp ln sqrt abs atan atan2 pow`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let root = p.expr()?;
        if let Some(t) = p.tokens.get(p.pos) {
            return Err(ExprError::Unexpected(t.to_string()));
        }
        Ok(Self { source: src.to_string(), root })
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl FromStr for Expr {
    type Err = ExprError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl ScalarField for Expr {
    fn eval(&self, p: Point3) -> Jet {
        eval_node(&self.root, &Jet::coords(p))
    }
}

fn eval_node(n: &Node, vars: &[Jet; 3]) -> Jet {
    match n {
        Node::Num(v) => Jet::constant(*v),
        Node::Var(i) => vars[*i],
        Node::Neg(a) => -eval_node(a, vars),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval_node(a, vars), eval_node(b, vars));
            match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                '/' => a / b,
                _ => a.pow(b),
            }
        }
        Node::Call(f, args) => {
            let a = eval_node(&args[0], vars);
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.sin() / a.cos(),
                Func::Exp => a.exp(),
                Func::Ln => a.ln(),
                Func::Sqrt => a.sqrt(),
                Func::Abs => a.abs(),
                Func::Atan => a.atan(),
                Func::Atan2 => a.atan2(eval_node(&args[1], vars)),
                Func::Pow => a.pow(eval_node(&args[1], vars)),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "{v}"),
            Token::Ident(s) => f.write_str(s),
            Token::Op(c) => write!(f, "{c}"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>, ExprError> {
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
            // exponent part
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
            let v = text.parse().map_err(|_| ExprError::BadChar(c, start))?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(ExprError::BadChar(c, i));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ExprError> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(c)) if *c == op => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(ExprError::Unexpected(t.to_string())),
            None => Err(ExprError::UnexpectedEnd),
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    // right associative, binds tighter than unary minus on its left
    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin('^', Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let tok = self.tokens.get(self.pos).cloned().ok_or(ExprError::UnexpectedEnd)?;
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Node::Num(v)),
            Token::Op('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if self.peek_op() == Some('(') {
                    self.pos += 1;
                    let (func, arity) =
                        Func::parse(&name).ok_or_else(|| ExprError::Unknown(name.clone()))?;
                    let mut args = vec![self.expr()?];
                    while self.peek_op() == Some(',') {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    if args.len() != arity {
                        return Err(ExprError::Arity { name, expected: arity, got: args.len() });
                    }
                    return Ok(Node::Call(func, args));
                }
                match name.as_str() {
                    "x" => Ok(Node::Var(0)),
                    "y" => Ok(Node::Var(1)),
                    "z" => Ok(Node::Var(2)),
                    "pi" => Ok(Node::Num(PI)),
                    "e" => Ok(Node::Num(std::f64::consts::E)),
                    _ => Err(ExprError::Unknown(name)),
                }
            }
            Token::Op(c) => Err(ExprError::Unexpected(c.to_string())),
        }
    }
}
