//! Scalar expressions over named coordinates.
//!
//! Every metric component, warping function and vector-field component in the
//! crate is a [`ScalarExpr`]. Expressions are immutable trees with cheap
//! clones; they can be parsed from text, rendered back, evaluated at a
//! [`Point`] and differentiated symbolically.
//!
//! Grammar accepted by [`parse`]:
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := primary ('^' exponent)?
//! exponent := ['-'] integer | '(' ['-'] integer ['/' integer] ')'
//! primary  := number | ident | func '(' expr ')' | '(' expr ')'
//! func     := 'sin' | 'cos' | 'exp' | 'ln' | 'sqrt'
//! ```
//!
//! Identifiers are coordinates; bind named constants with
//! [`ScalarExpr::bind_constants`].

mod deriv;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parser::{parse, ParseError};

/// Elementary functions admitted by the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> Result<f64, EvalError> {
        match self {
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Exp => Ok(x.exp()),
            Func::Ln if x > 0.0 => Ok(x.ln()),
            Func::Ln => Err(EvalError::Domain(format!("ln of non-positive value {x}"))),
            Func::Sqrt if x >= 0.0 => Ok(x.sqrt()),
            Func::Sqrt => Err(EvalError::Domain(format!("sqrt of negative value {x}"))),
        }
    }
}

/// Reduced rational exponent `num/den` with `den > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Option<Rational> {
        if den == 0 {
            return None;
        }
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i64;
        let sign = if den < 0 { -1 } else { 1 };
        Some(Rational {
            num: sign * num / g,
            den: sign * den / g,
        })
    }

    pub fn integer(n: i64) -> Rational {
        Rational { num: n, den: 1 }
    }

    pub fn num(self) -> i64 {
        self.num
    }

    pub fn den(self) -> i64 {
        self.den
    }

    pub fn is_integer(self) -> bool {
        self.den == 1
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn minus_one(self) -> Rational {
        Rational::new(self.num - self.den, self.den).expect("den is non-zero")
    }

    fn pow(self, base: f64) -> Result<f64, EvalError> {
        if base == 0.0 && self.num < 0 {
            return Err(EvalError::Domain(format!(
                "zero raised to negative power {self}"
            )));
        }
        if self.den == 1 {
            if let Ok(n) = i32::try_from(self.num) {
                return Ok(base.powi(n));
            }
            return Ok(base.powf(self.num as f64));
        }
        if base < 0.0 {
            if self.den % 2 == 0 {
                return Err(EvalError::Domain(format!(
                    "negative base {base} raised to {self}"
                )));
            }
            let magnitude = (-base).powf(self.to_f64());
            return Ok(if self.num % 2 == 0 { magnitude } else { -magnitude });
        }
        Ok(base.powf(self.to_f64()))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// One node of the expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(String),
    Add(ScalarExpr, ScalarExpr),
    Sub(ScalarExpr, ScalarExpr),
    Mul(ScalarExpr, ScalarExpr),
    Div(ScalarExpr, ScalarExpr),
    Pow(ScalarExpr, Rational),
    Neg(ScalarExpr),
    Call(Func, ScalarExpr),
}

/// Immutable, cheaply clonable expression tree.
#[derive(Clone, PartialEq)]
pub struct ScalarExpr(Arc<Node>);

/// Errors raised while evaluating an expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("domain error: {0}")]
    Domain(String),
}

/// Coordinate values at which expressions are evaluated.
///
/// A point belongs to a chart when it supplies a value for each of that
/// chart's coordinates; extra coordinates are ignored, so a point of a
/// product chart also serves as a point of either factor.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    coords: BTreeMap<String, f64>,
}

impl Point {
    pub fn new() -> Point {
        Point::default()
    }

    pub fn from_pairs<I, S>(pairs: I) -> Point
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        Point {
            coords: pairs.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Point {
        self.coords.insert(name.into(), value);
        self
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        self.coords.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.coords.get(name).copied()
    }

    pub fn coords(&self) -> &BTreeMap<String, f64> {
        &self.coords
    }

    pub fn covers<'a>(&self, names: impl IntoIterator<Item = &'a String>) -> bool {
        names.into_iter().all(|n| self.coords.contains_key(n))
    }
}

impl ScalarExpr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn raw(node: Node) -> ScalarExpr {
        ScalarExpr(Arc::new(node))
    }

    pub fn constant(value: f64) -> ScalarExpr {
        ScalarExpr::raw(Node::Const(value))
    }

    pub fn zero() -> ScalarExpr {
        ScalarExpr::constant(0.0)
    }

    pub fn one() -> ScalarExpr {
        ScalarExpr::constant(1.0)
    }

    pub fn var(name: impl Into<String>) -> ScalarExpr {
        ScalarExpr::raw(Node::Var(name.into()))
    }

    pub fn as_constant(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_constant() == Some(1.0)
    }

    pub fn add(&self, rhs: &ScalarExpr) -> ScalarExpr {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => ScalarExpr::constant(a + b),
            (Some(a), _) if a == 0.0 => rhs.clone(),
            (_, Some(b)) if b == 0.0 => self.clone(),
            _ => ScalarExpr::raw(Node::Add(self.clone(), rhs.clone())),
        }
    }

    pub fn sub(&self, rhs: &ScalarExpr) -> ScalarExpr {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => ScalarExpr::constant(a - b),
            (_, Some(b)) if b == 0.0 => self.clone(),
            (Some(a), _) if a == 0.0 => rhs.neg(),
            _ => ScalarExpr::raw(Node::Sub(self.clone(), rhs.clone())),
        }
    }

    pub fn mul(&self, rhs: &ScalarExpr) -> ScalarExpr {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => ScalarExpr::constant(a * b),
            (Some(a), _) | (_, Some(a)) if a == 0.0 => ScalarExpr::zero(),
            (Some(a), _) if a == 1.0 => rhs.clone(),
            (_, Some(b)) if b == 1.0 => self.clone(),
            _ => ScalarExpr::raw(Node::Mul(self.clone(), rhs.clone())),
        }
    }

    /// Quotient. Literal zero numerators are kept so that division by zero
    /// still surfaces at evaluation time.
    pub fn div(&self, rhs: &ScalarExpr) -> ScalarExpr {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) if b != 0.0 => ScalarExpr::constant(a / b),
            (_, Some(b)) if b == 1.0 => self.clone(),
            _ => ScalarExpr::raw(Node::Div(self.clone(), rhs.clone())),
        }
    }

    pub fn powr(&self, exponent: Rational) -> ScalarExpr {
        if exponent == Rational::integer(1) {
            return self.clone();
        }
        if exponent == Rational::integer(0) {
            return ScalarExpr::one();
        }
        if let Some(c) = self.as_constant() {
            if let Ok(v) = exponent.pow(c) {
                if v.is_finite() {
                    return ScalarExpr::constant(v);
                }
            }
        }
        ScalarExpr::raw(Node::Pow(self.clone(), exponent))
    }

    pub fn powi(&self, n: i64) -> ScalarExpr {
        self.powr(Rational::integer(n))
    }

    pub fn neg(&self) -> ScalarExpr {
        match self.node() {
            Node::Const(c) => ScalarExpr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => ScalarExpr::raw(Node::Neg(self.clone())),
        }
    }

    pub fn call(func: Func, arg: &ScalarExpr) -> ScalarExpr {
        if let Some(c) = arg.as_constant() {
            if let Ok(v) = func.apply(c) {
                if v.is_finite() {
                    return ScalarExpr::constant(v);
                }
            }
        }
        ScalarExpr::raw(Node::Call(func, arg.clone()))
    }

    pub fn sin(&self) -> ScalarExpr {
        ScalarExpr::call(Func::Sin, self)
    }

    pub fn cos(&self) -> ScalarExpr {
        ScalarExpr::call(Func::Cos, self)
    }

    pub fn exp(&self) -> ScalarExpr {
        ScalarExpr::call(Func::Exp, self)
    }

    pub fn ln(&self) -> ScalarExpr {
        ScalarExpr::call(Func::Ln, self)
    }

    pub fn sqrt(&self) -> ScalarExpr {
        ScalarExpr::call(Func::Sqrt, self)
    }

    /// Evaluates at `p`. Every variable must be bound by `p`.
    pub fn eval(&self, p: &Point) -> Result<f64, EvalError> {
        match self.node() {
            Node::Const(c) => Ok(*c),
            Node::Var(name) => p.get(name).ok_or_else(|| EvalError::Unbound(name.clone())),
            Node::Add(a, b) => Ok(a.eval(p)? + b.eval(p)?),
            Node::Sub(a, b) => Ok(a.eval(p)? - b.eval(p)?),
            Node::Mul(a, b) => Ok(a.eval(p)? * b.eval(p)?),
            Node::Div(a, b) => {
                let num = a.eval(p)?;
                let den = b.eval(p)?;
                if den == 0.0 {
                    return Err(EvalError::Domain(format!("division by zero in `{self}`")));
                }
                Ok(num / den)
            }
            Node::Pow(base, exponent) => exponent.pow(base.eval(p)?),
            Node::Neg(a) => Ok(-a.eval(p)?),
            Node::Call(func, a) => func.apply(a.eval(p)?),
        }
    }

    /// Names of all variables occurring in the tree.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Var(name) => {
                out.insert(name.clone());
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Node::Pow(a, _) | Node::Neg(a) | Node::Call(_, a) => a.collect_vars(out),
        }
    }

    /// Replaces variables by expressions, rebuilding through the folding
    /// constructors.
    pub fn substitute(&self, map: &BTreeMap<String, ScalarExpr>) -> ScalarExpr {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(name) => map.get(name).cloned().unwrap_or_else(|| self.clone()),
            Node::Add(a, b) => a.substitute(map).add(&b.substitute(map)),
            Node::Sub(a, b) => a.substitute(map).sub(&b.substitute(map)),
            Node::Mul(a, b) => a.substitute(map).mul(&b.substitute(map)),
            Node::Div(a, b) => a.substitute(map).div(&b.substitute(map)),
            Node::Pow(a, r) => a.substitute(map).powr(*r),
            Node::Neg(a) => a.substitute(map).neg(),
            Node::Call(f, a) => ScalarExpr::call(*f, &a.substitute(map)),
        }
    }

    /// Replaces variables named in `constants` by their numeric values.
    pub fn bind_constants(&self, constants: &BTreeMap<String, f64>) -> ScalarExpr {
        let map = constants
            .iter()
            .map(|(k, v)| (k.clone(), ScalarExpr::constant(*v)))
            .collect();
        self.substitute(&map)
    }

    /// Exact symbolic partial derivative with respect to `var`.
    pub fn diff(&self, var: &str) -> ScalarExpr {
        deriv::diff(self, var)
    }

    /// Number of nodes, useful for keeping an eye on derivative swell.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                1 + a.size() + b.size()
            }
            Node::Pow(a, _) | Node::Neg(a) | Node::Call(_, a) => 1 + a.size(),
        }
    }

    fn precedence(&self) -> u8 {
        match self.node() {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Const(c) if c.is_sign_negative() => 3,
            Node::Pow(..) => 4,
            Node::Const(_) | Node::Var(_) | Node::Call(..) => 5,
        }
    }
}

impl fmt::Debug for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarExpr({self})")
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Parentheses are emitted so that parsing the output rebuilds the same
        // tree: a child is wrapped when it binds looser than its parent, or
        // as the right operand of a left-associative operator of equal rank.
        fn child(
            f: &mut fmt::Formatter<'_>,
            e: &ScalarExpr,
            parent: u8,
            right: bool,
        ) -> fmt::Result {
            let p = e.precedence();
            if p < parent || (right && p == parent) {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self.node() {
            Node::Const(c) => write!(f, "{c:?}"),
            Node::Var(name) => write!(f, "{name}"),
            Node::Add(a, b) => {
                child(f, a, 1, false)?;
                f.write_str(" + ")?;
                child(f, b, 1, true)
            }
            Node::Sub(a, b) => {
                child(f, a, 1, false)?;
                f.write_str(" - ")?;
                child(f, b, 1, true)
            }
            Node::Mul(a, b) => {
                child(f, a, 2, false)?;
                f.write_str("*")?;
                child(f, b, 2, true)
            }
            Node::Div(a, b) => {
                child(f, a, 2, false)?;
                f.write_str("/")?;
                child(f, b, 2, true)
            }
            Node::Neg(a) => {
                f.write_str("-")?;
                // `--x` would be read back as a double negation of a literal.
                if a.precedence() <= 3 {
                    write!(f, "({a})")
                } else {
                    write!(f, "{a}")
                }
            }
            Node::Pow(a, r) => {
                if a.precedence() <= 4 {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                if r.is_integer() && r.num() >= 0 {
                    write!(f, "^{}", r.num())
                } else {
                    write!(f, "^({r})")
                }
            }
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl ops::$trait<ScalarExpr> for ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: ScalarExpr) -> ScalarExpr {
                ScalarExpr::$inner(&self, &rhs)
            }
        }
        impl ops::$trait<&ScalarExpr> for &ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: &ScalarExpr) -> ScalarExpr {
                ScalarExpr::$inner(self, rhs)
            }
        }
        impl ops::$trait<f64> for ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: f64) -> ScalarExpr {
                ScalarExpr::$inner(&self, &ScalarExpr::constant(rhs))
            }
        }
        impl ops::$trait<ScalarExpr> for f64 {
            type Output = ScalarExpr;
            fn $method(self, rhs: ScalarExpr) -> ScalarExpr {
                ScalarExpr::$inner(&ScalarExpr::constant(self), &rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl ops::Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::neg(&self)
    }
}

impl ops::Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::neg(self)
    }
}

impl From<f64> for ScalarExpr {
    fn from(value: f64) -> ScalarExpr {
        ScalarExpr::constant(value)
    }
}
