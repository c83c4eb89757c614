//! Symbolic expressions over the coordinates `x1, x2, x3` and named parameters.
//!
//! Expressions are immutable trees with shared children, so cloning is cheap and
//! values can be handed across threads freely. The textual grammar is
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' factor)?
//! base   := number | ident | '(' expr ')' | func '(' expr ')' | '-' base
//! func   := exp | ln | sin | cos | abs
//! ```
//!
//! `Display` prints a form that parses back to a structurally equal tree.

mod diff;
mod domain;
mod eval;
mod parse;
mod simplify;
mod zero;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use domain::{Domain, DomainError, Sampler};
pub use eval::EvalError;
pub use parse::{parse, parse_with_params, ParseError};
pub use zero::{is_identically_zero, is_identically_zero_seeded, ZeroVerdict, ZERO_SAMPLES};

/// Top-level summands of `e` with the sign each carries.
pub(crate) fn summands_signed(e: &Expr) -> Vec<(f64, &Expr)> {
    let mut out = Vec::new();
    let mut stack = vec![(1.0, e)];
    while let Some((sign, node)) = stack.pop() {
        match node {
            Expr::Add(a, b) => {
                stack.push((sign, b));
                stack.push((sign, a));
            }
            Expr::Sub(a, b) => {
                stack.push((-sign, b));
                stack.push((sign, a));
            }
            other => out.push((sign, other)),
        }
    }
    out
}

/// `base^exponent` with the evaluator's domain rules.
pub(crate) fn power_value(base: f64, exponent: f64) -> Option<f64> {
    eval::power(base, exponent).ok()
}

/// Named parameter bindings. Ordered so that serialized output is deterministic.
pub type Params = BTreeMap<String, f64>;

/// A point in the three coordinates.
pub type Point = [f64; 3];

/// One of the three coordinate axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X1, Axis::X2, Axis::X3];

    /// Zero-based index.
    pub fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
            Axis::X3 => 2,
        }
    }

    /// One-based axis number, as written in `x1`, `x2`, `x3`.
    pub fn number(self) -> usize {
        self.index() + 1
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        Axis::ALL.get(i).copied()
    }

    pub fn from_number(n: usize) -> Option<Axis> {
        n.checked_sub(1).and_then(Axis::from_index)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.number())
    }
}

/// Elementary functions available in the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Abs,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Exp, Func::Ln, Func::Sin, Func::Cos, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree node.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Axis),
    Param(Arc<str>),
    Neg(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, Arc<Expr>),
    Func(Func, Arc<Expr>),
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        // -0.0 and 0.0 print identically; keep a single representation.
        Expr::Const(if c == 0.0 { 0.0 } else { c })
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn var(axis: Axis) -> Expr {
        Expr::Var(axis)
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(Arc::from(name))
    }

    pub fn pow(self, exponent: Expr) -> Expr {
        Expr::Pow(Arc::new(self), Arc::new(exponent))
    }

    pub fn powf(self, exponent: f64) -> Expr {
        self.pow(Expr::constant(exponent))
    }

    pub fn apply(func: Func, arg: Expr) -> Expr {
        Expr::Func(func, Arc::new(arg))
    }

    pub fn exp(self) -> Expr {
        Expr::apply(Func::Exp, self)
    }

    pub fn ln(self) -> Expr {
        Expr::apply(Func::Ln, self)
    }

    pub fn sin(self) -> Expr {
        Expr::apply(Func::Sin, self)
    }

    pub fn cos(self) -> Expr {
        Expr::apply(Func::Cos, self)
    }

    pub fn abs(self) -> Expr {
        Expr::apply(Func::Abs, self)
    }

    /// Product of a list of factors, left-associated. An empty list is `1`.
    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        factors
            .into_iter()
            .reduce(|acc, f| acc * f)
            .unwrap_or_else(Expr::one)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    /// True when the coordinate `axis` occurs anywhere in the tree.
    pub fn depends_on(&self, axis: Axis) -> bool {
        match self {
            Expr::Var(a) => *a == axis,
            Expr::Const(_) | Expr::Param(_) => false,
            Expr::Neg(a) | Expr::Func(_, a) => a.depends_on(axis),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.depends_on(axis) || b.depends_on(axis),
        }
    }

    /// True when no coordinate occurs in the tree.
    pub fn is_coordinate_free(&self) -> bool {
        Axis::ALL.iter().all(|&a| !self.depends_on(a))
    }

    /// Names of all parameters referenced, sorted and deduplicated.
    pub fn param_names(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Param(p) => out.push(p.to_string()),
                Expr::Const(_) | Expr::Var(_) => {}
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
        out.sort();
        out.dedup();
        out
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::Param(_) => 1,
            Expr::Neg(a) | Expr::Func(_, a) => 1 + a.size(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Rebuild the tree bottom-up, replacing leaves via `leaf`.
    fn map_leaves(&self, leaf: &dyn Fn(&Expr) -> Option<Expr>) -> Expr {
        if let Some(r) = leaf(self) {
            return r;
        }
        let m = |a: &Arc<Expr>| Arc::new(a.map_leaves(leaf));
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::Param(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(m(a)),
            Expr::Func(f, a) => Expr::Func(*f, m(a)),
            Expr::Add(a, b) => Expr::Add(m(a), m(b)),
            Expr::Sub(a, b) => Expr::Sub(m(a), m(b)),
            Expr::Mul(a, b) => Expr::Mul(m(a), m(b)),
            Expr::Div(a, b) => Expr::Div(m(a), m(b)),
            Expr::Pow(a, b) => Expr::Pow(m(a), m(b)),
        }
    }

    /// Replace every occurrence of coordinate `axis` by `value`.
    pub fn substitute(&self, axis: Axis, value: &Expr) -> Expr {
        self.map_leaves(&|e| match e {
            Expr::Var(a) if *a == axis => Some(value.clone()),
            _ => None,
        })
    }

    /// Replace all three coordinates simultaneously.
    pub fn substitute_all(&self, values: &[Expr; 3]) -> Expr {
        self.map_leaves(&|e| match e {
            Expr::Var(a) => Some(values[a.index()].clone()),
            _ => None,
        })
    }

    /// Substitute bound parameters by their values. Parameters missing from
    /// `params` are left symbolic.
    pub fn bind(&self, params: &Params) -> Expr {
        self.map_leaves(&|e| match e {
            Expr::Param(p) => params.get(&**p).map(|&v| Expr::constant(v)),
            _ => None,
        })
    }

    /// Like [`Expr::bind`] but leaves the names in `keep` symbolic.
    pub fn bind_except(&self, params: &Params, keep: &[&str]) -> Expr {
        self.map_leaves(&|e| match e {
            Expr::Param(p) if !keep.contains(&&**p) => {
                params.get(&**p).map(|&v| Expr::constant(v))
            }
            _ => None,
        })
    }

    pub fn eval(&self, point: &Point, params: &Params) -> Result<f64, EvalError> {
        eval::eval(self, point, params)
    }

    /// Evaluate an expression that references no parameters.
    pub fn eval_at(&self, point: &Point) -> Result<f64, EvalError> {
        eval::eval(self, point, &Params::new())
    }

    /// Exact partial derivative with respect to `axis`, simplified.
    pub fn diff(&self, axis: Axis) -> Expr {
        simplify::simplify(&diff::derivative(self, axis))
    }

    /// Partial derivative without the final simplification pass.
    pub fn diff_raw(&self, axis: Axis) -> Expr {
        diff::derivative(self, axis)
    }

    /// Gradient with respect to `x1, x2, x3`.
    pub fn gradient(&self) -> [Expr; 3] {
        Axis::ALL.map(|a| self.diff(a))
    }

    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Expr {
        Expr::constant(c)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Expr, ParseError> {
        parse(s)
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl std::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Arc::new(self), Arc::new(rhs))
            }
        }
        impl std::ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$variant(Arc::new(self.clone()), Arc::new(rhs.clone()))
            }
        }
    };
}

binary_op!(Add, add, Add);
binary_op!(Sub, sub, Sub);
binary_op!(Mul, mul, Mul);
binary_op!(Div, div, Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Arc::new(self))
    }
}

// Precedence levels used by the printer: higher binds tighter.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_POW: u8 = 3;
const PREC_BASE: u8 = 4;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => PREC_ADD,
        Expr::Mul(..) | Expr::Div(..) => PREC_MUL,
        Expr::Pow(..) => PREC_POW,
        _ => PREC_BASE,
    }
}

fn write_with_min(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if precedence(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(a) => write!(f, "{a}"),
            Expr::Param(p) => write!(f, "{p}"),
            Expr::Neg(a) => {
                // The parser folds `-<number>` into a constant, so a negated
                // non-negative literal needs explicit parentheses.
                let bare = precedence(a) == PREC_BASE
                    && !matches!(**a, Expr::Const(c) if c >= 0.0);
                if bare {
                    write!(f, "-{a}")
                } else {
                    write!(f, "-({a})")
                }
            }
            Expr::Add(a, b) => {
                write_with_min(f, a, PREC_ADD)?;
                f.write_str(" + ")?;
                write_with_min(f, b, PREC_ADD + 1)
            }
            Expr::Sub(a, b) => {
                write_with_min(f, a, PREC_ADD)?;
                f.write_str(" - ")?;
                write_with_min(f, b, PREC_ADD + 1)
            }
            Expr::Mul(a, b) => {
                write_with_min(f, a, PREC_MUL)?;
                f.write_str("*")?;
                write_with_min(f, b, PREC_MUL + 1)
            }
            Expr::Div(a, b) => {
                write_with_min(f, a, PREC_MUL)?;
                f.write_str("/")?;
                write_with_min(f, b, PREC_MUL + 1)
            }
            Expr::Pow(a, b) => {
                // base position only accepts a `base`; exponent is right-assoc.
                write_with_min(f, a, PREC_BASE)?;
                f.write_str("^")?;
                write_with_min(f, b, PREC_POW)
            }
            Expr::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Expr, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}
