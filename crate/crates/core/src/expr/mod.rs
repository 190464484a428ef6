//! Scalar expressions in named real variables.
//!
//! Every structure function, metric entry, Lagrangian and section
//! coefficient in this crate is an [`Expr`]. Expressions are immutable
//! trees; the constructors in this module ([`Expr::add`], [`Expr::mul`], ...)
//! fold constants and absorb neutral elements, which keeps symbolic
//! derivatives readable without attempting full canonicalization.
//!
//! Grammar (see `docs/expression-grammar.md`):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" unary ] ;
//! primary = number | "pi" | ident | ident "(" expr ")" | "(" expr ")" ;
//! ```

mod diff;
mod eval;
mod parse;
mod print;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use eval::{CompiledExpr, Env, EvalError};
pub use parse::{parse, ParseError, ParseErrorKind};

/// Binary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Elementary functions understood by the parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Sin, Func::Cos, Func::Tan, Func::Exp, Func::Ln, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Applies the function, returning `None` outside its real domain.
    pub(crate) fn apply(self, v: f64) -> Option<f64> {
        match self {
            Func::Sin => Some(v.sin()),
            Func::Cos => Some(v.cos()),
            Func::Tan => Some(v.tan()),
            Func::Exp => Some(v.exp()),
            Func::Ln => (v > 0.0).then(|| v.ln()),
            Func::Sqrt => (v >= 0.0).then(|| v.sqrt()),
        }
    }
}

/// Expression tree.
///
/// Structural equality (`==`) compares trees node by node; it is not a
/// decision procedure for mathematical equality.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    Var(Arc<str>),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Num(0.0)
    }

    pub fn one() -> Expr {
        Expr::Num(1.0)
    }

    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(name: impl AsRef<str>) -> Expr {
        Expr::Var(Arc::from(name.as_ref()))
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_num() == Some(1.0)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            return fold(x + y).map(Expr::Num).unwrap_or_else(|| raw(BinOp::Add, a, b));
        }
        match (a, b) {
            (a, Expr::Neg(b)) => raw(BinOp::Sub, a, *b),
            (Expr::Neg(a), b) => raw(BinOp::Sub, b, *a),
            (a, b) => raw(BinOp::Add, a, b),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return Expr::neg(b);
        }
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            return fold(x - y).map(Expr::Num).unwrap_or_else(|| raw(BinOp::Sub, a, b));
        }
        match b {
            Expr::Neg(b) => raw(BinOp::Add, a, *b),
            b => raw(BinOp::Sub, a, b),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_zero() || b.is_zero() {
            return Expr::zero();
        }
        if a.is_one() {
            return b;
        }
        if b.is_one() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            return fold(x * y).map(Expr::Num).unwrap_or_else(|| raw(BinOp::Mul, a, b));
        }
        if a.as_num() == Some(-1.0) {
            return Expr::neg(b);
        }
        if b.as_num() == Some(-1.0) {
            return Expr::neg(a);
        }
        // 2*(3*y) -> 6*y
        if let (Some(x), Expr::Bin(BinOp::Mul, l, r)) = (a.as_num(), &b) {
            let inner = match (l.as_num(), r.as_num()) {
                (Some(y), _) => Some((y, r)),
                (_, Some(y)) => Some((y, l)),
                _ => None,
            };
            if let Some((y, rest)) = inner {
                if let Some(p) = exact_product(x, y) {
                    return Expr::mul(Expr::Num(p), (**rest).clone());
                }
            }
        }
        raw(BinOp::Mul, a, b)
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if b.is_one() {
            return a;
        }
        if a.is_zero() && !b.is_zero() {
            return Expr::zero();
        }
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            if y != 0.0 {
                if let Some(v) = fold(x / y) {
                    return Expr::Num(v);
                }
            }
        }
        raw(BinOp::Div, a, b)
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        if b.is_zero() {
            return Expr::one();
        }
        if b.is_one() || a.is_one() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            if let Some(v) = eval::checked_pow(x, y) {
                if let Some(v) = fold(v) {
                    return Expr::Num(v);
                }
            }
        }
        raw(BinOp::Pow, a, b)
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            // `0.0 - v` keeps negated zero positive
            Expr::Num(v) => Expr::Num(0.0 - v),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        if let Some(v) = a.as_num() {
            if let Some(r) = f.apply(v).and_then(fold) {
                // Only fold when the result is exactly representable as the
                // obvious value; sin(1) stays symbolic for readability.
                if r == 0.0 || r == 1.0 {
                    return Expr::Num(r);
                }
            }
        }
        Expr::Call(f, Box::new(a))
    }

    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        terms.into_iter().fold(Expr::zero(), Expr::add)
    }

    pub fn scale(c: f64, e: Expr) -> Expr {
        Expr::mul(Expr::Num(c), e)
    }

    /// Node kind used for printing precedence.
    pub(crate) fn node_kind(&self) -> NodeKind {
        match self {
            Expr::Num(v) if v.is_sign_negative() => NodeKind::Neg,
            Expr::Num(_) | Expr::Pi | Expr::Var(_) | Expr::Call(..) => NodeKind::Atom,
            Expr::Neg(_) => NodeKind::Neg,
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => NodeKind::Sum,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => NodeKind::Product,
            Expr::Bin(BinOp::Pow, ..) => NodeKind::Power,
        }
    }

    /// Names of all variables occurring in the expression.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(name) => {
                out.insert(name.to_string());
            }
            Expr::Num(_) | Expr::Pi => {}
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn depends_on(&self, var: &str) -> bool {
        match self {
            Expr::Var(name) => &**name == var,
            Expr::Num(_) | Expr::Pi => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on(var),
            Expr::Bin(_, a, b) => a.depends_on(var) || b.depends_on(var),
        }
    }

    /// Replaces every occurrence of `var` by `value`, re-simplifying on the
    /// way up.
    pub fn substitute(&self, var: &str, value: &Expr) -> Expr {
        self.substitute_with(&|name| (name == var).then(|| value.clone()))
    }

    /// Simultaneous substitution: `lookup` returns the replacement for a
    /// variable name or `None` to keep it.
    pub fn substitute_with(&self, lookup: &dyn Fn(&str) -> Option<Expr>) -> Expr {
        match self {
            Expr::Var(name) => lookup(name).unwrap_or_else(|| self.clone()),
            Expr::Num(_) | Expr::Pi => self.clone(),
            Expr::Neg(a) => Expr::neg(a.substitute_with(lookup)),
            Expr::Call(f, a) => Expr::call(*f, a.substitute_with(lookup)),
            Expr::Bin(op, a, b) => {
                Expr::binary(*op, a.substitute_with(lookup), b.substitute_with(lookup))
            }
        }
    }

    /// Dispatches to the simplifying constructor for `op`.
    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        match op {
            BinOp::Add => Expr::add(a, b),
            BinOp::Sub => Expr::sub(a, b),
            BinOp::Mul => Expr::mul(a, b),
            BinOp::Div => Expr::div(a, b),
            BinOp::Pow => Expr::pow(a, b),
        }
    }

    /// Rebuilds the tree bottom-up through the simplifying constructors.
    pub fn simplify(&self) -> Expr {
        self.substitute_with(&|_| None)
    }

    pub fn differentiate(&self, var: &str) -> Expr {
        diff::differentiate(self, var)
    }

    /// Evaluates against a named environment.
    pub fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        eval::eval_named(self, env)
    }

    /// Resolves variables against a fixed slot order for repeated evaluation.
    pub fn compile(&self, slots: &[String]) -> Result<CompiledExpr, EvalError> {
        CompiledExpr::new(self, slots)
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Pi | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Call(_, a) => 1 + a.node_count(),
            Expr::Bin(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum NodeKind {
    Sum,
    Product,
    Neg,
    Power,
    Atom,
}

fn raw(op: BinOp, a: Expr, b: Expr) -> Expr {
    Expr::Bin(op, Box::new(a), Box::new(b))
}

fn fold(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn exact_product(x: f64, y: f64) -> Option<f64> {
    let p = x * y;
    (p.is_finite() && x.mul_add(y, -p) == 0.0).then_some(p)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_expr(self, f)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::Num(v)
    }
}

/// Compiles every expression against the same slot order.
pub fn compile_all(exprs: &[Expr], slots: &[String]) -> Result<Vec<CompiledExpr>, EvalError> {
    exprs.iter().map(|e| e.compile(slots)).collect()
}

pub fn eval_all(compiled: &[CompiledExpr], values: &[f64]) -> Result<Vec<f64>, EvalError> {
    compiled.iter().map(|c| c.eval(values)).collect()
}

/// Chart coordinate names: `x1..xn` on the base, `y1..ym` on fibers of E,
/// `xi1..xim` on fibers of E*.
pub mod coords {
    pub fn x_names(n: usize) -> Vec<String> {
        (1..=n).map(|a| format!("x{a}")).collect()
    }

    pub fn y_names(m: usize) -> Vec<String> {
        (1..=m).map(|i| format!("y{i}")).collect()
    }

    pub fn xi_names(m: usize) -> Vec<String> {
        (1..=m).map(|i| format!("xi{i}")).collect()
    }

    /// Parses `x3` into `('x', 3)`-style families; returns the family prefix
    /// and the 1-based index.
    pub fn classify(name: &str) -> Option<(&'static str, usize)> {
        for prefix in ["xi", "x", "y"] {
            if let Some(rest) = name.strip_prefix(prefix) {
                if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) && !rest.starts_with('0') {
                    return rest.parse().ok().map(|i| (prefix, i));
                }
            }
        }
        None
    }
}
