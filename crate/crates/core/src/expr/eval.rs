use std::collections::HashMap;
use std::f64::consts::PI;

use thiserror::Error;

use super::{BinOp, Expr, Func};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable {0:?}")]
    Unbound(String),
    #[error("domain error: {reason} in `{subexpr}`")]
    Domain { reason: &'static str, subexpr: String },
}

/// Variable bindings for named evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Env {
    vars: HashMap<String, f64>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, f64)>) -> Self {
        Env { vars: pairs.into_iter().map(|(k, v)| (k.into(), v)).collect() }
    }

    /// Binds `names[i]` to `values[i]`.
    pub fn from_slots(names: &[String], values: &[f64]) -> Self {
        Env::from_pairs(names.iter().cloned().zip(values.iter().copied()))
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        self.vars.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.vars.get(name).copied()
    }
}

pub(crate) fn checked_pow(base: f64, exp: f64) -> Option<f64> {
    if base < 0.0 && exp.fract() != 0.0 {
        return None;
    }
    if base == 0.0 && exp < 0.0 {
        return None;
    }
    Some(if exp.fract() == 0.0 && exp.abs() <= 64.0 { base.powi(exp as i32) } else { base.powf(exp) })
}

fn apply_bin(op: BinOp, a: f64, b: f64) -> Result<f64, &'static str> {
    match op {
        BinOp::Add => Ok(a + b),
        BinOp::Sub => Ok(a - b),
        BinOp::Mul => Ok(a * b),
        BinOp::Div => {
            if b == 0.0 {
                Err("division by zero")
            } else {
                Ok(a / b)
            }
        }
        BinOp::Pow => checked_pow(a, b).ok_or(if a < 0.0 {
            "negative base with non-integer exponent"
        } else {
            "zero raised to a negative power"
        }),
    }
}

fn func_error(f: Func) -> &'static str {
    match f {
        Func::Ln => "logarithm of a non-positive number",
        Func::Sqrt => "square root of a negative number",
        _ => "function undefined at argument",
    }
}

pub(super) fn eval_named(e: &Expr, env: &Env) -> Result<f64, EvalError> {
    match e {
        Expr::Num(v) => Ok(*v),
        Expr::Pi => Ok(PI),
        Expr::Var(name) => env.get(name).ok_or_else(|| EvalError::Unbound(name.to_string())),
        Expr::Neg(a) => Ok(-eval_named(a, env)?),
        Expr::Call(f, a) => {
            let v = eval_named(a, env)?;
            f.apply(v).ok_or_else(|| EvalError::Domain { reason: func_error(*f), subexpr: e.to_string() })
        }
        Expr::Bin(op, a, b) => {
            let x = eval_named(a, env)?;
            let y = eval_named(b, env)?;
            apply_bin(*op, x, y).map_err(|reason| EvalError::Domain { reason, subexpr: e.to_string() })
        }
    }
}

#[derive(Debug, Clone)]
enum Code {
    Const(f64),
    Slot(usize),
    Neg(Box<Code>),
    Bin(BinOp, Box<Code>, Box<Code>),
    Call(Func, Box<Code>),
}

/// An expression with variables resolved to positions in a value slice.
///
/// Evaluation failures are re-run through the named evaluator so the error
/// names the offending subexpression.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    code: Code,
    source: Expr,
    slots: Vec<String>,
}

impl CompiledExpr {
    pub fn new(e: &Expr, slots: &[String]) -> Result<Self, EvalError> {
        let code = lower(e, slots)?;
        Ok(CompiledExpr { code, source: e.clone(), slots: slots.to_vec() })
    }

    pub fn source(&self) -> &Expr {
        &self.source
    }

    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        debug_assert_eq!(values.len(), self.slots.len());
        run(&self.code, values).ok_or_else(|| {
            let env = Env::from_slots(&self.slots, values);
            match eval_named(&self.source, &env) {
                Err(err) => err,
                Ok(_) => EvalError::Domain { reason: "evaluation failed", subexpr: self.source.to_string() },
            }
        })
    }

    /// True when the expression is the literal zero; lets callers skip work.
    pub fn is_zero(&self) -> bool {
        matches!(self.code, Code::Const(v) if v == 0.0)
    }
}

fn lower(e: &Expr, slots: &[String]) -> Result<Code, EvalError> {
    Ok(match e {
        Expr::Num(v) => Code::Const(*v),
        Expr::Pi => Code::Const(PI),
        Expr::Var(name) => Code::Slot(
            slots.iter().position(|s| s == &**name).ok_or_else(|| EvalError::Unbound(name.to_string()))?,
        ),
        Expr::Neg(a) => Code::Neg(Box::new(lower(a, slots)?)),
        Expr::Call(f, a) => Code::Call(*f, Box::new(lower(a, slots)?)),
        Expr::Bin(op, a, b) => Code::Bin(*op, Box::new(lower(a, slots)?), Box::new(lower(b, slots)?)),
    })
}

fn run(code: &Code, values: &[f64]) -> Option<f64> {
    match code {
        Code::Const(v) => Some(*v),
        Code::Slot(i) => Some(values[*i]),
        Code::Neg(a) => run(a, values).map(|v| -v),
        Code::Call(f, a) => f.apply(run(a, values)?),
        Code::Bin(op, a, b) => apply_bin(*op, run(a, values)?, run(b, values)?).ok(),
    }
}
