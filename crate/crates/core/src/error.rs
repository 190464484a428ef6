use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("{what} may only depend on {allowed}, found variable {name:?}")]
    StrayVariable { what: String, allowed: String, name: String },
    #[error("singular matrix ({what}): condition estimate {condition:e}")]
    Singular { what: &'static str, condition: f64 },
    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unknown monitor {0:?}")]
    UnknownMonitor(String),
    #[error("field evaluation failed at RK4 stage {stage} (t = {t}): {source}")]
    Stage { stage: usize, t: f64, source: Box<Error> },
}

impl Error {
    /// True for failures that signal a degenerate point of the dynamics
    /// (singular Hessian or metric, failed Legendre inversion).
    pub fn is_degeneracy(&self) -> bool {
        match self {
            Error::Singular { .. } | Error::NoConvergence { .. } => true,
            Error::Stage { source, .. } => source.is_degeneracy(),
            _ => false,
        }
    }
}
