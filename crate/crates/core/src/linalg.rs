//! Small dense linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Matrices whose 1-norm condition estimate exceeds this are treated as
/// singular.
pub const CONDITION_LIMIT: f64 = 1e12;

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Inverse with a condition check.
pub fn checked_inverse(m: &DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>> {
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    let inv = m.clone().lu().try_inverse().ok_or(Error::Singular { what, condition: f64::INFINITY })?;
    let condition = norm1(m) * norm1(&inv);
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(Error::Singular { what, condition });
    }
    Ok(inv)
}

/// Solves `m z = rhs`, rejecting ill-conditioned `m`.
pub fn solve(m: &DMatrix<f64>, rhs: &[f64], what: &'static str) -> Result<Vec<f64>> {
    let inv = checked_inverse(m, what)?;
    Ok((inv * DVector::from_column_slice(rhs)).as_slice().to_vec())
}

pub fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    m.clone().cholesky().is_some()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
