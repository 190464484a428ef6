use std::fmt;

use rayon::prelude::*;

use crate::error::Result;
use crate::expr::{CompiledExpr, Expr};

/// Outcome of an identity checked by evaluation at sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    /// Label of the worst residual and the sample where it occurred.
    pub worst: Option<String>,
    pub samples: usize,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: max residual {:e} (tolerance {:e}, {} samples)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.max_residual,
            self.tolerance,
            self.samples
        )?;
        if let (false, Some(w)) = (self.passed, &self.worst) {
            write!(f, "; worst: {w}")?;
        }
        Ok(())
    }
}

impl CheckReport {
    pub fn from_max(name: &str, max_residual: f64, worst: Option<String>, tolerance: f64, samples: usize) -> Self {
        CheckReport {
            name: name.to_string(),
            passed: max_residual < tolerance,
            max_residual,
            tolerance,
            worst,
            samples,
        }
    }
}

/// Labeled expressions that must vanish, over a fixed variable order.
#[derive(Debug, Clone)]
pub struct Residuals {
    slots: Vec<String>,
    items: Vec<(String, Expr)>,
}

impl Residuals {
    pub fn new(slots: Vec<String>) -> Self {
        Residuals { slots, items: Vec::new() }
    }

    pub fn push(&mut self, label: impl Into<String>, e: Expr) {
        self.items.push((label.into(), e));
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Maximum absolute value over all residuals and samples.
    ///
    /// Samples are evaluated in parallel; the reduction runs in sample order
    /// so the reported worst case is deterministic.
    pub fn max_abs(&self, samples: &[Vec<f64>]) -> Result<(f64, Option<String>)> {
        let compiled: Vec<(&str, CompiledExpr)> = self
            .items
            .iter()
            .map(|(label, e)| Ok((label.as_str(), e.compile(&self.slots)?)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        let per_sample: Vec<(f64, Option<usize>)> = samples
            .par_iter()
            .map(|point| {
                let mut best = (0.0_f64, None);
                for (idx, (_, c)) in compiled.iter().enumerate() {
                    let v = c.eval(point)?.abs();
                    if v > best.0 || v.is_nan() {
                        best = (v, Some(idx));
                    }
                }
                Ok(best)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut worst = (0.0_f64, None);
        for (s, (v, idx)) in per_sample.into_iter().enumerate() {
            if v > worst.0 || (v.is_nan() && !worst.0.is_nan()) {
                worst = (v, idx.map(|i| format!("{} at sample {s} {:?}", compiled[i].0, samples[s])));
            }
        }
        Ok(worst)
    }

    pub fn check(&self, name: &str, samples: &[Vec<f64>], tol: f64) -> Result<CheckReport> {
        let (max, worst) = self.max_abs(samples)?;
        // NaN residuals never pass
        let mut report = CheckReport::from_max(name, max, worst, tol, samples.len());
        report.passed &= !max.is_nan();
        Ok(report)
    }
}
