//! Reproducible sample points for identity checks by evaluation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default seed for sample generation.
pub const DEFAULT_SEED: u64 = 0xA16EB40;
/// Default number of sample points per check.
pub const DEFAULT_COUNT: usize = 30;
/// Default tolerance for identities checked by evaluation.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Axis-aligned box `[lo, hi]` in a coordinate chart.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SampleBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::Shape(format!("sample box bounds have lengths {} and {}", lo.len(), hi.len())));
        }
        if let Some(i) = (0..lo.len()).find(|&i| !(lo[i] <= hi[i])) {
            return Err(Error::Precondition(format!("sample box axis {i}: lo {} > hi {}", lo[i], hi[i])));
        }
        Ok(SampleBox { lo, hi })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        SampleBox { lo: vec![lo; dim], hi: vec![hi; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.draw(&mut rng)).collect()
    }

    pub fn draw(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&lo, &hi)| if lo == hi { lo } else { rng.gen_range(lo..hi) })
            .collect()
    }
}
