use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights below this are treated as inactive.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Allowed deviation of the weight sum from one.
pub const SUM_TOL: f64 = 1e-9;

/// A point on the probability simplex, with its active support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureWeights {
    weights: Vec<f64>,
    support: Vec<usize>,
}

impl MixtureWeights {
    /// Validates and wraps a probability vector. Entries in `[-1e-12, 0)` are
    /// rounding noise and are clipped to zero.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        let mut weights = weights;
        for (k, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() {
                return Err(Error::InvalidWeights(format!("weight {k} is not finite")));
            }
            if *w < -SUPPORT_TOL {
                return Err(Error::InvalidWeights(format!("weight {k} is negative ({w:e})")));
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        let support = weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > SUPPORT_TOL)
            .map(|(k, _)| k)
            .collect();
        Ok(Self { weights, support })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn vertex(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidWeights(format!("vertex {k} out of range for {n} weights")));
        }
        let mut w = vec![0.0; n];
        w[k] = 1.0;
        Self::new(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.weights.get(k).copied().unwrap_or(0.0)
    }
}
