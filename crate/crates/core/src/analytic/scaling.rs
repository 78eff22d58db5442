use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the layer scan in [`max_layer`].
pub const MAX_LAYER_SCAN: usize = 100_000;

/// Per-layer cost of extending a chain. Times in seconds; use
/// `f64::INFINITY` for a channel that does not decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainBudget {
    pub t_gate: f64,
    pub t1_rho: f64,
    pub t1: f64,
    pub t2: f64,
    pub eta: f64,
    pub threshold: f64,
}

impl ChainBudget {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("t_gate", self.t_gate), ("t1_rho", self.t1_rho), ("t1", self.t1), ("t2", self.t2)] {
            if !(v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::InvalidArgument(format!("eta must lie in (0, 1], got {}", self.eta)));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::InvalidArgument(format!("threshold must lie in (0, 1], got {}", self.threshold)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainModel {
    Hhcp,
    Sedor,
}

/// `η^{2N} exp(-2 t_gate N (1/T1ρ + 1/T1))`; 1 at N = 0.
pub fn chain_coherence_hhcp(b: &ChainBudget, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let n = n as f64;
    b.eta.powf(2.0 * n) * (-2.0 * b.t_gate * n * (1.0 / b.t1_rho + 1.0 / b.t1)).exp()
}

/// `exp(-2 t_gate N (1/T2 + (N+1)/(2 T1)))`; 1 at N = 0.
pub fn chain_coherence_sedor(b: &ChainBudget, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let n = n as f64;
    (-2.0 * b.t_gate * n * (1.0 / b.t2 + (n + 1.0) / (2.0 * b.t1))).exp()
}

pub fn chain_coherence(b: &ChainBudget, n: usize, model: ChainModel) -> f64 {
    match model {
        ChainModel::Hhcp => chain_coherence_hhcp(b, n),
        ChainModel::Sedor => chain_coherence_sedor(b, n),
    }
}

/// Deepest layer whose coherence stays at or above the threshold; 0 if
/// none. Scans linearly up to [`MAX_LAYER_SCAN`].
pub fn max_layer(b: &ChainBudget, model: ChainModel) -> usize {
    let mut last = 0;
    for n in 1..=MAX_LAYER_SCAN {
        if chain_coherence(b, n, model) >= b.threshold {
            last = n;
        } else {
            break;
        }
    }
    last
}
