//! The diagonal contraction semigroup `S(t) = diag(e^{−δ_i t})`.

use crate::error::{Error, Result};

pub fn semigroup_apply(decay: &[f64], t: f64, x: &[f64]) -> Result<Vec<f64>> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if decay.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: decay.len(),
            got: x.len(),
        });
    }
    Ok(decay.iter().zip(x).map(|(d, xi)| (-d * t).exp() * xi).collect())
}

/// Per-component one-step factors `e^{−δ_i dt}`.
pub(crate) fn step_factors(decay: &[f64], dt: f64) -> Vec<f64> {
    decay.iter().map(|d| (-d * dt).exp()).collect()
}
