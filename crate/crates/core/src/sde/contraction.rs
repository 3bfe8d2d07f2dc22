//! Contraction constants of the mild-solution fixed point map.

use serde::{Deserialize, Serialize};

use crate::ap::grid::{sample, GridWindow};
use crate::ap::metric::{sup_over_windows, MetricKind};
use crate::ap::FunctionSpec;
use crate::error::{Error, Result};

/// `max_ξ (∫_ξ^{ξ+1} |K|^p)^{1/p}` over grid starts `ξ` with `[ξ, ξ + 1]`
/// inside `range`.
pub fn stepanov_norm(k: &FunctionSpec, p: f64, range: &GridWindow) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    let path = sample(k, range)?;
    sup_over_windows(&path.norms(), range.dt(), &MetricKind::stepanov(p), None)
}

/// `2‖K‖²/(δ(1 − e^{−δ})) + 2‖K‖²·trQ/(1 − e^{−2δ})` with `‖K‖` the
/// Stepanov-2 norm of the Lipschitz modulus.
pub fn theta_st(k_norm_s2: f64, delta: f64, trace_q: f64) -> f64 {
    let k2 = k_norm_s2 * k_norm_s2;
    2.0 * k2 / (delta * -(-delta).exp_m1()) + 2.0 * k2 * trace_q / -(-2.0 * delta).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaPrime {
    pub beta1: f64,
    pub beta2: f64,
    pub theta_prime: f64,
}

/// Constant governing almost periodicity in 2-UI distribution. `q` solves
/// `1/2 = 1/q + 1/p`, so `p` must exceed 2.
///
/// `β₁` uses the denominator `1 − e^{−pδ/4}` (the stated form; a derivation
/// with `pδ/2` gives a smaller constant).
pub fn theta_prime_st(k_norm_sp: f64, delta: f64, p: f64, trace_q: f64) -> Result<ThetaPrime> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(p));
    }
    let q = 2.0 * p / (p - 2.0);
    let kp = k_norm_sp.powf(p);
    let beta1 = 4.0 / delta * (kp / -(-p * delta / 4.0).exp_m1()).powf(2.0 / p);
    let beta2 = 4.0 * trace_q * (kp / -(-p * delta / 2.0).exp_m1()).powf(2.0 / p);
    let theta_prime = 4.0 / (3.0 * q * delta) * ((3.0 * beta1).powf(q / 2.0) + (3.0 * beta2).powf(q / 2.0));
    Ok(ThetaPrime {
        beta1,
        beta2,
        theta_prime,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaProfile {
    pub max_kappa: f64,
    /// `‖K‖_{S^p}^p / (1 − e^{−δ})`.
    pub bound: f64,
    pub bound_ok: bool,
    /// Memory length used for the truncated convolution.
    pub memory: f64,
}

/// Relative slack allowed between the quadrature maximum and the bound.
pub const KAPPA_SLACK: f64 = 0.01;

/// `κ(t) = ∫_{t−memory}^{t} e^{−δ(t−s)} K^p(s) ds` on `grid`, the memory
/// chosen so the neglected tail is below `1e-10` of `sup K^p / δ`.
pub fn kappa_profile(k: &FunctionSpec, delta: f64, p: f64, grid: &GridWindow) -> Result<KappaProfile> {
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("decay {delta} must be positive")));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    let memory = (10.0 * std::f64::consts::LN_10 / delta).max(1.0);
    let ext = grid.extended_back(grid.steps_for(memory));
    let kp: Vec<f64> = sample(k, &ext)?.norms().iter().map(|v| v.powf(p)).collect();
    let dt = grid.dt();
    let e = (-delta * dt).exp();
    let lead = ext.len() - grid.len();
    let mut acc = 0.0;
    let mut max_kappa = if lead == 0 { 0.0 } else { f64::NEG_INFINITY };
    for j in 0..ext.len() - 1 {
        acc = e * (acc + 0.5 * dt * kp[j]) + 0.5 * dt * kp[j + 1];
        if j + 1 >= lead {
            max_kappa = max_kappa.max(acc);
        }
    }
    let norm = sup_over_windows(
        &kp.iter().map(|v| v.powf(1.0 / p)).collect::<Vec<_>>(),
        dt,
        &MetricKind::stepanov(p),
        None,
    )?;
    let bound = norm.powf(p) / -(-delta).exp_m1();
    Ok(KappaProfile {
        max_kappa,
        bound,
        bound_ok: max_kappa <= bound * (1.0 + KAPPA_SLACK),
        memory: (lead as f64) * dt,
    })
}
