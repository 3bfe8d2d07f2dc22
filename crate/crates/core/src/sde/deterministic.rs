//! Bounded solution `x(t) = ∫_{−∞}^{t} e^{−δ(t−s)} f(s) ds` of
//! `x' = −δx + f`, truncated to the memory window.
//!
//! When `f` has a closed-form antiderivative `Φ` the integral is rewritten by
//! parts, `Φ(t) − e^{−δ(t−a)}Φ(a) − δ∫_a^t e^{−δ(t−s)}Φ(s) ds`, so the
//! quadrature only sees `Φ`. This matters for forcings like the Levitan `h`,
//! whose spikes reach ~10⁵ on sub-grid scales while `Φ = H` stays bounded.

use crate::ap::grid::{sample, GridWindow, SampledPath};
use crate::ap::FunctionSpec;
use crate::error::{Error, Result};

/// `I_{k+1} = e(I_k + dt/2·v_k) + dt/2·v_{k+1}` over all of `values`.
fn exp_trapezoid(values: &[f64], delta: f64, dt: f64) -> Vec<f64> {
    let e = (-delta * dt).exp();
    let half = 0.5 * dt;
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc = e * (acc + half * w[0]) + half * w[1];
        out.push(acc);
    }
    out
}

/// Solution on `window` with integrals starting at `window.t0 − memory_t`.
pub fn deterministic_mild_solve(
    delta: f64,
    forcing: &FunctionSpec,
    window: &GridWindow,
    memory_t: f64,
) -> Result<SampledPath> {
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("decay {delta} must be positive")));
    }
    if !(memory_t > 0.0) {
        return Err(Error::invalid(format!("memory {memory_t} must be positive")));
    }
    if !forcing.is_time_only() {
        return Err(Error::invalid("forcing must be a function of time only"));
    }
    let ext = window.extended_back(window.steps_for(memory_t));
    let lead = ext.len() - window.len();
    let dt = ext.dt();
    let x: Vec<f64> = match forcing.antiderivative() {
        Some(phi) => {
            let phi_vals = sample(&phi, &ext)?.into_values();
            let conv = exp_trapezoid(&phi_vals, delta, dt);
            let a = ext.t0();
            (lead..ext.len())
                .map(|k| {
                    let decay = (-delta * (ext.node(k) - a)).exp();
                    phi_vals[k] - decay * phi_vals[0] - delta * conv[k]
                })
                .collect()
        }
        None => {
            let f = sample(forcing, &ext)?.into_values();
            exp_trapezoid(&f, delta, dt).split_off(lead)
        }
    };
    SampledPath::scalar(*window, x)
}
