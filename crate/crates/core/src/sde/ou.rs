//! Exact Ornstein–Uhlenbeck sampling `dX = −δX dt + σ dW`, `Var W(1) = trQ`.

use rayon::prelude::*;

use super::noise::NormalStream;
use super::problem::SolverConfig;
use super::solver::{Ensemble, SolverKind};
use crate::ap::grid::{GridWindow, SampledPath};
use crate::error::{Error, Result};

/// `σ²·trQ / (2δ)`.
pub fn ou_stationary_variance(delta: f64, sigma: f64, trace_q: f64) -> f64 {
    sigma * sigma * trace_q / (2.0 * delta)
}

/// Gaussian transition over `dt`: `X' = a·X + N(0, v)`, returned as `(a, v)`.
pub fn ou_transition(delta: f64, stationary_var: f64, dt: f64) -> (f64, f64) {
    ((-delta * dt).exp(), stationary_var * -(-2.0 * delta * dt).exp_m1())
}

fn check(delta: f64) -> Result<()> {
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("decay {delta} must be positive")));
    }
    Ok(())
}

fn member_path(window: &GridWindow, delta: f64, var: f64, seed: u64, member: u64) -> Result<SampledPath> {
    let (a, v) = ou_transition(delta, var, window.dt());
    let sd = v.sqrt();
    let mut normals = NormalStream::new(seed, member, 0, 1);
    let mut x = var.sqrt() * normals.next_normal();
    let mut values = Vec::with_capacity(window.len());
    values.push(x);
    for _ in 1..window.len() {
        x = a * x + sd * normals.next_normal();
        values.push(x);
    }
    SampledPath::scalar(*window, values)
}

/// One stationary path and the stationary variance.
pub fn ou_exact(delta: f64, sigma: f64, trace_q: f64, window: &GridWindow, seed: u64) -> Result<(SampledPath, f64)> {
    check(delta)?;
    let var = ou_stationary_variance(delta, sigma, trace_q);
    Ok((member_path(window, delta, var, seed, 0)?, var))
}

/// `n` independent stationary paths.
pub fn ou_exact_ensemble(
    delta: f64,
    sigma: f64,
    trace_q: f64,
    window: &GridWindow,
    n: usize,
    seed: u64,
) -> Result<Ensemble> {
    check(delta)?;
    let var = ou_stationary_variance(delta, sigma, trace_q);
    let paths = (0..n as u64)
        .into_par_iter()
        .map(|m| member_path(window, delta, var, seed, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble {
        config: SolverConfig {
            window: *window,
            memory_t: f64::INFINITY,
            ensemble_n: n,
            seed,
            picard_tol: 0.0,
            picard_max_iter: 0,
        },
        paths,
        driver_seed: seed,
        diagnostics: Vec::new(),
        solver: SolverKind::ExactOu,
        theta_st: None,
    })
}
