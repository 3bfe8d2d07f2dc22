//! Named primitives resolvable from [`FunctionSpec::Primitive`](crate::ap::FunctionSpec).

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};

pub const NAMES: &[&str] = &["time", "levitan_g", "levitan_H", "levitan_h", "spike_train"];

/// Largest spike index whose peak `exp(n³)` stays finite in f64.
pub const SPIKE_OVERFLOW_CAP: usize = 8;

#[inline]
pub fn levitan_g(t: f64) -> f64 {
    2.0 + t.cos() + (SQRT_2 * t).cos()
}

#[inline]
pub fn levitan_big_h(t: f64) -> f64 {
    (1.0 / levitan_g(t)).sin()
}

/// Derivative of [`levitan_big_h`].
#[inline]
pub fn levitan_h(t: f64) -> f64 {
    let g = levitan_g(t);
    (1.0 / g).cos() * (t.sin() + SQRT_2 * (SQRT_2 * t).sin()) / (g * g)
}

/// Exponent `Σ_{n=2}^{n_max} g_n(t)` of the spike train. `g_n` is the
/// `4n`-periodic triangle of height `n³` and base width `n⁻⁵` centred at
/// `n` (mod `4n`).
pub fn spike_exponent(t: f64, n_max: usize) -> f64 {
    let mut acc = 0.0;
    for n in 2..=n_max {
        let nf = n as f64;
        let period = 4.0 * nf;
        let s = t - period * ((t + 2.0 * nf) / period).floor();
        let alpha = nf.powi(-5);
        let height = nf.powi(3);
        let tri = 1.0 - (2.0 / alpha) * (s - nf).abs();
        if tri > 0.0 {
            acc += height * tri;
        }
    }
    acc
}

pub fn spike_train(t: f64, n_max: usize) -> f64 {
    spike_exponent(t, n_max).exp()
}

fn spike_cap(params: &[f64]) -> Result<usize> {
    match params.first() {
        None => Ok(SPIKE_OVERFLOW_CAP),
        Some(&v) if v >= 2.0 && v.fract() == 0.0 && v <= 64.0 => Ok(v as usize),
        Some(&v) => Err(Error::invalid(format!(
            "spike_train truncation index {v} must be an integer in [2, 64]"
        ))),
    }
}

pub fn check(name: &str, params: &[f64]) -> Result<()> {
    match name {
        "spike_train" => spike_cap(params).map(|_| ()),
        _ if NAMES.contains(&name) => Ok(()),
        _ => Err(Error::UnknownPrimitive(name.to_string())),
    }
}

pub fn eval(name: &str, params: &[f64], t: f64) -> Result<f64> {
    Ok(match name {
        "time" => t,
        "levitan_g" => levitan_g(t),
        "levitan_H" => levitan_big_h(t),
        "levitan_h" => levitan_h(t),
        "spike_train" => spike_train(t, spike_cap(params)?),
        _ => return Err(Error::UnknownPrimitive(name.to_string())),
    })
}

pub fn antiderivative(name: &str, params: &[f64]) -> Option<(&'static str, Vec<f64>)> {
    match name {
        "levitan_h" => Some(("levitan_H", params.to_vec())),
        _ => None,
    }
}
