//! Weighted ergodic means `∫_{-r}^{r} |f| dμ / μ([-r, r])`.
//!
//! The translation-invariance condition usually imposed on `μ` has no
//! finite certificate and is not checked; the Lebesgue and `|t|^α` presets
//! satisfy it.

use serde::{Deserialize, Serialize};

use super::function::FunctionSpec;
use super::grid::SampledPath;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightMeasure {
    Lebesgue,
    /// Density `|t|^alpha`, positive mass on `[-r, r]` for every `r > 0`.
    PowerWeight {
        alpha: f64,
    },
    /// Nonnegative density given as a time function.
    CustomDensity {
        density: FunctionSpec,
    },
}

impl WeightMeasure {
    pub fn density(&self, t: f64) -> Result<f64> {
        let rho = match self {
            WeightMeasure::Lebesgue => 1.0,
            WeightMeasure::PowerWeight { alpha } => {
                if *alpha < 0.0 {
                    return Err(Error::invalid(format!("power weight alpha {alpha} < 0")));
                }
                if *alpha == 0.0 {
                    1.0
                } else {
                    t.abs().powf(*alpha)
                }
            }
            WeightMeasure::CustomDensity { density } => density.eval(t)?,
        };
        if rho < 0.0 {
            return Err(Error::invalid(format!("negative density {rho} at t = {t}")));
        }
        Ok(rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErgodicPoint {
    pub r: f64,
    pub mean: f64,
}

/// Ergodic means of `‖f‖` for each radius; `[-r, r]` must lie in the window
/// and is snapped to the nearest grid nodes.
pub fn ergodic_profile(f: &SampledPath, mu: &WeightMeasure, radii: &[f64]) -> Result<Vec<ErgodicPoint>> {
    let win = f.window();
    let dt = win.dt();
    let norms = f.norms();
    let weights = win.nodes().map(|t| mu.density(t)).collect::<Result<Vec<_>>>()?;
    let index = |t: f64| -> Result<usize> {
        let k = ((t - win.t0()) / dt).round();
        if k < 0.0 || k as usize >= win.len() || (win.node(k as usize) - t).abs() > 0.5 * dt + 1e-9 {
            return Err(Error::OutOfRange {
                what: format!("radius endpoint {t}"),
            });
        }
        Ok(k as usize)
    };
    radii
        .iter()
        .map(|&r| {
            if !(r > 0.0) {
                return Err(Error::invalid(format!("radius {r} must be positive")));
            }
            let (lo, hi) = (index(-r)?, index(r)?);
            let mut num = 0.0;
            let mut den = 0.0;
            for k in lo..hi {
                num += 0.5 * dt * (norms[k] * weights[k] + norms[k + 1] * weights[k + 1]);
                den += 0.5 * dt * (weights[k] + weights[k + 1]);
            }
            if !(den > 0.0) {
                return Err(Error::ZeroMass { r });
            }
            Ok(ErgodicPoint { r, mean: num / den })
        })
        .collect()
}

/// `r,mean` rows.
pub fn write_ergodic_csv<W: std::io::Write>(profile: &[ErgodicPoint], out: W) -> Result<()> {
    let rows = profile.iter().map(|p| [p.r.to_string(), p.mean.to_string()]);
    crate::table::write_table(out, &["r".to_string(), "mean".to_string()], rows)
}
