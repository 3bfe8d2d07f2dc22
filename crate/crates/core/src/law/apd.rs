//! Uniform-integrability defect and shift tests on one-time marginals.
//!
//! The grid maximum over marginals only lower-bounds a path-space distance,
//! so an accepted shift is evidence, not a certificate.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distance::{assignment_wasserstein, dbl, quantile_wasserstein, MAX_DBL_POOLED};
use super::EmpiricalLaw;
use crate::error::{Error, Result};
use crate::sde::Ensemble;

/// `max_t mean(‖X(t)‖^p · 1{‖X(t)‖^p > c})`.
pub fn ui_defect(ensemble: &Ensemble, p: f64, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::invalid(format!("threshold {c} must be positive")));
    }
    if !(p > 0.0) {
        return Err(Error::InvalidExponent(p));
    }
    let n = ensemble.window().len();
    let mut acc = vec![0.0; n];
    for path in &ensemble.paths {
        for (slot, norm) in acc.iter_mut().zip(path.norms()) {
            let v = norm.powf(p);
            if v > c {
                *slot += v;
            }
        }
    }
    Ok(acc.into_iter().fold(0.0, f64::max) / ensemble.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ApdRow {
    /// Shift actually tested, a multiple of the grid step.
    pub tau: f64,
    /// Shift as requested.
    pub tau_nominal: f64,
    /// `sup_t W_p(law(t), law(t + τ))` over the overlap.
    pub sup_distance: f64,
    pub argmax_t: f64,
    pub accepted: bool,
    /// Bounded-Lipschitz distance at `argmax_t`, when the pooled sample is
    /// small enough for the exact program.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dbl: Option<f64>,
}

/// For each τ (rounded to the nearest grid multiple), the sup over grid
/// `t` with `t + τ` in the window of `W_p(law(t), law(t + τ))`, accepted
/// when at most `epsilon`.
pub fn apd_test(ensemble: &Ensemble, taus: &[f64], epsilon: f64, p: f64) -> Result<Vec<ApdRow>> {
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    let win = *ensemble.window();
    let n = win.len();
    let scalar = ensemble.dim() == 1;
    // Sorted marginals once; every shift reuses them.
    let sorted: Vec<Vec<f64>> = if scalar {
        (0..n)
            .into_par_iter()
            .map(|k| {
                let mut v = ensemble.states_at(k);
                v.sort_by(f64::total_cmp);
                v
            })
            .collect()
    } else {
        Vec::new()
    };
    let law = |k: usize| EmpiricalLaw::new(ensemble.dim(), ensemble.states_at(k), win.node(k));
    taus.iter()
        .map(|&tau_nominal| {
            if !(tau_nominal >= 0.0) {
                return Err(Error::invalid(format!("shift {tau_nominal} must be nonnegative")));
            }
            let shift = (tau_nominal / win.dt()).round() as usize;
            if shift >= n {
                return Err(Error::EmptyOverlap { tau: tau_nominal });
            }
            let dists: Vec<f64> = (0..n - shift)
                .into_par_iter()
                .map(|k| {
                    if scalar {
                        Ok(quantile_wasserstein(&sorted[k], &sorted[k + shift], p))
                    } else {
                        assignment_wasserstein(&law(k)?, &law(k + shift)?, p)
                    }
                })
                .collect::<Result<_>>()?;
            let (arg, &sup) = dists
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .expect("nonempty overlap");
            let dbl_val = if 2 * ensemble.len() <= MAX_DBL_POOLED && ensemble.len() >= 2 {
                Some(dbl(&law(arg)?, &law(arg + shift)?)?.value)
            } else {
                None
            };
            Ok(ApdRow {
                tau: shift as f64 * win.dt(),
                tau_nominal,
                sup_distance: sup,
                argmax_t: win.node(arg),
                accepted: sup <= epsilon,
                dbl: dbl_val,
            })
        })
        .collect()
}

/// `tau,supDistance,accepted` rows.
pub fn write_apd_csv<W: Write>(rows: &[ApdRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::invalid(format!("csv output: {e}"));
    w.write_record(["tau", "supDistance", "accepted"]).map_err(err)?;
    for r in rows {
        w.write_record([r.tau.to_string(), r.sup_distance.to_string(), r.accepted.to_string()])
            .map_err(err)?;
    }
    w.flush().map_err(|e| Error::invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ap::GridWindow;
    use crate::sde::ou_exact_ensemble;

    #[test]
    fn ou_defect_against_gaussian_tail() {
        // V = s·Z², E[V·1{V > c}] = s·(2·a·φ(a) + 2·(1 − Φ(a))), a = √(c/s).
        let w = GridWindow::new(0.0, 1.0, 0.1).unwrap();
        let n = 10_000;
        let e = ou_exact_ensemble(1.0, 2f64.sqrt(), 1.0, &w, n, 17).unwrap();
        let tail = |c: f64| {
            let a: f64 = c.sqrt();
            let phi = (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt();
            2.0 * a * phi + erfc(a / std::f64::consts::SQRT_2)
        };
        let mut prev = f64::INFINITY;
        for c in [0.5, 1.0, 2.0, 4.0, 9.0] {
            let d = ui_defect(&e, 2.0, c).unwrap();
            // second moment of V·1{V>c} is bounded by E[V²] = 3
            let se = (3.0 / n as f64).sqrt();
            assert!(d <= tail(c) + 3.0 * se + 1e-3, "c = {c}: {d} vs {}", tail(c));
            assert!(d <= prev);
            prev = d;
        }
        assert_eq!(ui_defect(&e, 2.0, 1e6).unwrap(), 0.0);
    }

    /// Complementary error function (Abramowitz–Stegun 7.1.26, |err| < 1.5e-7).
    fn erfc(x: f64) -> f64 {
        let t = 1.0 / (1.0 + 0.327_591_1 * x);
        let poly =
            t * (0.254_829_592 + t * (-0.284_496_736 + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
        poly * (-x * x).exp()
    }

    #[test]
    fn stationary_ou_accepts_every_shift() {
        let w = GridWindow::new(0.0, 4.0, 0.05).unwrap();
        let e = ou_exact_ensemble(1.0, 2f64.sqrt(), 1.0, &w, 4000, 2).unwrap();
        let rows = apd_test(&e, &[0.5, 1.0, 2.05, 3.0], 0.12, 2.0).unwrap();
        for r in &rows {
            assert!(r.accepted, "{r:?}");
            assert!(r.dbl.is_none());
        }
        assert!((rows[2].tau - 2.05).abs() < 1e-12);
        assert!(matches!(
            apd_test(&e, &[4.5], 0.1, 2.0),
            Err(Error::EmptyOverlap { .. })
        ));
        let mut buf = Vec::new();
        write_apd_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("tau,supDistance,accepted\n0.5,"));
    }
}
