//! ε-almost period scanning over a finite shift grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::SampledPath;
use super::metric::{shifted_distance, MetricKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlmostPeriodSet {
    pub metric: MetricKind,
    pub epsilon: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub step_tau: f64,
    /// Accepted shifts, ascending. Each is an exact multiple of the path step.
    pub periods: Vec<f64>,
    /// Number of shifts tested.
    pub tested: usize,
    /// Length of the overlap window left at the largest tested shift.
    pub min_overlap: f64,
}

impl AlmostPeriodSet {
    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn max_gap(&self) -> f64 {
        max_gap(self)
    }

    /// One `tau` row per accepted shift.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let rows = self.periods.iter().map(|t| [t.to_string()]);
        crate::table::write_table(out, &["tau".to_string()], rows)
    }
}

/// Tests every `τ = k·step_tau ∈ [tau_min, tau_max]` (rounded to the nearest
/// multiple of the path step) and keeps those with
/// `distance(f(· + τ), f) ≤ epsilon` on the overlap `[t0, t1 - τ]`.
pub fn scan_almost_periods(
    f: &SampledPath,
    epsilon: f64,
    metric: &MetricKind,
    tau_range: (f64, f64),
    step_tau: f64,
) -> Result<AlmostPeriodSet> {
    metric.validate()?;
    let (tau_min, tau_max) = tau_range;
    if !(step_tau > 0.0) || !(tau_max >= tau_min) || tau_min < 0.0 || !(epsilon >= 0.0) {
        return Err(Error::invalid(format!(
            "bad scan: range [{tau_min}, {tau_max}], step {step_tau}, epsilon {epsilon}"
        )));
    }
    let dt = f.window().dt();
    let k_lo = (tau_min / step_tau - 1e-9).ceil().max(0.0) as usize;
    let k_hi = (tau_max / step_tau + 1e-9).floor() as usize;
    let mut shifts: Vec<usize> = (k_lo..=k_hi)
        .map(|k| ((k as f64 * step_tau) / dt).round() as usize)
        .collect();
    shifts.dedup();
    let Some(&largest) = shifts.last() else {
        return Err(Error::invalid("scan range contains no multiple of step_tau"));
    };
    let overlap_nodes = f.len().saturating_sub(largest);
    let needed = metric
        .window_len()
        .map(|len| (len / dt).round() as usize + 1)
        .unwrap_or(1);
    if overlap_nodes < needed.max(1) {
        return Err(Error::EmptyComparisonWindow {
            tau: largest as f64 * dt,
        });
    }
    let accepted: Vec<Option<f64>> = shifts
        .par_iter()
        .map(|&s| {
            let d = shifted_distance(f, s, metric, Some(epsilon))?;
            Ok((d <= epsilon).then_some(s as f64 * dt))
        })
        .collect::<Result<_>>()?;
    Ok(AlmostPeriodSet {
        metric: *metric,
        epsilon,
        tau_min,
        tau_max,
        step_tau,
        periods: accepted.into_iter().flatten().collect(),
        tested: shifts.len(),
        min_overlap: (overlap_nodes - 1) as f64 * dt,
    })
}

/// Largest gap between consecutive accepted shifts, counting the gaps to
/// both ends of the scan range; `+∞` for an empty set. Never below
/// `step_tau`, the resolution of the scan.
pub fn max_gap(set: &AlmostPeriodSet) -> f64 {
    let (Some(first), Some(last)) = (set.periods.first(), set.periods.last()) else {
        return f64::INFINITY;
    };
    let mut gap = (first - set.tau_min).max(set.tau_max - last);
    for w in set.periods.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    gap.max(set.step_tau)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::ap::grid::{sample, GridWindow};
    use crate::ap::FunctionSpec;

    #[test]
    fn sine_has_two_pi() {
        let w = GridWindow::new(0.0, 8.0 * PI, 2.0 * PI / 1000.0).unwrap();
        let f = sample(&FunctionSpec::sin(), &w).unwrap();
        let set = scan_almost_periods(&f, 1e-6, &MetricKind::Uniform, (1.0, 10.0), 2.0 * PI).unwrap();
        assert_eq!(set.periods.len(), 1);
        assert!((set.periods[0] - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn periodic_gaps() {
        let set = AlmostPeriodSet {
            metric: MetricKind::Uniform,
            epsilon: 0.1,
            tau_min: 0.0,
            tau_max: 20.0 * PI,
            step_tau: 0.01,
            periods: (1..=10).map(|k| 2.0 * PI * k as f64).collect(),
            tested: 0,
            min_overlap: 0.0,
        };
        assert!((max_gap(&set) - 2.0 * PI).abs() < 1e-12);
        let empty = AlmostPeriodSet { periods: vec![], ..set };
        assert_eq!(max_gap(&empty), f64::INFINITY);
    }

    #[test]
    fn overlap_must_remain() {
        let w = GridWindow::new(0.0, 10.0, 0.01).unwrap();
        let f = sample(&FunctionSpec::sin(), &w).unwrap();
        let err = scan_almost_periods(&f, 0.1, &MetricKind::stepanov(1.0), (0.0, 9.5), 0.1).unwrap_err();
        assert!(matches!(err, Error::EmptyComparisonWindow { .. }));
        assert!(scan_almost_periods(&f, 0.1, &MetricKind::Uniform, (0.0, 9.5), 0.1).is_ok());
    }

    #[test]
    fn accepted_shifts_satisfy_bound() {
        let w = GridWindow::new(0.0, 120.0, 0.01).unwrap();
        let f = sample(
            &FunctionSpec::trig(&[(1.0, 1.0, 0.0), (1.0, 2f64.sqrt(), PI / 2.0)]),
            &w,
        )
        .unwrap();
        let metric = MetricKind::stepanov(2.0);
        let set = scan_almost_periods(&f, 0.5, &metric, (1.0, 60.0), 0.05).unwrap();
        assert!(!set.is_empty());
        for &tau in &set.periods {
            let s = (tau / 0.01).round() as usize;
            assert!(shifted_distance(&f, s, &metric, None).unwrap() <= 0.5);
            assert!((1.0 - 1e-9..=60.0 + 1e-9).contains(&tau));
        }
        assert!(set.max_gap() >= set.step_tau);
    }
}
