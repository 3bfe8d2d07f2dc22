use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::grid::{GridWindow, SampledPath};
use crate::error::{Error, Result};

/// Distance between trajectories on a common grid.
///
/// Stepanov variants take the supremum over window starts `ξ` on the grid of
/// the (unnormalized) windowed integral `∫_ξ^{ξ+len}`, so `window_len = 1`
/// yields the usual unit-window Stepanov metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricKind {
    Uniform,
    Stepanov {
        p: f64,
        #[serde(default = "unit")]
        window_len: f64,
    },
    /// Stepanov-1 average of the capped distance `min(d, 1)`.
    StepanovMeasure {
        #[serde(default = "unit")]
        window_len: f64,
    },
}

fn unit() -> f64 {
    1.0
}

impl MetricKind {
    pub fn stepanov(p: f64) -> Self {
        MetricKind::Stepanov { p, window_len: 1.0 }
    }

    pub fn measure() -> Self {
        MetricKind::StepanovMeasure { window_len: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MetricKind::Uniform => Ok(()),
            MetricKind::Stepanov { p, window_len } => {
                if !(p >= 1.0 && p.is_finite()) {
                    return Err(Error::invalid(format!("Stepanov exponent {p} must be >= 1")));
                }
                check_len(window_len)
            }
            MetricKind::StepanovMeasure { window_len } => check_len(window_len),
        }
    }

    pub fn window_len(&self) -> Option<f64> {
        match *self {
            MetricKind::Uniform => None,
            MetricKind::Stepanov { window_len, .. } | MetricKind::StepanovMeasure { window_len } => Some(window_len),
        }
    }

    /// Short label used in file names: `uniform`, `sp2`, `smeasure`.
    pub fn label(&self) -> String {
        match *self {
            MetricKind::Uniform => "uniform".into(),
            MetricKind::Stepanov { p, .. } => format!("sp{p}"),
            MetricKind::StepanovMeasure { .. } => "smeasure".into(),
        }
    }
}

fn check_len(len: f64) -> Result<()> {
    if len > 0.0 && len.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("window length {len} must be positive")))
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MetricKind::Uniform => write!(f, "uniform"),
            MetricKind::Stepanov { p, .. } => write!(f, "sp:{p}"),
            MetricKind::StepanovMeasure { .. } => write!(f, "smeasure"),
        }
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    /// Parses `uniform`, `sp:<p>` and `smeasure`.
    fn from_str(s: &str) -> Result<Self> {
        let metric = match s {
            "uniform" => MetricKind::Uniform,
            "smeasure" => MetricKind::measure(),
            _ => {
                let p = s
                    .strip_prefix("sp:")
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| Error::invalid(format!("unknown metric `{s}`")))?;
                MetricKind::stepanov(p)
            }
        };
        metric.validate()?;
        Ok(metric)
    }
}

/// Pointwise Euclidean gaps `‖a_k - b_k‖` between two row-major blocks.
pub(crate) fn pointwise_gaps(a: &[f64], b: &[f64], dim: usize) -> Vec<f64> {
    if dim == 1 {
        return a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
    }
    a.chunks_exact(dim)
        .zip(b.chunks_exact(dim))
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt())
        .collect()
}

/// Supremum of the metric over a gap sequence sampled with step `dt`.
///
/// With `stop_above = Some(eps)` the scan returns early with a value `> eps`
/// as soon as one window exceeds it; the returned value is then only a lower
/// bound on the true distance.
pub(crate) fn sup_over_windows(gaps: &[f64], dt: f64, metric: &MetricKind, stop_above: Option<f64>) -> Result<f64> {
    let (p, capped, len) = match *metric {
        MetricKind::Uniform => {
            let mut best = 0.0f64;
            for &g in gaps {
                best = best.max(g);
                if stop_above.is_some_and(|eps| best > eps) {
                    break;
                }
            }
            return Ok(best);
        }
        MetricKind::Stepanov { p, window_len } => (p, false, window_len),
        MetricKind::StepanovMeasure { window_len } => (1.0, true, window_len),
    };
    let w = (len / dt).round() as usize;
    let available = gaps.len().saturating_sub(1) as f64 * dt;
    if w == 0 || gaps.len() < w + 1 {
        return Err(Error::WindowTooShort {
            required: len,
            available,
        });
    }
    let integrand = |g: f64| -> f64 {
        if capped {
            g.min(1.0)
        } else if p == 1.0 {
            g
        } else if p == 2.0 {
            g * g
        } else {
            g.powf(p)
        }
    };
    // Rescales the `w`-step trapezoid sum to the nominal window length when
    // `dt` does not divide it.
    let stretch = len / (w as f64 * dt);
    let threshold = stop_above.map(|eps| if capped { eps } else { eps.powf(p) });
    let mut prefix = Vec::with_capacity(gaps.len());
    prefix.push(0.0);
    let mut prev = integrand(gaps[0]);
    let mut acc = 0.0;
    let mut best = 0.0f64;
    for (k, &g) in gaps.iter().enumerate().skip(1) {
        let cur = integrand(g);
        acc += 0.5 * dt * (prev + cur);
        prefix.push(acc);
        prev = cur;
        if k >= w {
            let window = (acc - prefix[k - w]) * stretch;
            best = best.max(window);
            if threshold.is_some_and(|th| best > th) {
                break;
            }
        }
    }
    let best = best.max(0.0);
    Ok(if capped || p == 1.0 { best } else { best.powf(1.0 / p) })
}

fn check_same_grid(f: &SampledPath, g: &SampledPath) -> Result<()> {
    if f.dim() != g.dim() || !f.window().same_grid(g.window()) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Distance between two paths sharing a grid.
pub fn distance(f: &SampledPath, g: &SampledPath, metric: &MetricKind) -> Result<f64> {
    metric.validate()?;
    check_same_grid(f, g)?;
    let gaps = pointwise_gaps(f.values(), g.values(), f.dim());
    sup_over_windows(&gaps, f.window().dt(), metric, None)
}

/// Distance between `f(· + shift·dt)` and `f` on their overlap.
pub(crate) fn shifted_distance(
    f: &SampledPath,
    shift: usize,
    metric: &MetricKind,
    stop_above: Option<f64>,
) -> Result<f64> {
    let n = f.len();
    let d = f.dim();
    if shift >= n {
        return Err(Error::EmptyComparisonWindow {
            tau: shift as f64 * f.window().dt(),
        });
    }
    let vals = f.values();
    let gaps = pointwise_gaps(&vals[shift * d..], &vals[..(n - shift) * d], d);
    sup_over_windows(&gaps, f.window().dt(), metric, stop_above)
}

/// Bochner slice `s ↦ f(t + s)` for `s ∈ [0, window_len]`.
pub fn bochner_slice(f: &SampledPath, t: f64, window_len: f64) -> Result<SampledPath> {
    let win = f.window();
    let start = win.index_of(t).ok_or_else(|| Error::OutOfRange {
        what: format!("slice start {t} (not a grid node of the path)"),
    })?;
    let steps = win.steps_for(window_len);
    if steps == 0 || start + steps >= win.len() {
        return Err(Error::OutOfRange {
            what: format!("slice [{t}, {}]", t + window_len),
        });
    }
    let d = f.dim();
    let values = f.values()[start * d..(start + steps + 1) * d].to_vec();
    SampledPath::new(GridWindow::new(0.0, steps as f64 * win.dt(), win.dt())?, d, values)
}

/// Trapezoid `L^p` distance of two paths over their whole window.
pub fn lp_distance(f: &SampledPath, g: &SampledPath, p: f64) -> Result<f64> {
    check_same_grid(f, g)?;
    let gaps = pointwise_gaps(f.values(), g.values(), f.dim());
    let dt = f.window().dt();
    let integral: f64 = gaps.windows(2).map(|w| 0.5 * dt * (w[0].powf(p) + w[1].powf(p))).sum();
    Ok(integral.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::ap::grid::sample;
    use crate::ap::FunctionSpec;

    fn window(t1: f64, dt: f64) -> GridWindow {
        GridWindow::new(0.0, t1, dt).unwrap()
    }

    const METRICS: [MetricKind; 4] = [
        MetricKind::Uniform,
        MetricKind::Stepanov {
            p: 1.0,
            window_len: 1.0,
        },
        MetricKind::Stepanov {
            p: 2.5,
            window_len: 1.0,
        },
        MetricKind::StepanovMeasure { window_len: 1.0 },
    ];

    #[test]
    fn identical_paths_are_at_zero_distance() {
        let w = window(10.0, 0.01);
        let f = sample(&FunctionSpec::primitive("levitan_H"), &w).unwrap();
        for m in METRICS {
            assert_eq!(distance(&f, &f, &m).unwrap(), 0.0);
        }
    }

    #[test]
    fn constant_gap() {
        let w = window(5.0, 0.01);
        let zero = sample(&FunctionSpec::zero(), &w).unwrap();
        let c = 3.5;
        let g = sample(&FunctionSpec::constant(c), &w).unwrap();
        assert_eq!(distance(&zero, &g, &MetricKind::Uniform).unwrap(), c);
        for p in [1.0, 2.0, 3.0] {
            let v = distance(&zero, &g, &MetricKind::stepanov(p)).unwrap();
            assert!((v - c).abs() < 1e-12, "p = {p}: {v}");
        }
        let v = distance(&zero, &g, &MetricKind::measure()).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn opposite_phase_sines_match_quadrature() {
        let w = window(4.0 * PI, 1e-3);
        let f = sample(&FunctionSpec::sin(), &w).unwrap();
        let g = sample(&FunctionSpec::trig(&[(1.0, 1.0, PI)]), &w).unwrap();
        let got = distance(&f, &g, &MetricKind::stepanov(1.0)).unwrap();
        // max_ξ ∫_ξ^{ξ+1} 2|sin t| dt is attained for the window centred on a
        // peak: 4 sin(1/2), from the closed-form antiderivative.
        let oracle = 4.0 * 0.5f64.sin();
        assert!((got - oracle).abs() < 1e-5, "{got} vs {oracle}");
    }

    #[test]
    fn window_too_short() {
        let w = window(0.5, 0.01);
        let f = sample(&FunctionSpec::sin(), &w).unwrap();
        assert!(matches!(
            distance(&f, &f, &MetricKind::stepanov(2.0)),
            Err(Error::WindowTooShort { .. })
        ));
        assert_eq!(distance(&f, &f, &MetricKind::Uniform).unwrap(), 0.0);
    }

    #[test]
    fn grid_mismatch() {
        let f = sample(&FunctionSpec::sin(), &window(5.0, 0.01)).unwrap();
        let g = sample(&FunctionSpec::sin(), &window(5.0, 0.02)).unwrap();
        assert_eq!(distance(&f, &g, &MetricKind::Uniform).unwrap_err(), Error::GridMismatch);
    }

    #[test]
    fn slices() {
        let w = window(10.0, 0.01);
        let c = sample(&FunctionSpec::constant(2.0), &w).unwrap();
        let s = bochner_slice(&c, 3.0, 1.0).unwrap();
        assert_eq!(s.len(), 101);
        assert!(s.values().iter().all(|&v| v == 2.0));

        let w = GridWindow::new(0.0, 10.0 * PI / 1000.0 * 1000.0, PI / 1000.0).unwrap();
        let f = sample(&FunctionSpec::sin(), &w).unwrap();
        let s = bochner_slice(&f, PI, 1.0).unwrap();
        for (k, v) in s.values().iter().enumerate() {
            let u = s.window().node(k);
            assert!((v - (PI + u).sin()).abs() < 1e-12);
        }
        assert!(bochner_slice(&f, 0.0005, 1.0).is_err());
        assert!(bochner_slice(&f, 10.0 * PI - 0.5, 1.0).is_err());
    }

    #[test]
    fn metric_strings() {
        assert_eq!("uniform".parse::<MetricKind>().unwrap(), MetricKind::Uniform);
        assert_eq!("sp:2".parse::<MetricKind>().unwrap(), MetricKind::stepanov(2.0));
        assert_eq!("smeasure".parse::<MetricKind>().unwrap(), MetricKind::measure());
        assert!("sp:0.5".parse::<MetricKind>().is_err());
        assert!("lp".parse::<MetricKind>().is_err());
    }

    #[test]
    fn dt_halving_changes_little() {
        // grid-only sup over ξ: refinement must move the value by < 1%
        let f = FunctionSpec::trig(&[(1.0, 1.0, 0.0), (0.7, 2f64.sqrt(), 0.3)]);
        let g = FunctionSpec::trig(&[(1.0, 1.0, 0.2), (0.7, 2f64.sqrt(), 0.0)]);
        for m in [
            MetricKind::stepanov(1.0),
            MetricKind::stepanov(2.0),
            MetricKind::measure(),
        ] {
            let coarse = {
                let w = window(30.0, 0.01);
                distance(&sample(&f, &w).unwrap(), &sample(&g, &w).unwrap(), &m).unwrap()
            };
            let fine = {
                let w = window(30.0, 0.005);
                distance(&sample(&f, &w).unwrap(), &sample(&g, &w).unwrap(), &m).unwrap()
            };
            assert!((coarse - fine).abs() < 0.01 * fine, "{m}: {coarse} vs {fine}");
        }
    }
}
