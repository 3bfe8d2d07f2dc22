//! Wasserstein-p and bounded-Lipschitz distances between empirical laws.

use serde::{Deserialize, Serialize};

use super::transport;
use super::EmpiricalLaw;
use crate::error::{Error, Result};

/// Sample cap per law for exact multi-dimensional assignment.
pub const MAX_EXACT_ASSIGNMENT: usize = 512;
/// Cap on the pooled sample count for the bounded-Lipschitz program.
pub const MAX_DBL_POOLED: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LawMetric {
    Wasserstein { p: f64 },
    BoundedLipschitz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DistanceMethod {
    Quantile1d,
    ExactAssignment,
    /// Solved through the transport form of the dual program.
    DualLp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawDistanceReport {
    pub metric: LawMetric,
    pub value: f64,
    pub method: DistanceMethod,
}

fn check_dims(a: &EmpiricalLaw, b: &EmpiricalLaw) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

fn euclid(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

/// Linear-interpolation quantiles of a sorted sample at the `k` midpoint
/// levels `(i + ½)/k`; returns the sample itself when `k` equals its size.
pub(crate) fn resample_sorted(sorted: &[f64], k: usize) -> Vec<f64> {
    let n = sorted.len();
    if n == k {
        return sorted.to_vec();
    }
    (0..k)
        .map(|i| {
            let pos = ((i as f64 + 0.5) / k as f64 * n as f64 - 0.5).clamp(0.0, (n - 1) as f64);
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            let w = pos - lo as f64;
            sorted[lo] * (1.0 - w) + sorted[hi] * w
        })
        .collect()
}

/// `W_p` between sorted 1-d samples, interpolating the smaller one to the
/// larger size.
pub(crate) fn quantile_wasserstein(xs: &[f64], ys: &[f64], p: f64) -> f64 {
    let k = xs.len().max(ys.len());
    let a = resample_sorted(xs, k);
    let b = resample_sorted(ys, k);
    let sum: f64 = if p == 1.0 {
        a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum()
    } else if p == 2.0 {
        a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum()
    } else {
        a.iter().zip(&b).map(|(x, y)| (x - y).abs().powf(p)).sum()
    };
    (sum / k as f64).powf(1.0 / p)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Optimal transport cost between uniform weights on `a` and `b` under
/// `cost(x, y)`, normalised to unit mass.
fn uniform_transport(a: &EmpiricalLaw, b: &EmpiricalLaw, cost: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
    let (n, m) = (a.len(), b.len());
    let g = gcd(n, m);
    let mut c = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            c.push(cost(a.sample(i), b.sample(j)));
        }
    }
    let plan = transport::solve(&c, &vec![(m / g) as i64; n], &vec![(n / g) as i64; m]);
    plan.total_cost / (n * (m / g)) as f64
}

/// Exact assignment `W_p` regardless of dimension (sizes capped).
pub(crate) fn assignment_wasserstein(a: &EmpiricalLaw, b: &EmpiricalLaw, p: f64) -> Result<f64> {
    let worst = a.len().max(b.len());
    if worst > MAX_EXACT_ASSIGNMENT {
        return Err(Error::TooManySamplesForExact {
            limit: MAX_EXACT_ASSIGNMENT,
            got: worst,
        });
    }
    let total = uniform_transport(a, b, |x, y| euclid(x, y).powf(p));
    Ok(total.max(0.0).powf(1.0 / p))
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

/// 1-d: quantile coupling of order statistics. Higher dimensions: exact
/// minimum-cost assignment, at most [`MAX_EXACT_ASSIGNMENT`] samples per law.
pub fn wasserstein(a: &EmpiricalLaw, b: &EmpiricalLaw, p: f64) -> Result<LawDistanceReport> {
    check_p(p)?;
    check_dims(a, b)?;
    let (value, method) = if a.dim() == 1 {
        (
            quantile_wasserstein(&a.sorted_scalar(), &b.sorted_scalar(), p),
            DistanceMethod::Quantile1d,
        )
    } else {
        (assignment_wasserstein(a, b, p)?, DistanceMethod::ExactAssignment)
    };
    Ok(LawDistanceReport {
        metric: LawMetric::Wasserstein { p },
        value,
        method,
    })
}

/// `sup{ mean φ(a) − mean φ(b) : |φ| ≤ 1, Lip(φ) ≤ 1 }` over the pooled
/// points. Computed as the optimal transport cost under `min(‖x − y‖, 2)`,
/// which is the same linear program after dualisation: the Lipschitz
/// constraints of a bounded φ under the capped metric are exactly those of
/// the original, and the bound `|φ| ≤ 1` only fixes an additive constant.
pub fn dbl(a: &EmpiricalLaw, b: &EmpiricalLaw) -> Result<LawDistanceReport> {
    check_dims(a, b)?;
    let pooled = a.len() + b.len();
    if pooled > MAX_DBL_POOLED {
        return Err(Error::TooManySamples {
            limit: MAX_DBL_POOLED,
            got: pooled,
        });
    }
    let value = uniform_transport(a, b, |x, y| euclid(x, y).min(2.0)).clamp(0.0, 2.0);
    Ok(LawDistanceReport {
        metric: LawMetric::BoundedLipschitz,
        value,
        method: DistanceMethod::DualLp,
    })
}
