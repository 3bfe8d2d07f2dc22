//! Laws of ensemble states at fixed times and distribution-level
//! almost periodicity diagnostics.

mod apd;
pub mod distance;
pub(crate) mod transport;

pub use apd::{apd_test, ui_defect, write_apd_csv, ApdRow};
pub use distance::{dbl, wasserstein, DistanceMethod, LawDistanceReport, LawMetric};

use crate::error::{Error, Result};
use crate::sde::Ensemble;

/// Uniform-weight empirical law of `len()` points in `ℝ^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalLaw {
    dim: usize,
    samples: Vec<f64>,
    timestamp: f64,
}

impl EmpiricalLaw {
    /// `samples` is row-major; at least two points, all finite.
    pub fn new(dim: usize, samples: Vec<f64>, timestamp: f64) -> Result<Self> {
        if dim == 0 || !samples.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "{} values do not split into points of dimension {dim}",
                samples.len()
            )));
        }
        if samples.len() / dim < 2 {
            return Err(Error::invalid("an empirical law needs at least two samples"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: timestamp });
        }
        Ok(Self {
            dim,
            samples,
            timestamp,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn timestamp(&self) -> f64 {
        self.timestamp
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.samples[i * self.dim..(i + 1) * self.dim]
    }

    /// Sorted copy of a scalar sample.
    pub fn sorted_scalar(&self) -> Vec<f64> {
        debug_assert_eq!(self.dim, 1);
        let mut v = self.samples.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Sample mean and unbiased variance of component `i`.
    pub fn mean_var(&self, i: usize) -> (f64, f64) {
        let n = self.len() as f64;
        let xs = || self.samples.iter().skip(i).step_by(self.dim);
        let mean = xs().sum::<f64>() / n;
        let var = xs().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    /// Translated and scaled copy `a·x + c` (same `c` in every coordinate).
    pub fn affine(&self, a: f64, c: f64) -> EmpiricalLaw {
        EmpiricalLaw {
            dim: self.dim,
            samples: self.samples.iter().map(|x| a * x + c).collect(),
            timestamp: self.timestamp,
        }
    }
}

/// The member states at grid time `t`.
pub fn law_at(ensemble: &Ensemble, t: f64) -> Result<EmpiricalLaw> {
    let k = ensemble.window().index_of(t).ok_or(Error::OffGrid(t))?;
    EmpiricalLaw::new(ensemble.dim(), ensemble.states_at(k), ensemble.window().node(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ap::FunctionSpec;
    use crate::ap::GridWindow;
    use crate::sde::{ou_exact_ensemble, picard_solve, SdeProblem, SolverConfig};

    #[test]
    fn laws_from_ensembles() {
        let w = GridWindow::new(0.0, 2.0, 0.01).unwrap();
        let zero = SdeProblem::new(
            vec![1.0],
            vec![FunctionSpec::zero()],
            vec![FunctionSpec::zero()],
            vec![1.0],
            FunctionSpec::zero(),
            0.0,
        )
        .unwrap();
        let e = picard_solve(&zero, &SolverConfig::for_problem(&zero, w, 5, 1)).unwrap();
        let law = law_at(&e, 1.0).unwrap();
        assert!(law.samples().iter().all(|&x| x == 0.0));
        assert!(matches!(law_at(&e, 1.005), Err(Error::OffGrid(_))));

        let det = SdeProblem::new(
            vec![1.0],
            vec![FunctionSpec::sin()],
            vec![FunctionSpec::zero()],
            vec![1.0],
            FunctionSpec::zero(),
            1.0,
        )
        .unwrap();
        let e = picard_solve(&det, &SolverConfig::for_problem(&det, w, 4, 1)).unwrap();
        let law = law_at(&e, 0.5).unwrap();
        assert!(law.samples().windows(2).all(|p| p[0] == p[1]));

        let n = 10_000;
        let ou = ou_exact_ensemble(1.0, 2f64.sqrt(), 1.0, &w, n, 5).unwrap();
        let (_, var) = law_at(&ou, 1.3).unwrap().mean_var(0);
        assert!((var - 1.0).abs() < 3.0 * (2.0 / (n - 1) as f64).sqrt(), "{var}");
    }

    #[test]
    fn construction_checks() {
        assert!(EmpiricalLaw::new(1, vec![1.0], 0.0).is_err());
        assert!(EmpiricalLaw::new(2, vec![1.0, 2.0, 3.0], 0.0).is_err());
        assert!(EmpiricalLaw::new(1, vec![1.0, f64::NAN], 0.0).is_err());
    }
}
