//! Problem and solver configuration for `dX = (AX + F(t,X))dt + G(t,X)dW`
//! with `A = diag(−δ_i)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ap::grid::GridWindow;
use crate::ap::FunctionSpec;
use crate::error::{Error, Result};

/// Random `(t, x)` probes used by [`SdeProblem::check_hypotheses`].
pub const HYPOTHESIS_PROBES: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SdeProblem {
    pub decay: Vec<f64>,
    /// One spec per state component.
    pub drift: Vec<FunctionSpec>,
    /// `dim × noise_dim` entries, row-major.
    pub diffusion: Vec<FunctionSpec>,
    pub q_diag: Vec<f64>,
    /// Nonnegative scalar Lipschitz modulus `K(t)`.
    pub lipschitz: FunctionSpec,
    pub growth_m: f64,
}

impl SdeProblem {
    /// Validates the structure and samples the growth and Lipschitz bounds.
    pub fn new(
        decay: Vec<f64>,
        drift: Vec<FunctionSpec>,
        diffusion: Vec<FunctionSpec>,
        q_diag: Vec<f64>,
        lipschitz: FunctionSpec,
        growth_m: f64,
    ) -> Result<Self> {
        let problem = Self {
            decay,
            drift,
            diffusion,
            q_diag,
            lipschitz,
            growth_m,
        };
        problem.validate()?;
        problem.check_hypotheses(HYPOTHESIS_PROBES, 0)?;
        Ok(problem)
    }

    pub fn dim(&self) -> usize {
        self.decay.len()
    }

    pub fn noise_dim(&self) -> usize {
        self.q_diag.len()
    }

    pub fn trace_q(&self) -> f64 {
        self.q_diag.iter().sum()
    }

    pub fn min_decay(&self) -> f64 {
        self.decay.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// True when the noise term vanishes identically.
    pub fn is_deterministic(&self) -> bool {
        self.noise_dim() == 0
            || self.q_diag.iter().all(|&q| q == 0.0)
            || self
                .diffusion
                .iter()
                .all(|g| matches!(g, FunctionSpec::Constant { value } if *value == 0.0))
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::invalid("state dimension must be at least 1"));
        }
        if let Some(bad) = self.decay.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::invalid(format!("decay rate {bad} must be positive")));
        }
        if self.drift.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.drift.len(),
            });
        }
        if self.diffusion.len() != d * self.noise_dim() {
            return Err(Error::DimensionMismatch {
                expected: d * self.noise_dim(),
                got: self.diffusion.len(),
            });
        }
        if let Some(bad) = self.q_diag.iter().find(|&&q| !(q >= 0.0 && q.is_finite())) {
            return Err(Error::invalid(format!("noise covariance {bad} must be nonnegative")));
        }
        if !(self.growth_m >= 0.0) {
            return Err(Error::invalid(format!("growth constant {} < 0", self.growth_m)));
        }
        for spec in self.drift.iter().chain(&self.diffusion) {
            spec.validate()?;
            if spec.state_dim() > d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: spec.state_dim(),
                });
            }
        }
        self.lipschitz.validate()?;
        if !self.lipschitz.is_time_only() {
            return Err(Error::invalid("Lipschitz modulus must be a function of time only"));
        }
        Ok(())
    }

    pub fn drift_into(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        for (o, f) in out.iter_mut().zip(&self.drift) {
            *o = f.eval_state(t, x)?;
        }
        Ok(())
    }

    pub fn diffusion_into(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        for (o, g) in out.iter_mut().zip(&self.diffusion) {
            *o = g.eval_state(t, x)?;
        }
        Ok(())
    }

    /// Probes `‖F‖ + ‖G‖_HS ≤ M(1 + ‖x‖)` and
    /// `‖ΔF‖ + ‖ΔG‖_HS ≤ K(t)‖x − y‖` at random `t ∈ [−100, 100]`,
    /// `x, y ∈ [−10, 10]^d`.
    pub fn check_hypotheses(&self, probes: usize, seed: u64) -> Result<()> {
        let d = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fx = vec![0.0; d];
        let mut fy = vec![0.0; d];
        let mut gx = vec![0.0; self.diffusion.len()];
        let mut gy = vec![0.0; self.diffusion.len()];
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let rel = 1e-9;
        for _ in 0..probes {
            let t = rng.gen_range(-100.0..100.0);
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-10.0..10.0)).collect();
            self.drift_into(t, &x, &mut fx)?;
            self.diffusion_into(t, &x, &mut gx)?;
            let growth = norm(&fx) + norm(&gx);
            let cap = self.growth_m * (1.0 + norm(&x));
            if growth > cap * (1.0 + rel) + rel {
                return Err(Error::invalid(format!(
                    "growth bound violated at t = {t}: {growth} > {cap}"
                )));
            }
            self.drift_into(t, &y, &mut fy)?;
            self.diffusion_into(t, &y, &mut gy)?;
            let df: Vec<f64> = fx.iter().zip(&fy).map(|(a, b)| a - b).collect();
            let dg: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a - b).collect();
            let lhs = norm(&df) + norm(&dg);
            let k = self.lipschitz.eval(t)?;
            if k < 0.0 {
                return Err(Error::invalid(format!("Lipschitz modulus {k} < 0 at t = {t}")));
            }
            let dist: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            let rhs = k * norm(&dist);
            if lhs > rhs * (1.0 + rel) + rel {
                return Err(Error::invalid(format!(
                    "Lipschitz bound violated at t = {t}: {lhs} > {rhs}"
                )));
            }
        }
        Ok(())
    }
}

/// Default stopping tolerance on `sup_t mean‖X_{n+1} − X_n‖²`.
pub const DEFAULT_PICARD_TOL: f64 = 1e-8;
pub const DEFAULT_PICARD_MAX_ITER: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolverConfig {
    pub window: GridWindow,
    /// Integrals start at `window.t0 − memory_t`.
    pub memory_t: f64,
    pub ensemble_n: usize,
    pub seed: u64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
}

impl SolverConfig {
    /// Config with the memory length from [`required_memory`].
    pub fn for_problem(problem: &SdeProblem, window: GridWindow, ensemble_n: usize, seed: u64) -> Self {
        Self {
            window,
            memory_t: required_memory(problem, DEFAULT_PICARD_TOL),
            ensemble_n,
            seed,
            picard_tol: DEFAULT_PICARD_TOL,
            picard_max_iter: DEFAULT_PICARD_MAX_ITER,
        }
    }

    /// Overrides the memory length; warns when it is shorter than the tail
    /// bound asks for.
    pub fn with_memory(mut self, problem: &SdeProblem, memory_t: f64) -> Self {
        let need = required_memory(problem, self.picard_tol);
        if memory_t < need {
            log::warn!(
                "memory {memory_t} below the {need:.3} needed for tolerance {}",
                self.picard_tol
            );
        }
        self.memory_t = memory_t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.memory_t > 0.0) {
            return Err(Error::invalid(format!("memory {} must be positive", self.memory_t)));
        }
        if self.ensemble_n == 0 {
            return Err(Error::invalid("ensemble size must be at least 1"));
        }
        if !(self.picard_tol > 0.0) {
            return Err(Error::invalid(format!(
                "tolerance {} must be positive",
                self.picard_tol
            )));
        }
        Ok(())
    }

    /// Grid the integrals run on: `[t0 − memory, t1]` with the window step.
    pub fn extended_window(&self) -> GridWindow {
        self.window.extended_back(self.window.steps_for(self.memory_t))
    }
}

/// Smallest memory with `e^{−δT}·M·(1 + (M/δ)²)^{1/2} < tol/10`, at least 1.
/// `(M/δ)²` stands in for `sup E‖X‖²`, which linear growth bounds by it up
/// to constants.
pub fn required_memory(problem: &SdeProblem, tol: f64) -> f64 {
    let delta = problem.min_decay();
    let m = problem.growth_m;
    let scale = m * (1.0 + (m / delta).powi(2)).sqrt();
    if scale <= 0.0 {
        return 1.0;
    }
    ((10.0 * scale / tol).ln() / delta).max(1.0)
}
