//! Scenario registry.

use std::f64::consts::{PI, SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use super::levitan;
use crate::ap::{FunctionSpec, GridWindow, PointwiseMap};
use crate::error::{Error, Result};
use crate::sde::{SdeProblem, SolverConfig};

pub const SCENARIO_NAMES: &[&str] = &["affine_levitan", "ou", "periodic_sde", "pseudo_ap"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioModel {
    /// `x' = −δx + forcing(t)`, bounded solution.
    Deterministic {
        decay: f64,
        forcing: FunctionSpec,
        window: GridWindow,
        #[serde(rename = "memoryT")]
        memory_t: f64,
    },
    Stochastic {
        problem: SdeProblem,
        config: SolverConfig,
        /// Unperturbed problem solved on the same driver, for `Z = X − Y`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        companion: Option<SdeProblem>,
    },
}

/// Named quantitative checks with their tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum ExpectedCheck {
    /// `sup_t |x(t)| ≤ bound + slack`.
    MaxAbsBound { bound: f64, slack: f64 },
    /// Sample variance at the last node within `standard_errors` SE of `value`.
    StationaryVariance { value: f64, standard_errors: f64 },
    /// Covariance of `X(t1 − lag)` and `X(t1)` within `standard_errors` SE of
    /// `variance·e^{−δ·lag}`.
    LagAutocovariance {
        lag: f64,
        variance: f64,
        decay: f64,
        standard_errors: f64,
    },
    /// `sup_t W_p(law(t), law(t + τ)) ≤ epsilon`.
    ApdAccept { tau: f64, epsilon: f64, p: f64 },
    /// `sup_t W_p(law(t), law(t + τ)) > epsilon`.
    ApdReject { tau: f64, epsilon: f64, p: f64 },
    /// `ui_defect(p, c) ≤ bound` at `c = scale_multiple · sup_t E‖X‖²`.
    UiDefect { p: f64, scale_multiple: f64, bound: f64 },
    /// Picard ratios from the second iteration on are at most `θ_St + slack`.
    PicardRatio { slack: f64 },
    /// Lebesgue ergodic means of `(E‖X − Y‖²)^{1/2}` satisfy
    /// `mean(r_large) < max_ratio · mean(r_small)`.
    ErgodicDecay { r_small: f64, r_large: f64, max_ratio: f64 },
}

impl ExpectedCheck {
    pub fn name(&self) -> String {
        match self {
            ExpectedCheck::MaxAbsBound { .. } => "max_abs_x".into(),
            ExpectedCheck::StationaryVariance { .. } => "stationary_variance".into(),
            ExpectedCheck::LagAutocovariance { lag, .. } => format!("autocovariance_lag_{lag}"),
            ExpectedCheck::ApdAccept { tau, .. } => format!("apd_accept_tau_{tau:.6}"),
            ExpectedCheck::ApdReject { tau, .. } => format!("apd_reject_tau_{tau:.6}"),
            ExpectedCheck::UiDefect { scale_multiple, .. } => format!("ui_defect_{scale_multiple}x"),
            ExpectedCheck::PicardRatio { .. } => "picard_ratio".into(),
            ExpectedCheck::ErgodicDecay { r_small, r_large, .. } => {
                format!("ergodic_ratio_{r_large}_over_{r_small}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub model: ScenarioModel,
    pub expected: Vec<ExpectedCheck>,
}

impl Scenario {
    /// Shifts named by the scenario's APD checks.
    pub fn apd_taus(&self) -> Vec<f64> {
        self.expected
            .iter()
            .filter_map(|c| match c {
                ExpectedCheck::ApdAccept { tau, .. } | ExpectedCheck::ApdReject { tau, .. } => Some(*tau),
                _ => None,
            })
            .collect()
    }

    /// Applies CLI-style overrides. Windows keep their step unless `dt` is
    /// given; ensemble-dependent tolerances are recomputed at run time.
    pub fn with_overrides(
        mut self,
        n: Option<usize>,
        seed: Option<u64>,
        dt: Option<f64>,
        t0: Option<f64>,
        t1: Option<f64>,
    ) -> Result<Self> {
        let remake = |w: &GridWindow| -> Result<GridWindow> {
            GridWindow::new(t0.unwrap_or(w.t0()), t1.unwrap_or(w.t1()), dt.unwrap_or(w.dt()))
        };
        match &mut self.model {
            ScenarioModel::Deterministic { window, .. } => {
                if n.is_some() || seed.is_some() {
                    log::warn!("ensemble overrides ignored for deterministic scenario {}", self.name);
                }
                *window = remake(window)?;
            }
            ScenarioModel::Stochastic { config, .. } => {
                config.window = remake(&config.window)?;
                if let Some(n) = n {
                    config.ensemble_n = n;
                }
                if let Some(seed) = seed {
                    config.seed = seed;
                }
                config.validate()?;
            }
        }
        Ok(self)
    }
}

fn exp_decay(rate: f64) -> FunctionSpec {
    // e^{−rate·|t|}
    FunctionSpec::map(
        PointwiseMap::Exp,
        FunctionSpec::affine(-rate, 0.0, FunctionSpec::map(PointwiseMap::Abs, FunctionSpec::time())),
    )
}

fn periodic_problem(extra: Option<FunctionSpec>, growth_m: f64) -> Result<SdeProblem> {
    let mut drift = vec![
        FunctionSpec::trig(&[(0.5, 1.0, 0.0)]),
        FunctionSpec::linear(-0.5, 0.0, 0),
    ];
    drift.extend(extra);
    SdeProblem::new(
        vec![1.0],
        vec![FunctionSpec::sum(drift)],
        // 0.1·(1 + 0.5 sin t)
        vec![FunctionSpec::sum(vec![
            FunctionSpec::constant(0.1),
            FunctionSpec::trig(&[(0.05, 1.0, 0.0)]),
        ])],
        vec![1.0],
        FunctionSpec::constant(0.5 + 0.05),
        growth_m,
    )
}

fn affine_levitan() -> Result<Scenario> {
    Ok(Scenario {
        name: "affine_levitan".into(),
        model: ScenarioModel::Deterministic {
            decay: 1.0,
            forcing: levitan("h")?,
            window: GridWindow::new(-100.0, 100.0, 1e-3)?,
            memory_t: 40.0,
        },
        expected: vec![ExpectedCheck::MaxAbsBound {
            bound: 2.0,
            slack: 1e-3,
        }],
    })
}

fn ou() -> Result<Scenario> {
    let delta = 1.0;
    let sigma = SQRT_2;
    let q = 1.0;
    let problem = SdeProblem::new(
        vec![delta],
        vec![FunctionSpec::zero()],
        vec![FunctionSpec::constant(sigma)],
        vec![q],
        FunctionSpec::zero(),
        sigma,
    )?;
    let config = SolverConfig::for_problem(&problem, GridWindow::new(0.0, 20.0, 0.01)?, 10_000, 7);
    let variance = sigma * sigma * q / (2.0 * delta);
    Ok(Scenario {
        name: "ou".into(),
        model: ScenarioModel::Stochastic {
            problem,
            config,
            companion: None,
        },
        expected: vec![
            ExpectedCheck::StationaryVariance {
                value: variance,
                standard_errors: 3.0,
            },
            ExpectedCheck::LagAutocovariance {
                lag: 1.0,
                variance,
                decay: delta,
                standard_errors: 3.0,
            },
        ],
    })
}

fn periodic_checks() -> Vec<ExpectedCheck> {
    vec![
        ExpectedCheck::ApdAccept {
            tau: TAU,
            epsilon: 0.05,
            p: 2.0,
        },
        ExpectedCheck::ApdReject {
            tau: PI,
            epsilon: 0.05,
            p: 2.0,
        },
        ExpectedCheck::UiDefect {
            p: 2.0,
            scale_multiple: 25.0,
            bound: 0.01,
        },
        ExpectedCheck::PicardRatio { slack: 0.1 },
    ]
}

fn periodic_sde() -> Result<Scenario> {
    // |F| + |G| ≤ 0.5 + 0.5|x| + 0.15
    let problem = periodic_problem(None, 0.65)?;
    // π/200 puts both π and 2π on the grid.
    let window = GridWindow::new(0.0, 4.0 * PI, PI / 200.0)?;
    let config = SolverConfig::for_problem(&problem, window, 5000, 11);
    Ok(Scenario {
        name: "periodic_sde".into(),
        model: ScenarioModel::Stochastic {
            problem,
            config,
            companion: None,
        },
        expected: periodic_checks(),
    })
}

fn pseudo_ap() -> Result<Scenario> {
    let problem = periodic_problem(Some(FunctionSpec::affine(0.2, 0.0, exp_decay(0.1))), 0.85)?;
    let companion = periodic_problem(None, 0.65)?;
    let window = GridWindow::new(-200.0, 200.0, 0.05)?;
    let config = SolverConfig::for_problem(&problem, window, 2000, 13);
    Ok(Scenario {
        name: "pseudo_ap".into(),
        model: ScenarioModel::Stochastic {
            problem,
            config,
            companion: Some(companion),
        },
        expected: vec![ExpectedCheck::ErgodicDecay {
            r_small: 25.0,
            r_large: 200.0,
            max_ratio: 0.5,
        }],
    })
}

pub fn scenario(name: &str) -> Result<Scenario> {
    match name {
        "affine_levitan" => affine_levitan(),
        "ou" => ou(),
        "periodic_sde" => periodic_sde(),
        "pseudo_ap" => pseudo_ap(),
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::{stepanov_norm, theta_st};

    #[test]
    fn registry() {
        for name in SCENARIO_NAMES {
            let s = scenario(name).unwrap();
            assert_eq!(&s.name, name);
            let json = serde_json::to_string(&s).unwrap();
            let back: Scenario = serde_json::from_str(&json).unwrap();
            assert_eq!(back, s);
        }
        assert!(matches!(scenario("nope"), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn ou_expects_unit_variance() {
        let s = scenario("ou").unwrap();
        assert!(s.expected.iter().any(|c| matches!(
            c,
            ExpectedCheck::StationaryVariance { value, .. } if (value - 1.0).abs() < 1e-12
        )));
    }

    #[test]
    fn affine_levitan_expects_bound_two() {
        let s = scenario("affine_levitan").unwrap();
        assert!(matches!(s.expected[0], ExpectedCheck::MaxAbsBound { bound, .. } if bound == 2.0));
    }

    #[test]
    fn periodic_contraction_constant() {
        // K ≡ 0.55: θ_St = 2K²/(1 − e^{−1}) + 2K²/(1 − e^{−2}) ≈ 1.657.
        let s = scenario("periodic_sde").unwrap();
        let ScenarioModel::Stochastic { problem, config, .. } = &s.model else {
            panic!()
        };
        let k = stepanov_norm(&problem.lipschitz, 2.0, &config.window).unwrap();
        assert!((k - 0.55).abs() < 1e-12);
        let theta = theta_st(k, problem.min_decay(), problem.trace_q());
        let k2 = 0.55 * 0.55;
        let exact = 2.0 * k2 / (1.0 - (-1.0f64).exp()) + 2.0 * k2 / (1.0 - (-2.0f64).exp());
        assert!((theta - exact).abs() < 1e-12);
    }

    #[test]
    fn overrides() {
        let s = scenario("ou")
            .unwrap()
            .with_overrides(Some(10), Some(3), Some(0.02), None, Some(5.0))
            .unwrap();
        let ScenarioModel::Stochastic { config, .. } = s.model else {
            panic!()
        };
        assert_eq!((config.ensemble_n, config.seed), (10, 3));
        assert_eq!(config.window.len(), 251);
    }
}
