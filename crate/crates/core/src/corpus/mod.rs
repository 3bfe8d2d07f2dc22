//! Concrete functions and ready-made scenarios.

pub mod primitives;
mod run;
mod scenario;

pub use run::{evaluate_checks, run_scenario, CheckOutcome, RunOutput, ScenarioRun, SolverChoice};
pub use scenario::{scenario, ExpectedCheck, Scenario, ScenarioModel, SCENARIO_NAMES};

use crate::ap::FunctionSpec;
use crate::error::{Error, Result};

/// The three Levitan functions: `g = 2 + cos t + cos √2t`, `H = sin(1/g)`
/// and its derivative `h`.
pub fn levitan(kind: &str) -> Result<FunctionSpec> {
    let name = match kind {
        "g" => "levitan_g",
        "H" => "levitan_H",
        "h" => "levitan_h",
        other => return Err(Error::UnknownPrimitive(format!("levitan_{other}"))),
    };
    Ok(FunctionSpec::primitive(name))
}

/// `exp(Σ_{n=2}^{8} g_n)`, the largest truncation that stays finite.
pub fn spike_train() -> FunctionSpec {
    FunctionSpec::primitive("spike_train")
}

/// Spike train truncated after index `n_max` (2..=64); peaks beyond
/// `n = 8` overflow and evaluate to `NonFinite`.
pub fn spike_train_truncated(n_max: usize) -> FunctionSpec {
    FunctionSpec::Primitive {
        name: "spike_train".into(),
        params: vec![n_max as f64],
    }
}
