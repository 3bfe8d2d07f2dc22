// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ap;
pub mod corpus;
pub mod error;
pub mod law;
pub mod sde;
mod table;

pub use error::{Error, Result};

pub use ap::{FunctionSpec, GridWindow, MetricKind, SampledPath};
pub use corpus::{Scenario, ScenarioRun};
pub use law::{ApdRow, EmpiricalLaw};
pub use sde::{Ensemble, SdeProblem, SolverConfig};
