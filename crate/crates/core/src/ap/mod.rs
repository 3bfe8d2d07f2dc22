//! Almost-periodic function analysis: representation, Stepanov-type metrics,
//! almost period scanning, the Stepanov integrability defect and ergodic means.

pub mod almost_period;
pub mod defect;
pub mod ergodic;
pub mod function;
pub mod grid;
pub mod metric;

pub use almost_period::{max_gap, scan_almost_periods, AlmostPeriodSet};
pub use defect::mp_prime_defect;
pub use ergodic::{ergodic_profile, write_ergodic_csv, ErgodicPoint, WeightMeasure};
pub use function::{compose, FunctionSpec, ParamForm, PointwiseMap, TrigTerm};
pub use grid::{sample, sample_components, GridWindow, SampledPath};
pub use metric::{bochner_slice, distance, lp_distance, MetricKind};
