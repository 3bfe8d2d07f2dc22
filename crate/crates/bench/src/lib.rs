//! Fixtures shared by the kernel benchmarks.

use stepanov_core::ap::sample;
use stepanov_core::corpus::{levitan, scenario, Scenario};
use stepanov_core::sde::noise::NormalStream;
use stepanov_core::{EmpiricalLaw, FunctionSpec, GridWindow, SampledPath};

/// Levitan `H` and `sin` on `[0, t1]`.
pub fn levitan_and_sine(t1: f64, dt: f64) -> (SampledPath, SampledPath) {
    let w = GridWindow::new(0.0, t1, dt).expect("valid window");
    (
        sample(&levitan("H").expect("corpus"), &w).expect("finite"),
        sample(&FunctionSpec::sin(), &w).expect("finite"),
    )
}

/// `n` standard normal draws in `dim` dimensions, shifted by `mean`.
pub fn gaussian_law(dim: usize, n: usize, mean: f64, seed: u64) -> EmpiricalLaw {
    let mut stream = NormalStream::new(seed, 0, 0, 1);
    let samples = (0..n * dim).map(|_| mean + stream.next_normal()).collect();
    EmpiricalLaw::new(dim, samples, 0.0).expect("finite samples")
}

/// The periodic scenario cut down to `n` members.
pub fn small_periodic(n: usize) -> Scenario {
    scenario("periodic_sde")
        .and_then(|s| s.with_overrides(Some(n), None, None, None, None))
        .expect("registered scenario")
}
