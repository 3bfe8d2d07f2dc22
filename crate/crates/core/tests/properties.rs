//! Cross-module invariants on randomized fixtures.

use std::f64::consts::{PI, SQRT_2, TAU};

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

use stepanov_core::ap::{
    compose, distance, ergodic_profile, sample, scan_almost_periods, FunctionSpec, GridWindow, MetricKind,
    PointwiseMap, WeightMeasure,
};
use stepanov_core::corpus::levitan;
use stepanov_core::law::{dbl, wasserstein, EmpiricalLaw};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 100,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn law(dim: usize, max_n: usize) -> impl Strategy<Value = EmpiricalLaw> {
    (2usize..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(-3.0..3.0f64, n * dim).prop_map(move |s| EmpiricalLaw::new(dim, s, 0.0).unwrap())
    })
}

fn trig_spec() -> impl Strategy<Value = FunctionSpec> {
    prop::collection::vec((-2.0..2.0f64, 0.0..5.0f64, 0.0..TAU), 1..5).prop_map(|t| FunctionSpec::trig(&t))
}

/// `sup Σ φ_k (μ_k − ν_k)` over `φ ∈ [−1, 1]` that are 1-Lipschitz on the
/// pooled support, solved as a plain LP.
fn dbl_lp(a: &EmpiricalLaw, b: &EmpiricalLaw) -> f64 {
    let d = a.dim();
    let mut points: Vec<(&[f64], f64)> = Vec::new();
    points.extend((0..a.len()).map(|i| (a.sample(i), 1.0 / a.len() as f64)));
    points.extend((0..b.len()).map(|i| (b.sample(i), -1.0 / b.len() as f64)));
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = points.iter().map(|&(_, w)| lp.add_var(w, (-1.0, 1.0))).collect();
    for i in 0..points.len() {
        for j in 0..points.len() {
            if i != j {
                let gap = (0..d)
                    .map(|c| (points[i].0[c] - points[j].0[c]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                lp.add_constraint([(vars[i], 1.0), (vars[j], -1.0)], ComparisonOp::Le, gap);
            }
        }
    }
    lp.solve().unwrap().objective()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn dbl_matches_lipschitz_lp((a, b) in (1usize..=2).prop_flat_map(|d| (law(d, 12), law(d, 12)))) {
        let got = dbl(&a, &b).unwrap().value;
        let oracle = dbl_lp(&a, &b);
        prop_assert!((got - oracle).abs() <= 1e-7, "{got} vs LP {oracle}");
    }

    #[test]
    fn law_distances_are_metrics(
        (a, b, c) in (1usize..=2).prop_flat_map(|d| (law(d, 20), law(d, 20), law(d, 20))),
        p in 1.0..3.0f64,
    ) {
        let w = |x: &EmpiricalLaw, y: &EmpiricalLaw| wasserstein(x, y, p).unwrap().value;
        let bl = |x: &EmpiricalLaw, y: &EmpiricalLaw| dbl(x, y).unwrap().value;
        for f in [&w as &dyn Fn(&EmpiricalLaw, &EmpiricalLaw) -> f64, &bl] {
            prop_assert!(f(&a, &a).abs() <= 1e-9);
            prop_assert!((f(&a, &b) - f(&b, &a)).abs() <= 1e-9);
            prop_assert!(f(&a, &c) <= f(&a, &b) + f(&b, &c) + 1e-9);
        }
        prop_assert!(bl(&a, &b) <= 2.0 + 1e-12);
    }

    #[test]
    fn function_spec_json_round_trip(f in trig_spec(), g in trig_spec(), s in -3.0..3.0f64) {
        let spec = FunctionSpec::sum(vec![
            FunctionSpec::product(vec![f, FunctionSpec::map(PointwiseMap::Tanh, g)]),
            FunctionSpec::affine(s, 1.0, levitan("H").unwrap()),
        ]);
        let json = serde_json::to_string(&spec).unwrap();
        let back: FunctionSpec = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(back.eval(1.25).unwrap().to_bits(), spec.eval(1.25).unwrap().to_bits());
    }

    /// Every shift accepted at `ε` by a common scan of the pieces of
    /// `f(t, x) = sin(t)·x + cos(√2 t)` and of `u` is accepted for the
    /// composition at `(Lip + 1 + ‖u‖_∞)·ε`, with `Lip = sup|sin| = 1`.
    #[test]
    fn superposition_inherits_almost_periods(
        terms in prop::collection::vec((-1.0..1.0f64, prop::sample::select(vec![1.0, SQRT_2, 2.0]), 0.0..TAU), 1..3),
        eps in 0.05..0.4f64,
    ) {
        let u = FunctionSpec::trig(&terms);
        let coeff_sin = FunctionSpec::sin();
        let coeff_cos = FunctionSpec::trig(&[(1.0, SQRT_2, PI / 2.0)]);
        let f_param = FunctionSpec::sum(vec![
            FunctionSpec::product(vec![coeff_sin.clone(), FunctionSpec::state(0)]),
            coeff_cos.clone(),
        ]);
        let composed = compose(&f_param, std::slice::from_ref(&u)).unwrap();
        let w = GridWindow::new(0.0, 60.0, 0.01).unwrap();
        let metric = MetricKind::stepanov(2.0);
        let scan = |spec: &FunctionSpec, e: f64| {
            scan_almost_periods(&sample(spec, &w).unwrap(), e, &metric, (0.5, 40.0), 0.05).unwrap().periods
        };
        let u_sup: f64 = terms.iter().map(|t| t.0.abs()).sum();
        let c = 1.0 + 1.0 + u_sup;
        let (sin_set, cos_set) = (scan(&coeff_sin, eps), scan(&coeff_cos, eps));
        let common: Vec<f64> = scan(&u, eps)
            .into_iter()
            .filter(|t| sin_set.contains(t) && cos_set.contains(t))
            .collect();
        let wide = scan(&composed, c * eps);
        for t in &common {
            prop_assert!(wide.contains(t), "tau {t} accepted by the pieces, not by the composition at {}", c * eps);
        }
    }
}

#[test]
fn inclusion_chain_on_corpus_functions() {
    let w = GridWindow::new(0.0, 80.0, 0.01).unwrap();
    let functions = [
        ("sin", FunctionSpec::sin()),
        (
            "quasi-periodic",
            FunctionSpec::trig(&[(1.0, 1.0, 0.0), (0.5, SQRT_2, 0.3)]),
        ),
        ("levitan_g", levitan("g").unwrap()),
        ("levitan_H", levitan("H").unwrap()),
    ];
    for (name, spec) in &functions {
        let f = sample(spec, &w).unwrap();
        for eps in [0.1, 0.3, 0.6] {
            for p in [1.0, 2.0, 3.0] {
                let scan = |m: MetricKind, e: f64| scan_almost_periods(&f, e, &m, (0.5, 60.0), 0.05).unwrap().periods;
                let uniform = scan(MetricKind::Uniform, eps);
                let stepanov = scan(MetricKind::stepanov(p), eps);
                let measure = scan(MetricKind::measure(), eps.max(eps.powf(p)));
                for t in &uniform {
                    assert!(
                        stepanov.contains(t),
                        "{name}: uniform tau {t} not Stepanov({p}) at {eps}"
                    );
                }
                for t in &stepanov {
                    assert!(
                        measure.contains(t),
                        "{name}: Stepanov({p}) tau {t} not measure-accepted at {eps}"
                    );
                }
            }
        }
    }
}

#[test]
fn levitan_h_is_measure_but_not_uniformly_almost_periodic() {
    // Good joint near-periods of cos t and cos √2t start near 58π.
    let w = GridWindow::new(0.0, 600.0, 1e-2).unwrap();
    let f = sample(&levitan("H").unwrap(), &w).unwrap();
    let uniform = scan_almost_periods(&f, 0.5, &MetricKind::Uniform, (1.0, 500.0), 0.01).unwrap();
    let measure = scan_almost_periods(&f, 0.5, &MetricKind::measure(), (1.0, 500.0), 0.01).unwrap();
    assert!(uniform.is_empty(), "{:?}", uniform.periods);
    assert!(
        measure.periods.iter().any(|t| (t - 58.0 * PI).abs() < 0.05),
        "{:?}",
        measure.periods
    );
}

/// Sample-level power comparison: with `|h| ≤ M`, the ergodic means of
/// `|h|^p` never exceed `M^{p−1}` times those of `|h|`, so decay of one
/// bounds the other.
#[test]
fn ergodic_means_of_powers() {
    let w = GridWindow::new(-400.0, 400.0, 0.01).unwrap();
    let exp_abs = FunctionSpec::map(
        PointwiseMap::Exp,
        FunctionSpec::affine(-1.0, 0.0, FunctionSpec::map(PointwiseMap::Abs, FunctionSpec::time())),
    );
    let sin_sq = FunctionSpec::map(PointwiseMap::Square, FunctionSpec::sin());
    let radii = [10.0, 50.0, 100.0, 200.0, 400.0];
    for (spec, decays) in [(exp_abs, true), (sin_sq, false)] {
        let h = sample(&spec, &w).unwrap();
        let m = h.sup_norm();
        let base = ergodic_profile(&h, &WeightMeasure::Lebesgue, &radii).unwrap();
        for p in [2.0, 3.0] {
            let hp = h.map(|v| v.abs().powf(p)).unwrap();
            let powered = ergodic_profile(&hp, &WeightMeasure::Lebesgue, &radii).unwrap();
            for (b, q) in base.iter().zip(&powered) {
                assert!(
                    q.mean <= m.powf(p - 1.0) * b.mean * (1.0 + 1e-12),
                    "r {}: {} vs {}",
                    b.r,
                    q.mean,
                    b.mean
                );
            }
            let last = powered.last().unwrap().mean;
            if decays {
                assert!(last < 0.05 * powered[0].mean);
            } else {
                assert!(last > 0.3);
            }
        }
        let last = base.last().unwrap().mean;
        assert_eq!(last < 0.05 * base[0].mean, decays);
    }
}

#[test]
fn distance_on_sampled_corpus_is_symmetric() {
    let w = GridWindow::new(0.0, 30.0, 0.01).unwrap();
    let f = sample(&levitan("H").unwrap(), &w).unwrap();
    let g = sample(&FunctionSpec::sin(), &w).unwrap();
    for m in [MetricKind::Uniform, MetricKind::stepanov(2.0), MetricKind::measure()] {
        assert_eq!(distance(&f, &g, &m).unwrap(), distance(&g, &f, &m).unwrap());
    }
}
