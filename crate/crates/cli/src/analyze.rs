use std::fs;

use anyhow::{anyhow, Context};
use serde::{Deserialize, Serialize};

use stepanov_core::ap::{
    distance, ergodic_profile, mp_prime_defect, sample, scan_almost_periods, write_ergodic_csv, AlmostPeriodSet,
    WeightMeasure,
};
use stepanov_core::{FunctionSpec, GridWindow, MetricKind};

use crate::artifacts::{manifest, sha256_hex, Artifacts};
use crate::{AnalyzeArgs, CliResult, Command, Failure};

const DEFAULT_WINDOW: (f64, f64, f64) = (0.0, 100.0, 0.01);

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct AnalysisSpec {
    function: FunctionSpec,
    #[serde(default)]
    compare: Option<FunctionSpec>,
    #[serde(default)]
    window: Option<GridWindow>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ScanReport<'a> {
    label: String,
    #[serde(flatten)]
    set: &'a AlmostPeriodSet,
    accepted: usize,
    /// `null` when nothing was accepted.
    max_gap: Option<f64>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct DefectReport {
    p: f64,
    delta_mass: f64,
    defect: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct DistanceRow {
    metric: MetricKind,
    label: String,
    distance: f64,
}

fn load(args: &AnalyzeArgs) -> CliResult<(AnalysisSpec, Vec<u8>)> {
    let bytes = fs::read(&args.spec)
        .with_context(|| format!("reading {}", args.spec.display()))
        .map_err(Failure::input)?;
    let value: serde_json::Value = serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing {}", args.spec.display()))
        .map_err(Failure::input)?;
    let spec = if value.get("function").is_some() {
        serde_json::from_value::<AnalysisSpec>(value)
    } else {
        serde_json::from_value::<FunctionSpec>(value).map(|function| AnalysisSpec {
            function,
            compare: None,
            window: None,
        })
    }
    .with_context(|| format!("schema of {}", args.spec.display()))
    .map_err(Failure::input)?;
    for f in std::iter::once(&spec.function).chain(&spec.compare) {
        f.validate()?;
        if !f.is_time_only() {
            return Err(Failure::input(anyhow!("analyzed functions may not depend on a state")));
        }
    }
    Ok((spec, bytes))
}

pub fn run(args: &AnalyzeArgs, command: &Command) -> CliResult {
    let (spec, bytes) = load(args)?;
    let base = spec.window.map(|w| (w.t0(), w.t1(), w.dt())).unwrap_or(DEFAULT_WINDOW);
    let window = GridWindow::new(
        args.t0.unwrap_or(base.0),
        args.t1.unwrap_or(base.1),
        args.dt.unwrap_or(base.2),
    )?;
    let mut metrics = args.metrics.clone();
    metrics.dedup_by(|a, b| a.label() == b.label());
    let tau_min = args.tau_min.unwrap_or(args.tau_step);
    let tau_max = args.tau_max.unwrap_or(0.5 * window.span());

    let f = sample(&spec.function, &window)?;
    let mut out = Artifacts::default();
    let mut scans = Vec::new();
    for metric in &metrics {
        let set = scan_almost_periods(&f, args.eps, metric, (tau_min, tau_max), args.tau_step)?;
        out.csv(&format!("periods_{}.csv", metric.label()), |w| set.write_csv(w))?;
        scans.push(set);
    }
    let reports: Vec<ScanReport> = metrics
        .iter()
        .zip(&scans)
        .map(|(m, set)| ScanReport {
            label: m.label(),
            set,
            accepted: set.periods.len(),
            max_gap: Some(set.max_gap()).filter(|g| g.is_finite()),
        })
        .collect();
    out.json("scans.json", &reports)?;

    let defect = mp_prime_defect(&f, args.defect_p, args.delta_mass)?;
    out.json(
        "defect.json",
        &DefectReport {
            p: args.defect_p,
            delta_mass: args.delta_mass,
            defect,
        },
    )?;

    if let Some(other) = &spec.compare {
        let g = sample(other, &window)?;
        let rows = metrics
            .iter()
            .map(|m| {
                Ok(DistanceRow {
                    metric: *m,
                    label: m.label(),
                    distance: distance(&f, &g, m)?,
                })
            })
            .collect::<stepanov_core::Result<Vec<_>>>()?;
        out.json("distance.json", &rows)?;
    }

    if !args.radii.is_empty() {
        let profile = ergodic_profile(&f, &WeightMeasure::Lebesgue, &args.radii)?;
        out.csv("ergodic.csv", |w| write_ergodic_csv(&profile, w))?;
    }

    let m = manifest(
        command,
        args.spec.display().to_string(),
        Some(sha256_hex(&bytes)),
        None,
        &args.out,
    );
    out.commit(&args.out, m)?;
    for r in &reports {
        println!(
            "{}: {} of {} shifts accepted at eps {}",
            r.label, r.accepted, r.set.tested, args.eps
        );
    }
    println!("defect (p {}, mass {}): {defect}", args.defect_p, args.delta_mass);
    Ok(())
}
