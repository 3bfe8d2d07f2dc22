use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;

use stepanov_core::corpus::{run_scenario, scenario, ExpectedCheck, RunOutput, ScenarioModel};
use stepanov_core::law::{apd_test, write_apd_csv};
use stepanov_core::sde::SolverKind;
use stepanov_core::Scenario;

use crate::artifacts::{manifest, sha256_hex, Artifacts};
use crate::{CliResult, Command, Failure, SolveArgs};

const HYPOTHESIS_PROBES: usize = 512;

/// Fallback acceptance level for `--tau` shifts.
const DEFAULT_APD_EPS: f64 = 0.05;

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RunInfo {
    scenario: String,
    solver: Option<SolverKind>,
    ensemble_n: Option<usize>,
    seed: Option<u64>,
    memory_t: f64,
    picard_iterations: Option<usize>,
    theta_st: Option<f64>,
}

fn load(name: &str) -> CliResult<(Scenario, Option<Vec<u8>>)> {
    let path = Path::new(name);
    if name.ends_with(".json") || path.is_file() {
        let bytes = fs::read(path)
            .with_context(|| format!("reading {name}"))
            .map_err(Failure::input)?;
        let s: Scenario = serde_json::from_slice(&bytes)
            .with_context(|| format!("parsing scenario {name}"))
            .map_err(Failure::input)?;
        if let ScenarioModel::Stochastic {
            problem,
            config,
            companion,
        } = &s.model
        {
            config.validate()?;
            for p in std::iter::once(problem).chain(companion) {
                p.validate()?;
                p.check_hypotheses(HYPOTHESIS_PROBES, 0)?;
            }
        }
        Ok((s, Some(bytes)))
    } else {
        Ok((scenario(name)?, None))
    }
}

fn apd_eps(s: &Scenario, args: &SolveArgs) -> f64 {
    args.eps.unwrap_or_else(|| {
        s.expected
            .iter()
            .find_map(|c| match c {
                ExpectedCheck::ApdAccept { epsilon, .. } | ExpectedCheck::ApdReject { epsilon, .. } => Some(*epsilon),
                _ => None,
            })
            .unwrap_or(DEFAULT_APD_EPS)
    })
}

pub fn run(args: &SolveArgs, command: &Command) -> CliResult {
    let (base, bytes) = load(&args.scenario)?;
    let s = base.with_overrides(args.n, args.seed, args.dt, args.t0, args.t1)?;
    let run = run_scenario(&s, args.solver.into())?;

    let mut out = Artifacts::default();
    out.json("scenario.json", &s)?;
    let (info, seed) = match &run.output {
        RunOutput::Deterministic(path) => {
            out.csv("path.csv", |w| path.write_csv(w))?;
            let memory_t = match &s.model {
                ScenarioModel::Deterministic { memory_t, .. } => *memory_t,
                ScenarioModel::Stochastic { .. } => unreachable!("deterministic output"),
            };
            let info = RunInfo {
                scenario: s.name.clone(),
                solver: None,
                ensemble_n: None,
                seed: None,
                memory_t,
                picard_iterations: None,
                theta_st: None,
            };
            (info, None)
        }
        RunOutput::Stochastic { ensemble, companion } => {
            out.csv("ensemble.csv", |w| ensemble.write_csv(w, Some(args.csv_members)))?;
            if ensemble.solver == SolverKind::Picard {
                out.csv("diagnostics.csv", |w| ensemble.write_diagnostics_csv(w))?;
            }
            if let Some(c) = companion {
                out.csv("companion_ensemble.csv", |w| c.write_csv(w, Some(args.csv_members)))?;
            }
            let taus = if args.tau.is_empty() {
                s.apd_taus()
            } else {
                args.tau.clone()
            };
            if !taus.is_empty() {
                let rows = apd_test(ensemble, &taus, apd_eps(&s, args), args.p)?;
                out.json("apd.json", &rows)?;
                out.csv("apd.csv", |w| write_apd_csv(&rows, w))?;
            }
            let info = RunInfo {
                scenario: s.name.clone(),
                solver: Some(ensemble.solver),
                ensemble_n: Some(ensemble.len()),
                seed: Some(ensemble.driver_seed),
                memory_t: ensemble.config.memory_t,
                picard_iterations: (ensemble.solver == SolverKind::Picard).then_some(ensemble.diagnostics.len()),
                theta_st: ensemble.theta_st,
            };
            (info, Some(ensemble.driver_seed))
        }
    };
    out.json("run.json", &info)?;
    out.json("summary.json", &run.outcomes)?;

    let m = manifest(
        command,
        args.scenario.clone(),
        bytes.as_deref().map(sha256_hex),
        seed,
        &args.out,
    );
    out.commit(&args.out, m)?;

    for o in &run.outcomes {
        println!(
            "{:<4} {} observed {} {} {} (tolerance {})",
            if o.pass { "ok" } else { "FAIL" },
            o.check,
            o.observed,
            o.relation,
            o.expected,
            o.tolerance
        );
    }
    let failed = run.outcomes.iter().filter(|o| !o.pass).count();
    if failed > 0 {
        return Err(Failure::check(anyhow!("{failed} expected checks failed")));
    }
    Ok(())
}
