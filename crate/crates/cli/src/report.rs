use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};

use stepanov_core::corpus::CheckOutcome;

use crate::artifacts::{sha256_hex, RunManifest, MANIFEST};
use crate::{CliResult, Command, Failure, ReportArgs};

fn read_manifest(dir: &Path) -> CliResult<RunManifest> {
    let path = dir.join(MANIFEST);
    let bytes = fs::read(&path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::input)?;
    serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::input)
}

/// Names of artifacts whose current checksum differs from the manifest.
fn mismatches(dir: &Path, m: &RunManifest) -> Vec<String> {
    m.artifacts
        .iter()
        .filter(|(name, sum)| match fs::read(dir.join(name)) {
            Ok(bytes) => &sha256_hex(&bytes) != *sum,
            Err(_) => true,
        })
        .map(|(name, _)| name.clone())
        .collect()
}

pub fn run(args: &ReportArgs) -> CliResult {
    let m = read_manifest(&args.dir)?;
    let bad = mismatches(&args.dir, &m);
    println!("input: {}", m.input);
    println!("artifacts: {} ({} checksum mismatches)", m.artifacts.len(), bad.len());
    if !bad.is_empty() {
        return Err(Failure::check(anyhow!("checksum mismatch: {}", bad.join(", "))));
    }

    let mut failed = 0;
    let summary = args.dir.join("summary.json");
    if summary.is_file() {
        let bytes = fs::read(&summary).map_err(Failure::input)?;
        let outcomes: Vec<CheckOutcome> = serde_json::from_slice(&bytes)
            .context("parsing summary.json")
            .map_err(Failure::input)?;
        for o in &outcomes {
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
        failed = outcomes.iter().filter(|o| !o.pass).count();
    }

    if let Some(target) = &args.replay {
        let mut invocation = m.invocation.clone();
        match &mut invocation {
            Command::Analyze(a) => a.out = target.clone(),
            Command::Solve(s) => s.out = target.clone(),
            Command::Report(_) => return Err(Failure::input(anyhow!("manifest records a report command"))),
        }
        // A failing check is reproduced too; only the bytes matter here.
        match crate::run(&invocation) {
            Ok(()) => {}
            Err(f) if f.code == 4 => {}
            Err(f) => return Err(f),
        }
        let replayed = read_manifest(target)?;
        let differing: Vec<&String> = m
            .artifacts
            .iter()
            .filter(|(name, sum)| replayed.artifacts.get(*name) != Some(sum))
            .map(|(name, _)| name)
            .collect();
        if !differing.is_empty() || replayed.artifacts.len() != m.artifacts.len() {
            return Err(Failure::check(anyhow!("replay differs in {differing:?}")));
        }
        println!(
            "replay into {}: all {} artifacts identical",
            target.display(),
            m.artifacts.len()
        );
    }

    if failed > 0 {
        return Err(Failure::check(anyhow!("{failed} expected checks failed")));
    }
    Ok(())
}
