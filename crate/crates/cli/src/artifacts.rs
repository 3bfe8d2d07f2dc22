//! In-memory output files, written together with a checksum manifest once
//! every computation has succeeded.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{CliResult, Command, Failure};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub tool_version: String,
    /// The parsed invocation; `report --replay` re-runs it.
    pub invocation: Command,
    /// Spec path or scenario name.
    pub input: String,
    /// Checksum of the input file, when the input is a file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_sha256: Option<String>,
    pub seed: Option<u64>,
    pub out_dir: String,
    /// File name to SHA-256.
    pub artifacts: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(Failure::input)?;
        bytes.push(b'\n');
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    pub fn csv(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> stepanov_core::Result<()>) -> CliResult {
        let mut bytes = Vec::new();
        write(&mut bytes)?;
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    /// Writes every file and the manifest into `dir`.
    pub fn commit(self, dir: &Path, mut manifest: RunManifest) -> CliResult<RunManifest> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(Failure::input)?;
        for (name, bytes) in &self.files {
            fs::write(dir.join(name), bytes)
                .with_context(|| format!("writing {name}"))
                .map_err(Failure::input)?;
            manifest.artifacts.insert(name.clone(), sha256_hex(bytes));
        }
        let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(Failure::input)?;
        bytes.push(b'\n');
        fs::write(dir.join(MANIFEST), bytes)
            .context("writing manifest")
            .map_err(Failure::input)?;
        Ok(manifest)
    }
}

pub fn manifest(
    invocation: &Command,
    input: String,
    input_sha256: Option<String>,
    seed: Option<u64>,
    out: &Path,
) -> RunManifest {
    RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        invocation: invocation.clone(),
        input,
        input_sha256,
        seed,
        out_dir: out.display().to_string(),
        artifacts: BTreeMap::new(),
    }
}
