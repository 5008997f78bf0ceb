use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::Command;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputHash {
    pub path: PathBuf,
    pub sha256: String,
}

/// Everything needed to repeat a run: the resolved command line and the
/// content hashes of its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub inputs: Vec<InputHash>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Make every input path absolute so the manifest can be replayed from any
/// working directory.
pub fn resolve_inputs(cmd: &mut Command) -> Result<()> {
    for p in cmd.inputs_mut() {
        *p = fs::canonicalize(&*p).with_context(|| format!("input file {}", p.display()))?;
    }
    Ok(())
}

impl RunManifest {
    pub fn new(cmd: &Command) -> Result<Self> {
        let mut command = cmd.clone();
        let inputs = command
            .inputs_mut()
            .into_iter()
            .map(|p| Ok(InputHash { sha256: sha256_file(p)?, path: p.clone() }))
            .collect::<Result<Vec<_>>>()?;
        Ok(RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            inputs,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    /// Fail if any recorded input changed since the manifest was written.
    pub fn verify_inputs(&self) -> Result<()> {
        for input in &self.inputs {
            let now = sha256_file(&input.path)?;
            if now != input.sha256 {
                bail!("input {} changed since the manifest was written", input.path.display());
            }
        }
        if self.version != env!("CARGO_PKG_VERSION") {
            eprintln!(
                "warning: manifest written by version {}, running {}",
                self.version,
                env!("CARGO_PKG_VERSION")
            );
        }
        Ok(())
    }
}
