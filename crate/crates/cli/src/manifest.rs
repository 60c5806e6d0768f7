//! Run manifests: every subcommand drops a `manifest.json` next to its
//! outputs recording what produced them.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Digest of the config file, when one was given.
    pub config_hash: Option<String>,
    /// SHA-256 per input file.
    pub input_digests: BTreeMap<String, String>,
    pub seed: u64,
    pub tool_version: String,
    pub duration_secs: f64,
}

pub struct ManifestBuilder {
    subcommand: String,
    config_hash: Option<String>,
    inputs: BTreeMap<String, String>,
    seed: u64,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(subcommand: &str, seed: u64) -> Self {
        ManifestBuilder {
            subcommand: subcommand.to_string(),
            config_hash: None,
            inputs: BTreeMap::new(),
            seed,
            started: Instant::now(),
        }
    }

    pub fn config(&mut self, path: &Path) -> Result<()> {
        self.config_hash = Some(digest_file(path)?);
        Ok(())
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs
            .insert(path.display().to_string(), digest_file(path)?);
        Ok(())
    }

    /// Write `manifest.json` into `out_dir`.
    pub fn write(self, out_dir: &Path) -> Result<()> {
        let manifest = RunManifest {
            subcommand: self.subcommand,
            config_hash: self.config_hash,
            input_digests: self.inputs,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            duration_secs: self.started.elapsed().as_secs_f64(),
        };
        let path = out_dir.join("manifest.json");
        let json = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(&path, json + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

pub fn digest_file(path: &Path) -> Result<String> {
    let mut file = std::fs::File::open(path)
        .with_context(|| format!("hashing {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    let digest = hasher.finalize();
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}
