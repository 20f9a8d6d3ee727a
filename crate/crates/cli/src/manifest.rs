//! `manifest.json`: inputs, outputs and the configuration that produced them.

use crate::config::RunConfig;
use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub config: &'a RunConfig,
    pub config_hash: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub versions: BTreeMap<&'static str, &'static str>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn digest_file(path: &Path, label: String) -> Result<FileDigest> {
    let bytes = std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(FileDigest { path: label, sha256: sha256_hex(&bytes) })
}

/// Writes `manifest.json` into `out`, hashing every input and every output
/// file name listed (relative to `out`).
pub fn write_manifest(cfg: &RunConfig, out: &Path, outputs: &[String]) -> Result<()> {
    let config_json = serde_json::to_string(cfg)?;
    let inputs = [&cfg.mesh, &cfg.boundary]
        .into_iter()
        .flatten()
        .map(|p| digest_file(p, p.display().to_string()))
        .collect::<Result<Vec<_>>>()?;
    let mut names = outputs.to_vec();
    names.sort();
    let outputs = names.into_iter().map(|n| digest_file(&out.join(&n), n)).collect::<Result<Vec<_>>>()?;
    let versions = BTreeMap::from([("confdiam", env!("CARGO_PKG_VERSION"))]);
    let manifest = Manifest {
        command: &cfg.command,
        config: cfg,
        config_hash: sha256_hex(config_json.as_bytes()),
        inputs,
        outputs,
        versions,
    };
    crate::commands::write_json(&out.join("manifest.json"), &manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
