use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::settings::{FileConfig, Settings};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Written beside the outputs of every artifact-producing command.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: BTreeMap<String, serde_json::Value>,
    pub config: FileConfig,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub timestamp: String,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Input files: a single file, or every `*.las` in a directory.
pub fn digest_inputs(path: &Path) -> Result<Vec<InputDigest>> {
    let mut files = Vec::new();
    if path.is_dir() {
        for entry in std::fs::read_dir(path).with_context(|| format!("listing {}", path.display()))? {
            let p = entry?.path();
            if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("las")) {
                files.push(p);
            }
        }
        files.sort();
    } else {
        files.push(path.to_path_buf());
    }
    files.into_iter().map(|p| Ok(InputDigest { sha256: sha256_file(&p)?, path: p })).collect()
}

impl RunManifest {
    pub fn new(command: &str, settings: &Settings) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            arguments: BTreeMap::new(),
            config: settings.to_file_config(),
            seeds: BTreeMap::from([("seed".to_string(), settings.seed)]),
            inputs: Vec::new(),
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn argument(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.arguments.insert(key.to_string(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
        self
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        self.inputs.extend(digest_inputs(path)?);
        Ok(self)
    }

    pub fn write(&mut self, out: &Path) -> Result<()> {
        self.outputs.sort();
        self.outputs.dedup();
        let path = out.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}
