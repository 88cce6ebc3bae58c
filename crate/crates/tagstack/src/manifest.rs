//! Run manifests: enough to reproduce an output byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

impl FileDigest {
    pub fn of_bytes(path: &Path, data: &[u8]) -> Self {
        Self {
            path: path.display().to_string(),
            bytes: data.len() as u64,
            sha256: hex::encode(Sha256::digest(data)),
        }
    }

    pub fn of_file(path: &Path) -> io::Result<Self> {
        Ok(Self::of_bytes(path, &fs::read(path)?))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Every parameter after defaults were applied, including ones with
    /// no flag (clustering internals).
    pub params: BTreeMap<String, Value>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            tool: "tagstack",
            version: VERSION,
            command: command.to_string(),
            params: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn param(&mut self, name: &str, v: impl Into<Value>) -> &mut Self {
        self.params.insert(name.to_string(), v.into());
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// `out.csv` -> `out.manifest.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}
