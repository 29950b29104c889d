//! Run manifests: the resolved configuration, the seed, and a content
//! digest for every emitted data file, so a rerun can be checked byte for
//! byte against the original.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{runtime, usage, AppResult};

pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: u32,
    pub command: String,
    /// Fully resolved parameters, keyed by flag name, echoed as the exact
    /// strings the parser round-trips (shortest-exact for floats).
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    /// SHA-256 hex digest per emitted data file, keyed by file name.
    pub files: BTreeMap<String, String>,
    pub wall_clock_seconds: f64,
    pub steps_done: u64,
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> AppResult<()> {
        let json = serde_json::to_string_pretty(self).map_err(runtime)?;
        fs::write(path, json + "\n").map_err(runtime)?;
        Ok(())
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| usage(format!("malformed manifest {}: {e}", path.display())))
    }
}

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> AppResult<String> {
    let bytes = fs::read(path).map_err(runtime)?;
    Ok(Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}
