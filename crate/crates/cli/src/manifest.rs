//! Run manifests: every stochastic run records its resolved parameters,
//! seed, artifact version and a checksum of its primary outputs, so the
//! run can be re-executed and verified byte for byte.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ConfigError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub output_checksum: String,
}

impl RunManifest {
    pub fn new(command: &str, params: serde_json::Value, seed: u64, checksum: String) -> Self {
        Self {
            command: command.to_string(),
            params,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            output_checksum: checksum,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            field: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        serde_json::from_str(&text).map_err(|e| ConfigError {
            line: Some(e.line()),
            field: None,
            message: format!("invalid manifest: {e}"),
        })
    }
}

/// 64-bit FNV-1a over the primary output bytes.
pub fn checksum(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &byte in bytes {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("fnv1a:{hash:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksum_is_stable_and_content_sensitive() {
        let a = checksum(b"ledger line 1\nledger line 2\n");
        assert_eq!(a, checksum(b"ledger line 1\nledger line 2\n"));
        assert_ne!(a, checksum(b"ledger line 1\nledger line 3\n"));
        assert_eq!(checksum(b""), "fnv1a:cbf29ce484222325");
    }

    #[test]
    fn manifest_round_trips_through_json() {
        let manifest = RunManifest::new(
            "demon",
            serde_json::json!({"particles_per_side": 10}),
            42,
            checksum(b"output"),
        );
        let text = manifest.to_json();
        let parsed: RunManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, manifest);
    }
}
