use std::time::{SystemTime, UNIX_EPOCH};

use boundsat::engine::EngineConfig;
use boundsat::oracle::OracleConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigSnapshot {
    pub seed: u64,
    pub engine: EngineConfig,
    pub oracle: OracleConfig,
}

/// Everything needed to rerun a command and get the same records back,
/// timings aside.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub config: ConfigSnapshot,
    pub inputs: Vec<InputDigest>,
    /// Milliseconds since the Unix epoch.
    pub started_at_ms: u128,
    pub finished_at_ms: u128,
}

pub fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn start(config: ConfigSnapshot) -> Self {
        RunManifest {
            tool: "boundsat",
            version: env!("CARGO_PKG_VERSION"),
            command: std::env::args().collect(),
            config,
            inputs: vec![],
            started_at_ms: now_ms(),
            finished_at_ms: 0,
        }
    }

    pub fn add_input(&mut self, path: &str, bytes: &[u8]) {
        self.inputs.push(InputDigest {
            path: path.to_string(),
            sha256: sha256_hex(bytes),
        });
    }

    pub fn finish(&mut self) {
        self.finished_at_ms = now_ms();
    }
}
