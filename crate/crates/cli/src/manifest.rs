use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

/// Provenance block embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config: Value,
    pub master_seed: u64,
    pub library_version: String,
    pub platform: String,
    pub started_unix_ms: u128,
    pub elapsed_ms: u128,
}

impl RunManifest {
    pub fn new(config: Value, master_seed: u64) -> Self {
        let started = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0);
        RunManifest {
            command_line: std::env::args().collect(),
            config,
            master_seed,
            library_version: lpgeom::VERSION.to_string(),
            platform: format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS),
            started_unix_ms: started,
            elapsed_ms: 0,
        }
    }

    pub fn finish(&mut self) {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0);
        self.elapsed_ms = now.saturating_sub(self.started_unix_ms);
    }
}
