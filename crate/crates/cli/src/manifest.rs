use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{json_bytes, Check, FileRecord};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    /// Seconds; the only field that differs between identical runs.
    pub wall_time_s: f64,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub files: Vec<FileRecord>,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let v = serde_json::to_value(self).map_err(|e| CliError::Config(e.to_string()))?;
        std::fs::write(dir.join(MANIFEST_NAME), json_bytes(&v))?;
        Ok(())
    }

    pub fn read(path: &Path) -> CliResult<RunManifest> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("malformed manifest: {e}")))
    }

    /// Names whose digests differ from `other`, plus files present in only one.
    pub fn digest_mismatches(&self, other: &RunManifest) -> Vec<String> {
        let mut out = Vec::new();
        for f in &self.files {
            match other.files.iter().find(|g| g.name == f.name) {
                Some(g) if g.sha256 == f.sha256 => {}
                _ => out.push(f.name.clone()),
            }
        }
        for g in &other.files {
            if !self.files.iter().any(|f| f.name == g.name) {
                out.push(g.name.clone());
            }
        }
        out
    }
}
