use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::experiment::Pipeline;
use crate::llm::Usage;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const PREDICTIONS_FILE: &str = "predictions.csv";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    pub items: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendInfo {
    pub descriptor: String,
    pub model_id: String,
    pub temperature: f64,
}

/// Written last, atomically; a run directory without one is an aborted run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub pipeline: Pipeline,
    pub config_fingerprint: String,
    pub dataset: DatasetInfo,
    pub backend: BackendInfo,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub totals: Usage,
    /// Items that fell back to the default label after backend errors.
    pub failed_items: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("{} has no {MANIFEST_FILE}; the run is missing or was aborted", .0.display())]
    Missing(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl RunManifest {
    pub fn wall_time(&self) -> std::time::Duration {
        (self.finished_at - self.started_at).to_std().unwrap_or_default()
    }

    /// Writes `manifest.json` via a temporary file and a rename.
    pub fn write(&self, run_dir: &Path) -> Result<(), ManifestError> {
        let target = run_dir.join(MANIFEST_FILE);
        let temp = run_dir.join(format!(".{MANIFEST_FILE}.tmp"));
        let io = |source| ManifestError::Io {
            path: target.clone(),
            source,
        };
        let json = serde_json::to_vec_pretty(self).expect("manifest always serializes");
        let mut file = std::fs::File::create(&temp).map_err(io)?;
        file.write_all(&json).map_err(io)?;
        file.write_all(b"\n").map_err(io)?;
        file.sync_all().map_err(io)?;
        std::fs::rename(&temp, &target).map_err(io)
    }

    pub fn read(run_dir: &Path) -> Result<Self, ManifestError> {
        let path = run_dir.join(MANIFEST_FILE);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(ManifestError::Missing(run_dir.to_path_buf()))
            }
            Err(source) => return Err(ManifestError::Io { path, source }),
        };
        serde_json::from_slice(&bytes).map_err(|source| ManifestError::Json { path, source })
    }
}
