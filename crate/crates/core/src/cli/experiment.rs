use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classify::prompts::{BASELINE_PROMPT, REQUIREMENT_PROMPT};
use crate::classify::{LabelMapping, RunOptions};
use crate::llm::{ModelParams, RemoteConfig, DEFAULT_IN_FLIGHT};
use crate::model::{validate_config, DebateConfig, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Baseline,
    Mad,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselinePrompts {
    #[serde(default = "default_system_prompt")]
    pub system_prompt: String,
    #[serde(default = "default_user_prompt")]
    pub user_prompt: String,
}

fn default_system_prompt() -> String {
    BASELINE_PROMPT.to_string()
}

fn default_user_prompt() -> String {
    REQUIREMENT_PROMPT.to_string()
}

impl Default for BaselinePrompts {
    fn default() -> Self {
        BaselinePrompts {
            system_prompt: default_system_prompt(),
            user_prompt: default_user_prompt(),
        }
    }
}

/// One experiment setting: which pipeline, which model, and for debates the
/// full debate configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pipeline: Pipeline,
    #[serde(default)]
    pub model: ModelParams,
    #[serde(default)]
    pub remote: RemoteConfig,
    #[serde(default)]
    pub baseline: BaselinePrompts,
    /// Label mapping file, relative to the config file. Defaults to the
    /// built-in PROMISE mapping.
    #[serde(default)]
    pub label_mapping: Option<PathBuf>,
    #[serde(default)]
    pub debate: Option<DebateConfig>,
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Syntax {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("pipeline `mad` needs a [debate] table")]
    MissingDebate,
    #[error("pipeline `baseline` does not take a [debate] table")]
    UnexpectedDebate,
    #[error("debate config has {} violation(s)", .0.len())]
    Invalid(Vec<Violation>),
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::parse(&text).map_err(|source| ExperimentError::Syntax {
            path: path.to_path_buf(),
            source,
        })?;
        if let Some(mapping) = &config.label_mapping {
            if mapping.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                config.label_mapping = Some(base.join(mapping));
            }
        }
        Ok(config)
    }

    /// Pipeline/debate consistency plus every debate-config violation.
    pub fn check(&self) -> Result<(), ExperimentError> {
        match (self.pipeline, &self.debate) {
            (Pipeline::Mad, None) => Err(ExperimentError::MissingDebate),
            (Pipeline::Baseline, Some(_)) => Err(ExperimentError::UnexpectedDebate),
            (Pipeline::Mad, Some(debate)) => {
                let violations = validate_config(debate);
                if violations.is_empty() {
                    Ok(())
                } else {
                    Err(ExperimentError::Invalid(violations))
                }
            }
            (Pipeline::Baseline, None) => Ok(()),
        }
    }

    pub fn label_mapping(&self) -> Result<LabelMapping, ExperimentError> {
        let Some(path) = &self.label_mapping else {
            return Ok(LabelMapping::default());
        };
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.clone(),
            source,
        })?;
        LabelMapping::from_toml(&text).map_err(|source| ExperimentError::Syntax {
            path: path.clone(),
            source,
        })
    }

    pub fn run_options(&self, max_concurrency: Option<usize>) -> RunOptions {
        RunOptions {
            model: self.model.clone(),
            max_concurrency: max_concurrency.unwrap_or(DEFAULT_IN_FLIGHT),
            baseline_prompt: self.baseline.system_prompt.clone(),
            user_prompt: self.baseline.user_prompt.clone(),
        }
    }

    /// sha256 of the canonical JSON form; the label-mapping path is left out
    /// so moving the repo does not change it.
    pub fn fingerprint(&self) -> String {
        let mut canonical = self.clone();
        canonical.label_mapping = canonical
            .label_mapping
            .as_ref()
            .and_then(|p| p.file_name().map(PathBuf::from));
        let bytes = serde_json::to_vec(&canonical).expect("ExperimentConfig always serializes");
        hex::encode(Sha256::digest(bytes))
    }
}
