use std::fs;
use std::path::{Path, PathBuf};

use anchorscope::pipeline::{FitPlan, NormalSelector, PipelineConfig};
use serde::{Deserialize, Serialize};

use crate::ServerError;

/// Environment variable that overrides `dataset_dir`.
pub const DATASET_ENV: &str = "ANCHORSCOPE_DATASET";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub host: String,
    pub port: u16,
    pub dataset_dir: PathBuf,
    /// TOML file with pipeline and scoring settings.
    pub scoring_config: Option<PathBuf>,
    /// Fit on these sessions instead of the labeled normals.
    pub normal_sessions: Vec<String>,
    /// Train the transition model on the catalog order.
    pub guideline: bool,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            host: "127.0.0.1".into(),
            port: 8080,
            dataset_dir: PathBuf::from("dataset"),
            scoring_config: None,
            normal_sessions: Vec::new(),
            guideline: false,
        }
    }
}

impl ServerConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ServerError> {
        toml::from_str(text).map_err(|e| ServerError::Config(e.to_string()))
    }

    /// Reads `path`; relative paths inside resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, ServerError> {
        let text = fs::read_to_string(path).map_err(|e| ServerError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(base) = path.parent() {
            if cfg.dataset_dir.is_relative() {
                cfg.dataset_dir = base.join(&cfg.dataset_dir);
            }
            if let Some(p) = cfg.scoring_config.as_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    /// Applies `ANCHORSCOPE_DATASET` when set.
    pub fn with_env(mut self) -> Self {
        if let Some(dir) = std::env::var_os(DATASET_ENV) {
            self.dataset_dir = PathBuf::from(dir);
        }
        self
    }

    pub fn pipeline_config(&self) -> Result<PipelineConfig, ServerError> {
        match &self.scoring_config {
            Some(p) => Ok(PipelineConfig::load(p)?),
            None => Ok(PipelineConfig::default()),
        }
    }

    pub fn fit_plan(&self) -> FitPlan {
        FitPlan {
            normals: if self.normal_sessions.is_empty() {
                NormalSelector::Labeled
            } else {
                NormalSelector::Sessions(self.normal_sessions.clone())
            },
            sequential_from_guideline: self.guideline,
        }
    }

    pub fn address(&self) -> String {
        format!("{}:{}", self.host, self.port)
    }
}
