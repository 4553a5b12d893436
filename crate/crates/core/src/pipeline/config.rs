use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::anomaly::ComponentSelection;
use crate::event_log::LogGrammar;
use crate::satisfaction::SatisfactionConfig;
use crate::sim::ScenarioType;

/// Every tunable of the ingest, fit and score stages.
///
/// Loaded from TOML; missing keys fall back to the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub grammar: LogGrammar,
    /// Half-width, in frames, of the triangular occupancy and pose filter.
    pub smoothing_half_window: i64,
    /// Faces pitched further down than this are treated as obscured.
    pub pitch_down_occlusion_deg: f64,
    /// Resampled sequence length for the transition model.
    pub markov_window: usize,
    /// Transition floor; `None` uses one tenth of `1 / n`.
    pub markov_epsilon: Option<f64>,
    pub pca_components: ComponentSelection,
    /// Residual quantile used as the temporal threshold.
    pub pca_alpha: f64,
    /// Labels treated as normal when fitting from a labeled corpus.
    pub normal_labels: Vec<ScenarioType>,
    pub satisfaction: SatisfactionConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            grammar: LogGrammar::default(),
            smoothing_half_window: 7,
            pitch_down_occlusion_deg: 30.0,
            markov_window: 32,
            markov_epsilon: None,
            pca_components: ComponentSelection::default(),
            pca_alpha: 0.95,
            normal_labels: vec![ScenarioType::ST, ScenarioType::NM],
            satisfaction: SatisfactionConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, PipelineError> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.smoothing_half_window < 0 {
            return bad(format!("smoothing_half_window {} < 0", self.smoothing_half_window));
        }
        if !(self.pitch_down_occlusion_deg > 0.0 && self.pitch_down_occlusion_deg <= 90.0) {
            return bad("pitch_down_occlusion_deg must be in (0, 90]".into());
        }
        if self.markov_window < 2 {
            return bad("markov_window must be at least 2".into());
        }
        if let Some(eps) = self.markov_epsilon {
            if !(eps > 0.0 && eps < 1.0) {
                return bad("markov_epsilon must be in (0, 1)".into());
            }
        }
        if !(self.pca_alpha > 0.0 && self.pca_alpha < 1.0) {
            return bad("pca_alpha must be in (0, 1)".into());
        }
        match self.pca_components {
            ComponentSelection::Fixed(0) => return bad("pca_components fixed k must be positive".into()),
            ComponentSelection::VarianceFraction(f) if !(f > 0.0 && f <= 1.0) => {
                return bad("pca_components variance fraction must be in (0, 1]".into())
            }
            _ => {}
        }
        self.satisfaction.validate().map_err(PipelineError::Config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_and_partial() {
        let cfg = PipelineConfig::default();
        let text = cfg.to_toml_string();
        assert_eq!(PipelineConfig::from_toml_str(&text).unwrap(), cfg);
        let partial = PipelineConfig::from_toml_str("markov_window = 16\n[satisfaction.channels]\nvisual = 1.0\naudio = 1.0\nevent = 0.0\n").unwrap();
        assert_eq!(partial.markov_window, 16);
        assert_eq!(partial.satisfaction.channels.event, 0.0);
        assert_eq!(partial.smoothing_half_window, 7);
    }

    #[test]
    fn rejects_invalid() {
        assert!(PipelineConfig::from_toml_str("markov_window = 1").is_err());
        assert!(PipelineConfig::from_toml_str("pca_alpha = 1.5").is_err());
        assert!(PipelineConfig::from_toml_str("unknown_key = 1").is_err());
        assert!(PipelineConfig::from_toml_str("[satisfaction.visual_magnitudes]\nhappiness = 1.0\nneutral = 0.0\nsurprise = 0.0\nfear = -1.0\nsadness = -1.0\ndisgust = -1.0\nanger = -0.5\n").is_err());
    }
}
