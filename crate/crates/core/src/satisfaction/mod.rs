//! Behavioral anchors: multimodal satisfaction scores per service and per
//! operation.
//!
//! The service score combines the corpus-standardized visual and audio
//! emotion sums with the per-operation duration z-scores:
//!
//! ```text
//! CS_s = w_v * f(sum m_v v_i) + w_a * f(sum m_a a_j) - w_e * sum_t z_{e,t}
//! ```

mod score;
mod weights;

pub use score::{
    audio_raw_sum, event_zscores, service_score, standardize_across_services, visual_raw_sum, EventZ,
    Modalities, OperationScore, SatisfactionReport, ScoringContext, ServiceChannels, Standardized,
};
pub use weights::{ChannelWeights, MagnitudeWeights};

use serde::{Deserialize, Serialize};

/// Scoring settings; every field can be overridden from the config document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SatisfactionConfig {
    pub visual_magnitudes: MagnitudeWeights,
    pub audio_magnitudes: MagnitudeWeights,
    pub channels: ChannelWeights,
    /// Within-service |z| above which an operation score becomes an anchor.
    pub anchor_threshold: f64,
}

impl Default for SatisfactionConfig {
    fn default() -> Self {
        SatisfactionConfig {
            visual_magnitudes: MagnitudeWeights::default(),
            audio_magnitudes: MagnitudeWeights::default(),
            channels: ChannelWeights::default(),
            anchor_threshold: 2.0,
        }
    }
}

impl SatisfactionConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.visual_magnitudes
            .validate()
            .map_err(|e| format!("visual_magnitudes: {e}"))?;
        self.audio_magnitudes
            .validate()
            .map_err(|e| format!("audio_magnitudes: {e}"))?;
        self.channels.validate().map_err(|e| format!("channels: {e}"))?;
        if !(self.anchor_threshold > 0.0) {
            return Err("anchor_threshold must be positive".into());
        }
        Ok(())
    }
}
