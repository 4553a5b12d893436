use serde::{Deserialize, Serialize};

use crate::features::Emotion;

/// Signed contribution of each discrete emotion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagnitudeWeights {
    pub happiness: f64,
    pub neutral: f64,
    pub surprise: f64,
    pub fear: f64,
    pub sadness: f64,
    pub disgust: f64,
    pub anger: f64,
}

impl Default for MagnitudeWeights {
    fn default() -> Self {
        MagnitudeWeights {
            happiness: 1.0,
            neutral: 0.0,
            surprise: 0.0,
            fear: -1.0,
            sadness: -1.0,
            disgust: -1.0,
            anger: -1.2,
        }
    }
}

impl MagnitudeWeights {
    pub fn weight(&self, emotion: Emotion) -> f64 {
        match emotion {
            Emotion::Happiness => self.happiness,
            Emotion::Neutral => self.neutral,
            Emotion::Surprise => self.surprise,
            Emotion::Fear => self.fear,
            Emotion::Sadness => self.sadness,
            Emotion::Disgust => self.disgust,
            Emotion::Anger => self.anger,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.happiness > 0.0) {
            return Err("happiness weight must be positive".into());
        }
        if self.neutral != 0.0 {
            return Err("neutral weight must be 0".into());
        }
        for (name, w) in [
            ("anger", self.anger),
            ("disgust", self.disgust),
            ("fear", self.fear),
            ("sadness", self.sadness),
        ] {
            if !(w < 0.0) {
                return Err(format!("{name} weight must be negative"));
            }
        }
        if Emotion::ALL.iter().any(|&e| self.weight(e) < self.anger) {
            return Err("anger must carry the lowest weight".into());
        }
        Ok(())
    }
}

/// Per-channel weights of the service score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelWeights {
    pub visual: f64,
    pub audio: f64,
    pub event: f64,
}

impl Default for ChannelWeights {
    fn default() -> Self {
        ChannelWeights {
            visual: 1.0 / 3.0,
            audio: 1.0 / 3.0,
            event: 1.0 / 3.0,
        }
    }
}

impl ChannelWeights {
    pub fn scaled(self, c: f64) -> Self {
        ChannelWeights {
            visual: self.visual * c,
            audio: self.audio * c,
            event: self.event * c,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let ws = [self.visual, self.audio, self.event];
        if ws.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err("channel weights must be finite and non-negative".into());
        }
        if ws.iter().all(|w| *w == 0.0) {
            return Err("at least one channel weight must be positive".into());
        }
        Ok(())
    }
}
