//! Pre-extracted multimodal features.
//!
//! Face detection, expression recognition, head pose, diarization and audio
//! emotion models run upstream; this module ingests their per-frame and
//! per-utterance outputs, cleans them up and aligns them with the operation
//! runs of a service record.

mod align;
mod fusion;
mod io;
mod smooth;
mod speakers;

pub use align::{align_features, AlignError, AlignedOperationFeatures, Alignment};
pub use fusion::{activation_series, fuse_activation, ActivationCounts, ActivationPoint};
pub use io::{
    read_frames, read_utterances, write_frames, write_utterances, CoverageSummary,
    FeatureIoError, FRAME_SCHEMA, SCHEMA_VERSION, UTTERANCE_SCHEMA,
};
pub use smooth::{apply_occlusion_rule, smooth_frames, triangular_smooth, SmoothError};
pub use speakers::{register_agent, resolve_speakers, SpeakerEvidence, SpeakerRoles};

use serde::{Deserialize, Serialize};

use crate::event_log::{Millis, Party};

/// Discrete emotion classes produced by the recognition models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Anger,
    Disgust,
    Fear,
    Sadness,
    Neutral,
    Surprise,
    Happiness,
}

impl Emotion {
    pub const ALL: [Emotion; 7] = [
        Emotion::Anger,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Sadness,
        Emotion::Neutral,
        Emotion::Surprise,
        Emotion::Happiness,
    ];
}

/// Tri-class polarity, plus `Absent` when no face (or no speech) was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Negative,
    Neutral,
    Positive,
    Absent,
}

/// Collapses a discrete emotion into positive / neutral / negative.
///
/// Surprise is treated as neutral.
pub fn aggregate_polarity(emotion: Emotion) -> Polarity {
    match emotion {
        Emotion::Happiness => Polarity::Positive,
        Emotion::Neutral | Emotion::Surprise => Polarity::Neutral,
        Emotion::Anger | Emotion::Disgust | Emotion::Fear | Emotion::Sadness => Polarity::Negative,
    }
}

fn polarity_of(emotion: Option<Emotion>) -> Polarity {
    emotion.map_or(Polarity::Absent, aggregate_polarity)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Agent,
    Client,
    #[default]
    Unknown,
}

/// One video frame's visual features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameFeature {
    pub frame_index: u64,
    pub ts: Millis,
    /// Whose face the frame describes. Satisfaction scoring only reads client frames.
    #[serde(default)]
    pub subject: Party,
    pub face_present: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emotion: Option<Emotion>,
    pub polarity: Polarity,
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl FrameFeature {
    /// A frame with a detected face; `emotion = None` means no face.
    pub fn new(frame_index: u64, ts: Millis, emotion: Option<Emotion>) -> Self {
        FrameFeature {
            frame_index,
            ts,
            subject: Party::Client,
            face_present: emotion.is_some(),
            emotion,
            polarity: polarity_of(emotion),
            yaw: 0.0,
            pitch: 0.0,
            roll: 0.0,
        }
    }

    pub fn with_pose(mut self, yaw: f64, pitch: f64, roll: f64) -> Self {
        self.yaw = yaw;
        self.pitch = pitch;
        self.roll = roll;
        self
    }

    pub fn with_subject(mut self, subject: Party) -> Self {
        self.subject = subject;
        self
    }

    /// Sets or clears the detected face, keeping polarity consistent.
    pub fn set_emotion(&mut self, emotion: Option<Emotion>) {
        self.face_present = emotion.is_some();
        self.emotion = emotion;
        self.polarity = polarity_of(emotion);
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.face_present != self.emotion.is_some() {
            return Err("face_present must match presence of an emotion".into());
        }
        if self.polarity != polarity_of(self.emotion) {
            return Err(format!(
                "polarity {:?} inconsistent with emotion {:?}",
                self.polarity, self.emotion
            ));
        }
        for (name, v) in [("yaw", self.yaw), ("pitch", self.pitch), ("roll", self.roll)] {
            if !(-90.0..=90.0).contains(&v) {
                return Err(format!("{name} {v} outside [-90, 90]"));
            }
        }
        Ok(())
    }
}

/// One diarized utterance with its audio emotion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceFeature {
    pub start_ts: Millis,
    pub end_ts: Millis,
    #[serde(default)]
    pub speaker: Speaker,
    /// Diarization cluster / voiceprint label, used to register the agent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<String>,
    pub emotion: Emotion,
    pub polarity: Polarity,
}

impl UtteranceFeature {
    pub fn new(start_ts: Millis, end_ts: Millis, speaker: Speaker, emotion: Emotion) -> Self {
        UtteranceFeature {
            start_ts,
            end_ts,
            speaker,
            cluster: None,
            emotion,
            polarity: aggregate_polarity(emotion),
        }
    }

    pub fn with_cluster(mut self, cluster: &str) -> Self {
        self.cluster = Some(cluster.to_string());
        self
    }

    pub fn duration_ms(&self) -> Millis {
        self.end_ts - self.start_ts
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_ms() as f64 / 1000.0
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.start_ts >= self.end_ts {
            return Err(format!(
                "utterance start {} not before end {}",
                self.start_ts, self.end_ts
            ));
        }
        if self.polarity != aggregate_polarity(self.emotion) {
            return Err(format!(
                "polarity {:?} inconsistent with emotion {:?}",
                self.polarity, self.emotion
            ));
        }
        Ok(())
    }
}

/// Checks that utterances of one known speaker never overlap.
pub fn check_speaker_overlap(utterances: &[UtteranceFeature]) -> Result<(), String> {
    for speaker in [Speaker::Agent, Speaker::Client] {
        let mut spans: Vec<_> = utterances
            .iter()
            .filter(|u| u.speaker == speaker)
            .map(|u| (u.start_ts, u.end_ts))
            .collect();
        spans.sort_unstable();
        for w in spans.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(format!(
                    "{speaker:?} utterances overlap at {}..{} and {}..{}",
                    w[0].0, w[0].1, w[1].0, w[1].1
                ));
            }
        }
    }
    Ok(())
}
