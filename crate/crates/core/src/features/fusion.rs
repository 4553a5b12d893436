use serde::{Deserialize, Serialize};

use super::{FrameFeature, Polarity, Speaker, UtteranceFeature};
use crate::event_log::{Millis, Party};

/// Fuses visual and audio polarity at one instant into -1, 0 or +1.
///
/// Any negative channel wins; otherwise any positive channel wins.
/// `audio = None` means nobody is speaking.
pub fn fuse_activation(visual: Polarity, audio: Option<Polarity>) -> i8 {
    let channels = [Some(visual), audio];
    if channels.contains(&Some(Polarity::Negative)) {
        -1
    } else if channels.contains(&Some(Polarity::Positive)) {
        1
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationPoint {
    pub frame_index: u64,
    pub ts: Millis,
    pub value: i8,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationCounts {
    pub negative: usize,
    pub neutral: usize,
    pub positive: usize,
}

impl ActivationCounts {
    pub fn from_series(series: &[ActivationPoint]) -> Self {
        let mut c = ActivationCounts::default();
        for p in series {
            match p.value {
                v if v < 0 => c.negative += 1,
                0 => c.neutral += 1,
                _ => c.positive += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.negative + self.neutral + self.positive
    }
}

/// The utterance speaking at `ts`: nearest midpoint among those covering it,
/// ties going to the client.
fn speaking_at(utterances: &[UtteranceFeature], ts: Millis) -> Option<&UtteranceFeature> {
    utterances
        .iter()
        .filter(|u| u.start_ts <= ts && ts < u.end_ts)
        .min_by_key(|u| {
            let twice_mid = u.start_ts + u.end_ts;
            ((2 * ts - twice_mid).abs(), u.speaker != Speaker::Client)
        })
}

/// Activation value for every client frame.
pub fn activation_series(frames: &[FrameFeature], utterances: &[UtteranceFeature]) -> Vec<ActivationPoint> {
    frames
        .iter()
        .filter(|f| f.subject == Party::Client)
        .map(|f| ActivationPoint {
            frame_index: f.frame_index,
            ts: f.ts,
            value: fuse_activation(f.polarity, speaking_at(utterances, f.ts).map(|u| u.polarity)),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Emotion;

    #[test]
    fn negative_dominates() {
        assert_eq!(fuse_activation(Polarity::Negative, Some(Polarity::Positive)), -1);
        assert_eq!(fuse_activation(Polarity::Positive, Some(Polarity::Negative)), -1);
    }

    #[test]
    fn absent_and_silent_is_zero() {
        assert_eq!(fuse_activation(Polarity::Absent, None), 0);
        assert_eq!(fuse_activation(Polarity::Neutral, Some(Polarity::Neutral)), 0);
    }

    #[test]
    fn non_neutral_favoured() {
        assert_eq!(fuse_activation(Polarity::Positive, Some(Polarity::Neutral)), 1);
        assert_eq!(fuse_activation(Polarity::Absent, Some(Polarity::Positive)), 1);
    }

    #[test]
    fn nearest_utterance_wins_then_client() {
        let agent = UtteranceFeature::new(0, 100, Speaker::Agent, Emotion::Anger);
        let client = UtteranceFeature::new(40, 60, Speaker::Client, Emotion::Happiness);
        let us = [agent.clone(), client.clone()];
        assert_eq!(speaking_at(&us, 50).unwrap().speaker, Speaker::Client);
        assert_eq!(speaking_at(&us, 10).unwrap().speaker, Speaker::Agent);

        let agent_tie = UtteranceFeature::new(40, 60, Speaker::Agent, Emotion::Anger);
        assert_eq!(
            speaking_at(&[agent_tie, client], 50).unwrap().speaker,
            Speaker::Client
        );
    }

    #[test]
    fn series_and_counts() {
        let frames = vec![
            FrameFeature::new(0, 0, Some(Emotion::Happiness)),
            FrameFeature::new(1, 40, None),
            FrameFeature::new(2, 80, Some(Emotion::Neutral)),
            FrameFeature::new(3, 80, Some(Emotion::Anger)).with_subject(Party::Agent),
        ];
        let us = vec![UtteranceFeature::new(70, 100, Speaker::Client, Emotion::Sadness)];
        let series = activation_series(&frames, &us);
        let values: Vec<_> = series.iter().map(|p| p.value).collect();
        assert_eq!(values, vec![1, 0, -1]);
        let c = ActivationCounts::from_series(&series);
        assert_eq!((c.negative, c.neutral, c.positive, c.total()), (1, 1, 1, 3));
    }
}
