use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{FrameFeature, UtteranceFeature};
use crate::event_log::{Millis, Party, ServiceRecordVector};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlignError {
    #[error("service record is empty")]
    EmptyRecord,
    #[error("all {0} frames fall outside the session span")]
    FramesOutsideSpan(usize),
    #[error("all {0} utterances fall outside the session span")]
    UtterancesOutsideSpan(usize),
}

/// Features that fall within one operation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedOperationFeatures {
    pub index: usize,
    pub operation: String,
    pub start_ts: Millis,
    pub end_ts: Millis,
    pub frames: Vec<FrameFeature>,
    /// Utterances clipped to `[start_ts, end_ts)`.
    pub utterances: Vec<UtteranceFeature>,
    /// Fraction of client frames with a detected face.
    pub face_coverage: f64,
    /// Fraction of the run covered by any speech.
    pub speech_coverage: f64,
}

impl AlignedOperationFeatures {
    pub fn client_frames(&self) -> impl Iterator<Item = &FrameFeature> {
        self.frames.iter().filter(|f| f.subject == Party::Client)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub operations: Vec<AlignedOperationFeatures>,
    /// Frames outside every run.
    pub dropped_frames: usize,
    /// Utterance time outside every run.
    pub dropped_utterance_ms: Millis,
}

fn union_length(mut spans: Vec<(Millis, Millis)>) -> Millis {
    spans.sort_unstable();
    let mut total = 0;
    let mut current: Option<(Millis, Millis)> = None;
    for (s, e) in spans {
        match current {
            Some((cs, ce)) if s <= ce => current = Some((cs, ce.max(e))),
            Some((cs, ce)) => {
                total += ce - cs;
                current = Some((s, e));
            }
            None => current = Some((s, e)),
        }
    }
    if let Some((cs, ce)) = current {
        total += ce - cs;
    }
    total
}

/// Partitions frames and utterances by the record's half-open run spans.
///
/// Utterances that straddle a boundary are split, each piece keeping the
/// original speaker and emotion.
pub fn align_features(
    frames: &[FrameFeature],
    utterances: &[UtteranceFeature],
    record: &ServiceRecordVector,
) -> Result<Alignment, AlignError> {
    if record.is_empty() {
        return Err(AlignError::EmptyRecord);
    }
    let mut ops: Vec<AlignedOperationFeatures> = record
        .items
        .iter()
        .enumerate()
        .map(|(index, run)| AlignedOperationFeatures {
            index,
            operation: run.operation.clone(),
            start_ts: run.start_ts,
            end_ts: run.end_ts,
            frames: Vec::new(),
            utterances: Vec::new(),
            face_coverage: 0.0,
            speech_coverage: 0.0,
        })
        .collect();

    let mut dropped_frames = 0;
    for f in frames {
        match record.run_at(f.ts) {
            Some(i) => ops[i].frames.push(f.clone()),
            None => dropped_frames += 1,
        }
    }
    if !frames.is_empty() && dropped_frames == frames.len() {
        return Err(AlignError::FramesOutsideSpan(frames.len()));
    }

    let mut dropped_utterance_ms = 0;
    let mut any_inside = false;
    for u in utterances {
        let mut kept = 0;
        let first = record.items.partition_point(|r| r.end_ts <= u.start_ts);
        for (i, run) in record.items.iter().enumerate().skip(first) {
            if run.start_ts >= u.end_ts {
                break;
            }
            let s = u.start_ts.max(run.start_ts);
            let e = u.end_ts.min(run.end_ts);
            if s < e {
                let mut piece = u.clone();
                piece.start_ts = s;
                piece.end_ts = e;
                kept += e - s;
                ops[i].utterances.push(piece);
            }
        }
        any_inside |= kept > 0;
        dropped_utterance_ms += u.duration_ms().max(0) - kept;
    }
    if !utterances.is_empty() && !any_inside {
        return Err(AlignError::UtterancesOutsideSpan(utterances.len()));
    }

    for op in &mut ops {
        let (present, total) = op
            .client_frames()
            .fold((0usize, 0usize), |(p, t), f| (p + f.face_present as usize, t + 1));
        op.face_coverage = if total > 0 { present as f64 / total as f64 } else { 0.0 };
        let duration = op.end_ts - op.start_ts;
        let speech = union_length(op.utterances.iter().map(|u| (u.start_ts, u.end_ts)).collect());
        op.speech_coverage = if duration > 0 {
            (speech as f64 / duration as f64).min(1.0)
        } else {
            0.0
        };
    }

    Ok(Alignment {
        operations: ops,
        dropped_frames,
        dropped_utterance_ms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_log::OperationRun;
    use crate::features::{Emotion, Speaker};

    fn record(bounds: &[(Millis, Millis)]) -> ServiceRecordVector {
        ServiceRecordVector {
            items: bounds
                .iter()
                .enumerate()
                .map(|(i, &(s, e))| OperationRun {
                    operation: format!("op{i}"),
                    count: 1,
                    start_ts: s,
                    end_ts: e,
                    turn: Party::Agent,
                })
                .collect(),
        }
    }

    #[test]
    fn frames_in_single_bucket() {
        let rec = record(&[(0, 100), (100, 200), (200, 300)]);
        let frames: Vec<_> = (0..5)
            .map(|i| FrameFeature::new(i, 110 + 10 * i as Millis, Some(Emotion::Neutral)))
            .collect();
        let a = align_features(&frames, &[], &rec).unwrap();
        assert_eq!(a.operations[1].frames.len(), 5);
        assert!(a.operations[0].frames.is_empty() && a.operations[2].frames.is_empty());
        assert_eq!(a.operations[1].face_coverage, 1.0);
        assert!(a.operations.iter().all(|o| o.speech_coverage == 0.0));
    }

    #[test]
    fn straddling_utterance_is_split() {
        let rec = record(&[(0, 100), (100, 200)]);
        let u = UtteranceFeature::new(60, 140, Speaker::Client, Emotion::Anger);
        let a = align_features(&[], &[u], &rec).unwrap();
        let p0 = &a.operations[0].utterances[0];
        let p1 = &a.operations[1].utterances[0];
        assert_eq!((p0.start_ts, p0.end_ts), (60, 100));
        assert_eq!((p1.start_ts, p1.end_ts), (100, 140));
        assert!((a.operations[0].speech_coverage - 0.4).abs() < 1e-12);
        assert_eq!(a.dropped_utterance_ms, 0);
    }

    #[test]
    fn overlapping_speech_counted_once() {
        let rec = record(&[(0, 100)]);
        let us = vec![
            UtteranceFeature::new(0, 50, Speaker::Client, Emotion::Neutral),
            UtteranceFeature::new(25, 75, Speaker::Agent, Emotion::Neutral),
        ];
        let a = align_features(&[], &us, &rec).unwrap();
        assert!((a.operations[0].speech_coverage - 0.75).abs() < 1e-12);
    }

    #[test]
    fn streams_outside_span_error() {
        let rec = record(&[(0, 100)]);
        let f = FrameFeature::new(0, 500, None);
        assert_eq!(align_features(&[f], &[], &rec), Err(AlignError::FramesOutsideSpan(1)));
        let u = UtteranceFeature::new(100, 200, Speaker::Client, Emotion::Neutral);
        assert_eq!(
            align_features(&[], &[u], &rec),
            Err(AlignError::UtterancesOutsideSpan(1))
        );
    }

    #[test]
    fn face_coverage_ignores_agent_frames() {
        let rec = record(&[(0, 100)]);
        let frames = vec![
            FrameFeature::new(0, 0, None),
            FrameFeature::new(1, 10, Some(Emotion::Neutral)),
            FrameFeature::new(0, 20, Some(Emotion::Neutral)).with_subject(Party::Agent),
        ];
        let a = align_features(&frames, &[], &rec).unwrap();
        assert_eq!(a.operations[0].face_coverage, 0.5);
    }
}
