use serde::{Deserialize, Serialize};

use super::{IngestedSession, PipelineError, ServiceReport};
use crate::event_log::{Millis, Party};
use crate::features::{activation_series, ActivationCounts, ActivationPoint, FrameFeature, UtteranceFeature};
use crate::satisfaction::{Modalities, ScoringContext};

/// One operation run as a timeline column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineColumn {
    pub index: usize,
    pub operation: String,
    pub turn: Party,
    pub count: u32,
    pub start_ts: Millis,
    pub end_ts: Millis,
    pub duration_s: f64,
    /// Corpus mean duration of this operation.
    pub mean_duration_s: f64,
    /// `max(0, duration - mean)`.
    pub over_average_s: f64,
    pub face_coverage: f64,
    pub speech_coverage: f64,
    /// A flagged transition lands in this run.
    pub sequential_flag: bool,
    pub lateral: Modalities<f64>,
    pub anchor: Modalities<bool>,
    pub rank: Modalities<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordTimeline {
    pub session_id: String,
    pub begin_ts: Millis,
    pub end_ts: Millis,
    pub temporal_flag: bool,
    pub sequential_flag: bool,
    pub columns: Vec<TimelineColumn>,
}

impl RecordTimeline {
    pub fn new(session: &IngestedSession, report: &ServiceReport, scoring: &ScoringContext) -> Self {
        let meta = &session.meta;
        let flagged: Vec<usize> = report
            .anomaly
            .per_transition
            .iter()
            .filter(|t| t.flagged)
            .filter_map(|t| t.to_run)
            .collect();
        let columns = meta
            .record
            .items
            .iter()
            .enumerate()
            .map(|(i, run)| {
                let op = report.satisfaction.per_operation.get(i);
                let mean = scoring.durations.get(&run.operation).map(|s| s.mean).unwrap_or(0.0);
                let cov = meta.coverage.get(i);
                TimelineColumn {
                    index: i,
                    operation: run.operation.clone(),
                    turn: run.turn,
                    count: run.count,
                    start_ts: run.start_ts,
                    end_ts: run.end_ts,
                    duration_s: run.duration_s(),
                    mean_duration_s: mean,
                    over_average_s: (run.duration_s() - mean).max(0.0),
                    face_coverage: cov.map(|c| c.face).unwrap_or(0.0),
                    speech_coverage: cov.map(|c| c.speech).unwrap_or(0.0),
                    sequential_flag: flagged.contains(&i),
                    lateral: op.map(|o| o.lateral).unwrap_or_default(),
                    anchor: op.map(|o| o.anchor).unwrap_or_default(),
                    rank: op.map(|o| o.rank).unwrap_or_default(),
                }
            })
            .collect();
        RecordTimeline {
            session_id: meta.session_id.clone(),
            begin_ts: meta.begin_ts,
            end_ts: meta.end_ts,
            temporal_flag: report.anomaly.temporal_flag,
            sequential_flag: report.anomaly.sequential_flag,
            columns,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosePoint {
    pub ts: Millis,
    pub subject: Party,
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

/// Feature slices of one operation, optionally narrowed to a brushed window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWindow {
    pub session_id: String,
    pub index: usize,
    pub operation: String,
    /// Effective window, clipped to the run; `from == to` when empty.
    pub from: Millis,
    pub to: Millis,
    pub frames: Vec<FrameFeature>,
    pub utterances: Vec<UtteranceFeature>,
    pub activation: Vec<ActivationPoint>,
    pub counts: ActivationCounts,
    pub head_pose: Vec<PosePoint>,
}

impl FeatureWindow {
    pub fn new(
        session: &IngestedSession,
        index: usize,
        from: Option<Millis>,
        to: Option<Millis>,
    ) -> Result<Self, PipelineError> {
        let meta = &session.meta;
        let run = meta.record.items.get(index).ok_or_else(|| {
            PipelineError::NotFound(format!(
                "operation {index} of {} (has {})",
                meta.session_id,
                meta.record.len()
            ))
        })?;
        let lo = from.unwrap_or(run.start_ts).max(run.start_ts);
        let hi = to.unwrap_or(run.end_ts).min(run.end_ts);
        let (lo, hi) = if lo < hi { (lo, hi) } else { (lo.min(run.end_ts), lo.min(run.end_ts)) };
        let frames: Vec<FrameFeature> = session
            .frames
            .iter()
            .filter(|f| f.ts >= lo && f.ts < hi)
            .cloned()
            .collect();
        let utterances: Vec<UtteranceFeature> = session
            .utterances
            .iter()
            .filter(|u| u.start_ts < hi && u.end_ts > lo)
            .map(|u| {
                let mut c = u.clone();
                c.start_ts = c.start_ts.max(lo);
                c.end_ts = c.end_ts.min(hi);
                c
            })
            .collect();
        let activation = activation_series(&frames, &utterances);
        let counts = ActivationCounts::from_series(&activation);
        let head_pose = frames
            .iter()
            .map(|f| PosePoint {
                ts: f.ts,
                subject: f.subject,
                yaw: f.yaw,
                pitch: f.pitch,
                roll: f.roll,
            })
            .collect();
        Ok(FeatureWindow {
            session_id: meta.session_id.clone(),
            index,
            operation: run.operation.clone(),
            from: lo,
            to: hi,
            frames,
            utterances,
            activation,
            counts,
            head_pose,
        })
    }
}
