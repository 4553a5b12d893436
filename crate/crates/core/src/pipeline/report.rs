use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PipelineError, SessionMeta};
use crate::anomaly::{AnomalyReport, Detectors};
use crate::satisfaction::{SatisfactionReport, ScoringContext};
use crate::sim::ScenarioType;

/// Both analyses of one service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceReport {
    pub session_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<ScenarioType>,
    pub satisfaction: SatisfactionReport,
    pub anomaly: AnomalyReport,
}

impl ServiceReport {
    /// Negative log-likelihood of the resampled sequence; higher is stranger.
    pub fn sequential_score(&self) -> f64 {
        -self.anomaly.sequence_log_prob
    }

    pub fn anchor_count(&self) -> usize {
        self.satisfaction
            .per_operation
            .iter()
            .map(|o| o.anchor.visual as usize + o.anchor.audio as usize + o.anchor.event as usize)
            .sum()
    }
}

/// Scores every session in order. Parallel, but the output order and
/// values do not depend on scheduling.
pub fn score_corpus(
    sessions: &[SessionMeta],
    detectors: &Detectors,
    scoring: &ScoringContext,
) -> Result<Vec<ServiceReport>, PipelineError> {
    sessions
        .par_iter()
        .map(|s| {
            Ok(ServiceReport {
                session_id: s.session_id.clone(),
                label: s.label,
                satisfaction: scoring.score(&s.channels),
                anomaly: detectors.analyze(&s.record)?,
            })
        })
        .collect()
}

/// Sortable service metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortMetric {
    CsTotal,
    CsVisual,
    CsAudio,
    TemporalScore,
    SequentialScore,
}

impl SortMetric {
    pub const ALL: [SortMetric; 5] = [
        SortMetric::CsTotal,
        SortMetric::CsVisual,
        SortMetric::CsAudio,
        SortMetric::TemporalScore,
        SortMetric::SequentialScore,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SortMetric::CsTotal => "cs_total",
            SortMetric::CsVisual => "cs_visual",
            SortMetric::CsAudio => "cs_audio",
            SortMetric::TemporalScore => "temporal_score",
            SortMetric::SequentialScore => "sequential_score",
        }
    }

    pub fn value(self, s: &ServiceSummary) -> f64 {
        match self {
            SortMetric::CsTotal => s.cs_total,
            SortMetric::CsVisual => s.cs_visual,
            SortMetric::CsAudio => s.cs_audio,
            SortMetric::TemporalScore => s.temporal_score,
            SortMetric::SequentialScore => s.sequential_score,
        }
    }

    pub fn valid_names() -> String {
        Self::ALL.map(Self::as_str).join(", ")
    }
}

impl FromStr for SortMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown metric {s:?}; valid metrics: {}", Self::valid_names()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuoyPoint {
    pub index: usize,
    /// Reversed event score, `-z_e`.
    pub x: f64,
    pub visual: f64,
    pub audio: f64,
}

/// One row of the service overview.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceSummary {
    pub session_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<ScenarioType>,
    pub agent_id: String,
    pub client_id: String,
    pub begin_ts: i64,
    pub end_ts: i64,
    pub duration_s: f64,
    pub operations: usize,
    pub cs_total: f64,
    /// `f` of the visual raw sum.
    pub cs_visual: f64,
    pub cs_audio: f64,
    /// `-sum z_e`.
    pub cs_event: f64,
    pub temporal_score: f64,
    pub temporal_flag: bool,
    pub temporal_threshold: f64,
    pub sequential_score: f64,
    pub sequential_flag: bool,
    pub anchors: usize,
    pub low_confidence: bool,
    pub has_video: bool,
    pub buoys: Vec<BuoyPoint>,
}

impl ServiceSummary {
    pub fn new(meta: &SessionMeta, report: &ServiceReport, detectors: &Detectors) -> Self {
        let sat = &report.satisfaction;
        ServiceSummary {
            session_id: meta.session_id.clone(),
            label: meta.label,
            agent_id: meta.agent_id.clone(),
            client_id: meta.client_id.clone(),
            begin_ts: meta.begin_ts,
            end_ts: meta.end_ts,
            duration_s: (meta.end_ts - meta.begin_ts) as f64 / 1000.0,
            operations: meta.record.len(),
            cs_total: sat.service_score,
            cs_visual: sat.visual_term,
            cs_audio: sat.audio_term,
            cs_event: -sat.event_z_sum,
            temporal_score: report.anomaly.temporal_score,
            temporal_flag: report.anomaly.temporal_flag,
            temporal_threshold: detectors.normal_space.q_threshold,
            sequential_score: report.sequential_score(),
            sequential_flag: report.anomaly.sequential_flag,
            anchors: report.anchor_count(),
            low_confidence: sat.low_confidence || meta.speaker_low_confidence,
            has_video: meta.video_uri.is_some(),
            buoys: sat
                .per_operation
                .iter()
                .map(|o| BuoyPoint {
                    index: o.index,
                    x: -o.event_z,
                    visual: o.visual_cs,
                    audio: o.audio_cs,
                })
                .collect(),
        }
    }
}

/// Stable sort by `metric`, ties broken by session id.
pub fn sort_summaries(rows: &mut [ServiceSummary], metric: SortMetric, descending: bool) {
    rows.sort_by(|a, b| {
        let ord = metric.value(a).total_cmp(&metric.value(b));
        let ord = if descending { ord.reverse() } else { ord };
        ord.then_with(|| a.session_id.cmp(&b.session_id))
    });
}

/// One behavioral dot of a service, for the anchor listing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorRow {
    pub session_id: String,
    pub index: usize,
    pub operation: String,
    pub modality: String,
    /// Within-service z-score.
    pub z: f64,
    pub anchor: bool,
}

/// All dots across the corpus, largest `|z|` first.
pub fn rank_anchors(reports: &[ServiceReport]) -> Vec<AnchorRow> {
    let mut rows = Vec::new();
    for r in reports {
        for o in &r.satisfaction.per_operation {
            let dots: [(&str, f64, bool); 3] = [
                ("visual", o.lateral.visual, o.anchor.visual),
                ("audio", o.lateral.audio, o.anchor.audio),
                ("event", o.lateral.event, o.anchor.event),
            ];
            for (modality, z, anchor) in dots {
                rows.push(AnchorRow {
                    session_id: r.session_id.clone(),
                    index: o.index,
                    operation: o.operation.clone(),
                    modality: modality.to_string(),
                    z,
                    anchor,
                });
            }
        }
    }
    rows.sort_by(|a, b| {
        b.z.abs()
            .total_cmp(&a.z.abs())
            .then_with(|| a.session_id.cmp(&b.session_id))
            .then(a.index.cmp(&b.index))
            .then_with(|| a.modality.cmp(&b.modality))
    });
    rows
}

fn flag(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Corpus summary as a fixed-width text table with six decimals.
pub fn export_table(reports: &[ServiceReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:<5} {:>12} {:>12} {:>12} {:>12} {:>14} {:>5} {:>14} {:>5} {:>7}",
        "session", "label", "cs_total", "cs_visual", "cs_audio", "cs_event", "temporal", "t_flg", "sequential", "s_flg", "anchors"
    );
    for r in reports {
        let s = &r.satisfaction;
        let _ = writeln!(
            out,
            "{:<12} {:<5} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>14.6} {:>5} {:>14.6} {:>5} {:>7}",
            r.session_id,
            r.label.map(|l| l.as_str()).unwrap_or("-"),
            s.service_score,
            s.visual_term,
            s.audio_term,
            -s.event_z_sum,
            r.anomaly.temporal_score,
            flag(r.anomaly.temporal_flag),
            r.sequential_score(),
            flag(r.anomaly.sequential_flag),
            r.anchor_count()
        );
    }
    out
}

/// Anchor rows as a fixed-width text table.
pub fn anchors_table(rows: &[AnchorRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:>5} {:<10} {:<8} {:>12} {:>6}",
        "session", "index", "operation", "modality", "z", "anchor"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<12} {:>5} {:<10} {:<8} {:>12.6} {:>6}",
            r.session_id,
            r.index,
            r.operation,
            r.modality,
            r.z,
            flag(r.anchor)
        );
    }
    out
}

/// Mean of a metric per label, in `ScenarioType::ALL` order.
pub fn label_means(reports: &[ServiceReport], metric: impl Fn(&ServiceReport) -> f64) -> Vec<(ScenarioType, f64)> {
    ScenarioType::ALL
        .iter()
        .filter_map(|&l| {
            let v: Vec<f64> = reports.iter().filter(|r| r.label == Some(l)).map(&metric).collect();
            (!v.is_empty()).then(|| (l, v.iter().sum::<f64>() / v.len() as f64))
        })
        .collect()
}
