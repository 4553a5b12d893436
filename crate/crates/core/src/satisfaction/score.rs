use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ChannelWeights, MagnitudeWeights, SatisfactionConfig};
use crate::event_log::{Party, ServiceRecordVector};
use crate::features::{Alignment, FrameFeature, Speaker, UtteranceFeature};
use crate::stats::{zscores, Standardizer};

/// Sum of magnitude weights over client frames. Frames without a face add 0.
pub fn visual_raw_sum(frames: &[FrameFeature], weights: &MagnitudeWeights) -> f64 {
    frames
        .iter()
        .filter(|f| f.subject == Party::Client)
        .filter_map(|f| f.emotion)
        .map(|e| weights.weight(e))
        .sum()
}

/// Sum of magnitude weights over client utterances, each scaled by its
/// duration in seconds.
pub fn audio_raw_sum(utterances: &[UtteranceFeature], weights: &MagnitudeWeights) -> f64 {
    utterances
        .iter()
        .filter(|u| u.speaker == Speaker::Client)
        .map(|u| weights.weight(u.emotion) * u.duration_s())
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardized {
    pub values: Vec<f64>,
    /// Fewer than two inputs, so every output is 0.
    pub low_confidence: bool,
}

/// Z-scores with the sample SD; zero spread maps everything to 0.
pub fn standardize_across_services(values: &[f64]) -> Standardized {
    Standardized {
        values: zscores(values),
        low_confidence: values.len() < 2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventZ {
    pub z: f64,
    /// The operation occurred only once in the corpus.
    pub low_confidence: bool,
}

fn duration_groups<'a>(records: impl IntoIterator<Item = &'a ServiceRecordVector>) -> BTreeMap<String, Standardizer> {
    let mut pooled: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for rec in records {
        for run in &rec.items {
            pooled.entry(run.operation.clone()).or_default().push(run.duration_s());
        }
    }
    pooled
        .into_iter()
        .map(|(op, v)| (op, Standardizer::fit(&v)))
        .collect()
}

/// Duration z-score of every run, standardized within its operation across
/// the corpus. Each repeated run is its own sample.
pub fn event_zscores(records: &[&ServiceRecordVector]) -> Vec<Vec<EventZ>> {
    let groups = duration_groups(records.iter().copied());
    records
        .iter()
        .map(|rec| {
            rec.items
                .iter()
                .map(|run| {
                    let g = &groups[&run.operation];
                    EventZ {
                        z: g.z(run.duration_s()),
                        low_confidence: g.low_confidence(),
                    }
                })
                .collect()
        })
        .collect()
}

/// The linear service score from already standardized channel terms.
pub fn service_score(visual_term: f64, audio_term: f64, event_z_sum: f64, w: &ChannelWeights) -> f64 {
    w.visual * visual_term + w.audio * audio_term - w.event * event_z_sum
}

/// Raw per-operation channel sums for one service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceChannels {
    pub session_id: String,
    pub record: ServiceRecordVector,
    pub op_visual: Vec<f64>,
    pub op_audio: Vec<f64>,
    /// Client frames.
    pub frame_count: usize,
    /// Client utterance pieces.
    pub utterance_count: usize,
}

impl ServiceChannels {
    pub fn from_alignment(
        session_id: &str,
        record: &ServiceRecordVector,
        alignment: &Alignment,
        config: &SatisfactionConfig,
    ) -> Self {
        let ops = &alignment.operations;
        ServiceChannels {
            session_id: session_id.to_string(),
            record: record.clone(),
            op_visual: ops
                .iter()
                .map(|o| visual_raw_sum(&o.frames, &config.visual_magnitudes))
                .collect(),
            op_audio: ops
                .iter()
                .map(|o| audio_raw_sum(&o.utterances, &config.audio_magnitudes))
                .collect(),
            frame_count: ops.iter().map(|o| o.client_frames().count()).sum(),
            utterance_count: ops
                .iter()
                .flat_map(|o| &o.utterances)
                .filter(|u| u.speaker == Speaker::Client)
                .count(),
        }
    }

    pub fn visual_total(&self) -> f64 {
        self.op_visual.iter().sum()
    }

    pub fn audio_total(&self) -> f64 {
        self.op_audio.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Modalities<T> {
    pub visual: T,
    pub audio: T,
    pub event: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationScore {
    pub index: usize,
    pub operation: String,
    pub duration_s: f64,
    pub visual_raw: f64,
    pub audio_raw: f64,
    /// Operation-level scores standardized within the operation across the corpus.
    pub visual_cs: f64,
    pub audio_cs: f64,
    pub event_z: f64,
    pub event_low_confidence: bool,
    /// Raw sums and event z-scores re-standardized across this service's operations.
    pub lateral: Modalities<f64>,
    pub anchor: Modalities<bool>,
    /// 1 = largest |lateral| among all of the service's dots.
    pub rank: Modalities<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatisfactionReport {
    pub session_id: String,
    pub service_score: f64,
    pub visual_raw: f64,
    pub audio_raw: f64,
    /// `f` applied to the visual raw sum.
    pub visual_term: f64,
    pub audio_term: f64,
    pub event_z_sum: f64,
    pub weights: ChannelWeights,
    pub frames: usize,
    pub utterances: usize,
    pub operations: usize,
    pub low_confidence: bool,
    pub per_operation: Vec<OperationScore>,
}

impl SatisfactionReport {
    /// Service score recomputed from the stored channel terms.
    pub fn recompute(&self) -> f64 {
        service_score(self.visual_term, self.audio_term, self.event_z_sum, &self.weights)
    }

    pub fn weighted_terms(&self) -> Modalities<f64> {
        Modalities {
            visual: self.weights.visual * self.visual_term,
            audio: self.weights.audio * self.audio_term,
            event: -self.weights.event * self.event_z_sum,
        }
    }
}

/// Corpus statistics the scores are standardized against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoringContext {
    pub config: SatisfactionConfig,
    pub services: usize,
    pub visual: Standardizer,
    pub audio: Standardizer,
    pub durations: BTreeMap<String, Standardizer>,
    pub op_visual: BTreeMap<String, Standardizer>,
    pub op_audio: BTreeMap<String, Standardizer>,
}

impl ScoringContext {
    pub fn fit(corpus: &[ServiceChannels], config: &SatisfactionConfig) -> Self {
        let visual: Vec<f64> = corpus.iter().map(ServiceChannels::visual_total).collect();
        let audio: Vec<f64> = corpus.iter().map(ServiceChannels::audio_total).collect();
        let mut op_visual: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let mut op_audio: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for s in corpus {
            for (i, run) in s.record.items.iter().enumerate() {
                op_visual.entry(run.operation.clone()).or_default().push(s.op_visual[i]);
                op_audio.entry(run.operation.clone()).or_default().push(s.op_audio[i]);
            }
        }
        let fit_all = |m: BTreeMap<String, Vec<f64>>| -> BTreeMap<String, Standardizer> {
            m.into_iter().map(|(k, v)| (k, Standardizer::fit(&v))).collect()
        };
        ScoringContext {
            config: config.clone(),
            services: corpus.len(),
            visual: Standardizer::fit(&visual),
            audio: Standardizer::fit(&audio),
            durations: duration_groups(corpus.iter().map(|s| &s.record)),
            op_visual: fit_all(op_visual),
            op_audio: fit_all(op_audio),
        }
    }

    fn group_z(groups: &BTreeMap<String, Standardizer>, op: &str, x: f64) -> (f64, bool) {
        match groups.get(op) {
            Some(g) => (g.z(x), g.low_confidence()),
            None => (0.0, true),
        }
    }

    pub fn score(&self, s: &ServiceChannels) -> SatisfactionReport {
        let cfg = &self.config;
        let visual_raw = s.visual_total();
        let audio_raw = s.audio_total();
        let visual_term = self.visual.z(visual_raw);
        let audio_term = self.audio.z(audio_raw);

        let event: Vec<(f64, bool)> = s
            .record
            .items
            .iter()
            .map(|run| Self::group_z(&self.durations, &run.operation, run.duration_s()))
            .collect();
        let event_z_sum: f64 = event.iter().map(|(z, _)| z).sum();

        let lateral_v = zscores(&s.op_visual);
        let lateral_a = zscores(&s.op_audio);
        let lateral_e = zscores(&event.iter().map(|(z, _)| *z).collect::<Vec<_>>());

        let mut dots: Vec<(f64, usize, usize)> = Vec::new();
        for i in 0..s.record.items.len() {
            dots.push((lateral_v[i].abs(), i, 0));
            dots.push((lateral_a[i].abs(), i, 1));
            dots.push((lateral_e[i].abs(), i, 2));
        }
        dots.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut ranks = vec![Modalities::<usize>::default(); s.record.items.len()];
        for (r, &(_, i, m)) in dots.iter().enumerate() {
            match m {
                0 => ranks[i].visual = r + 1,
                1 => ranks[i].audio = r + 1,
                _ => ranks[i].event = r + 1,
            }
        }

        let t = cfg.anchor_threshold;
        let per_operation = s
            .record
            .items
            .iter()
            .enumerate()
            .map(|(i, run)| {
                let lateral = Modalities {
                    visual: lateral_v[i],
                    audio: lateral_a[i],
                    event: lateral_e[i],
                };
                OperationScore {
                    index: i,
                    operation: run.operation.clone(),
                    duration_s: run.duration_s(),
                    visual_raw: s.op_visual[i],
                    audio_raw: s.op_audio[i],
                    visual_cs: Self::group_z(&self.op_visual, &run.operation, s.op_visual[i]).0,
                    audio_cs: Self::group_z(&self.op_audio, &run.operation, s.op_audio[i]).0,
                    event_z: event[i].0,
                    event_low_confidence: event[i].1,
                    anchor: Modalities {
                        visual: lateral.visual.abs() > t,
                        audio: lateral.audio.abs() > t,
                        event: lateral.event.abs() > t,
                    },
                    lateral,
                    rank: ranks[i],
                }
            })
            .collect();

        SatisfactionReport {
            session_id: s.session_id.clone(),
            service_score: service_score(visual_term, audio_term, event_z_sum, &cfg.channels),
            visual_raw,
            audio_raw,
            visual_term,
            audio_term,
            event_z_sum,
            weights: cfg.channels,
            frames: s.frame_count,
            utterances: s.utterance_count,
            operations: s.record.items.len(),
            low_confidence: self.services < 2,
            per_operation,
        }
    }
}
