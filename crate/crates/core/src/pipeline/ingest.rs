use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PipelineConfig, PipelineError};
use crate::event_log::{
    aggregate_operations, parse_log, LogDiagnostic, Millis, OperationCatalog, Party, SegmentDiagnostic,
    ServiceRecordVector, ServiceSession,
};
use crate::features::{
    align_features, apply_occlusion_rule, read_frames, read_utterances, register_agent, resolve_speakers,
    smooth_frames, Alignment, CoverageSummary, FrameFeature, SpeakerEvidence, UtteranceFeature,
};
use crate::satisfaction::ServiceChannels;
use crate::sim::{Manifest, ScenarioType, CATALOG_FILE, MANIFEST_FILE};

/// Per-run coverage shown on the record timeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunCoverage {
    pub face: f64,
    pub speech: f64,
}

/// Everything about one ingested service except the raw feature streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub session_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<ScenarioType>,
    pub agent_id: String,
    pub client_id: String,
    pub begin_ts: Millis,
    pub end_ts: Millis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video_uri: Option<String>,
    pub record: ServiceRecordVector,
    pub coverage: Vec<RunCoverage>,
    pub summary: CoverageSummary,
    pub dropped_frames: usize,
    pub dropped_utterance_ms: Millis,
    pub speaker_low_confidence: bool,
    pub channels: ServiceChannels,
}

/// A service ready for scoring: metadata plus cleaned feature streams.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestedSession {
    pub meta: SessionMeta,
    /// Smoothed, occlusion-masked frames of both subjects, ordered by time.
    pub frames: Vec<FrameFeature>,
    /// Utterances with speakers resolved.
    pub utterances: Vec<UtteranceFeature>,
}

impl IngestedSession {
    pub fn id(&self) -> &str {
        &self.meta.session_id
    }

    pub fn alignment(&self) -> Result<Alignment, PipelineError> {
        Ok(align_features(&self.frames, &self.utterances, &self.meta.record)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IngestIssue {
    Log {
        file: String,
        diagnostic: LogDiagnostic,
    },
    Segment {
        file: String,
        diagnostic: SegmentDiagnostic,
    },
    OpenSession {
        file: String,
        request_id: String,
        begin_ts: Millis,
    },
    MissingFeatures {
        session_id: String,
        stream: String,
    },
    DuplicateSession {
        session_id: String,
        file: String,
    },
    DroppedFeatures {
        session_id: String,
        frames: usize,
        utterance_ms: Millis,
    },
    LowConfidenceSpeakers {
        session_id: String,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestDiagnostics {
    pub log_files: usize,
    pub sessions: usize,
    pub issues: Vec<IngestIssue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestedCorpus {
    pub catalog: OperationCatalog,
    pub sessions: Vec<IngestedSession>,
    pub diagnostics: IngestDiagnostics,
}

impl IngestedCorpus {
    pub fn get(&self, session_id: &str) -> Option<&IngestedSession> {
        self.sessions.iter().find(|s| s.meta.session_id == session_id)
    }

    pub fn metas(&self) -> Vec<SessionMeta> {
        self.sessions.iter().map(|s| s.meta.clone()).collect()
    }
}

/// Catalog stored with the dataset, or the built-in one.
pub fn dataset_catalog(dir: &Path) -> Result<OperationCatalog, PipelineError> {
    let path = dir.join(CATALOG_FILE);
    if path.exists() {
        Ok(OperationCatalog::load(&path)?)
    } else {
        Ok(OperationCatalog::default())
    }
}

fn log_files(dir: &Path) -> Result<(Vec<PathBuf>, BTreeMap<String, ScenarioType>), PipelineError> {
    if dir.join(MANIFEST_FILE).exists() {
        let manifest = Manifest::load(dir)?;
        let labels = manifest
            .sessions
            .iter()
            .map(|e| (e.session_id.clone(), e.label))
            .collect();
        let files = manifest.sessions.iter().map(|e| dir.join(&e.log)).collect();
        return Ok((files, labels));
    }
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "log"))
        .collect();
    files.sort();
    Ok((files, BTreeMap::new()))
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Splits by subject, smooths each series and masks obscured faces.
pub fn clean_frames(frames: Vec<FrameFeature>, cfg: &PipelineConfig) -> Result<Vec<FrameFeature>, PipelineError> {
    let mut out = Vec::with_capacity(frames.len());
    for subject in [Party::Client, Party::Agent] {
        let mut series: Vec<FrameFeature> = frames.iter().filter(|f| f.subject == subject).cloned().collect();
        series.sort_by_key(|f| (f.ts, f.frame_index));
        let mut smoothed = smooth_frames(&series, cfg.smoothing_half_window)?;
        apply_occlusion_rule(&mut smoothed, cfg.pitch_down_occlusion_deg);
        out.extend(smoothed);
    }
    out.sort_by_key(|f| (f.ts, f.subject == Party::Agent, f.frame_index));
    Ok(out)
}

struct Pending {
    session: ServiceSession,
    record: ServiceRecordVector,
    frames: Vec<FrameFeature>,
    utterances: Vec<UtteranceFeature>,
}

fn read_streams(
    dir: &Path,
    id: &str,
    cfg: &PipelineConfig,
) -> Result<(Vec<FrameFeature>, Vec<UtteranceFeature>, Vec<IngestIssue>), PipelineError> {
    let mut issues = Vec::new();
    let frames_path = dir.join(format!("{id}.frames"));
    let frames = if frames_path.exists() {
        clean_frames(read_frames(BufReader::new(File::open(&frames_path)?))?, cfg)?
    } else {
        issues.push(IngestIssue::MissingFeatures {
            session_id: id.to_string(),
            stream: "frames".into(),
        });
        Vec::new()
    };
    let utt_path = dir.join(format!("{id}.utterances"));
    let utterances = if utt_path.exists() {
        read_utterances(BufReader::new(File::open(&utt_path)?))?
    } else {
        issues.push(IngestIssue::MissingFeatures {
            session_id: id.to_string(),
            stream: "utterances".into(),
        });
        Vec::new()
    };
    Ok((frames, utterances, issues))
}

/// Parses every log in `dir`, aggregates records, cleans and aligns the
/// feature streams and resolves speakers across the whole corpus.
///
/// Sessions come out in log order (manifest order when a manifest exists).
pub fn ingest_dataset(dir: &Path, cfg: &PipelineConfig) -> Result<IngestedCorpus, PipelineError> {
    cfg.validate()?;
    if !dir.is_dir() {
        return Err(PipelineError::Validation(format!("dataset directory {} not found", dir.display())));
    }
    let catalog = dataset_catalog(dir)?;
    catalog.validate()?;
    let (files, labels) = log_files(dir)?;
    let mut diagnostics = IngestDiagnostics {
        log_files: files.len(),
        ..Default::default()
    };

    let mut sessions: Vec<ServiceSession> = Vec::new();
    for path in &files {
        let file = file_name(path);
        let parsed = parse_log(BufReader::new(File::open(path)?), &cfg.grammar)?;
        diagnostics.issues.extend(parsed.diagnostics.iter().map(|d| IngestIssue::Log {
            file: file.clone(),
            diagnostic: d.clone(),
        }));
        let seg = crate::event_log::segment_services(&parsed.entries, &cfg.grammar);
        diagnostics.issues.extend(seg.diagnostics.into_iter().map(|d| IngestIssue::Segment {
            file: file.clone(),
            diagnostic: d,
        }));
        diagnostics.issues.extend(seg.open_sessions.into_iter().map(|o| IngestIssue::OpenSession {
            file: file.clone(),
            request_id: o.request_id,
            begin_ts: o.begin_ts,
        }));
        for s in seg.sessions {
            if sessions.iter().any(|x| x.service_id == s.service_id) {
                diagnostics.issues.push(IngestIssue::DuplicateSession {
                    session_id: s.service_id.clone(),
                    file: file.clone(),
                });
                continue;
            }
            sessions.push(s);
        }
    }

    let pending: Vec<(Pending, Vec<IngestIssue>)> = sessions
        .into_par_iter()
        .map(|session| {
            let record = aggregate_operations(&session, &catalog)?;
            let (frames, utterances, issues) = read_streams(dir, &session.service_id, cfg)?;
            Ok((
                Pending {
                    session,
                    record,
                    frames,
                    utterances,
                },
                issues,
            ))
        })
        .collect::<Result<_, PipelineError>>()?;

    let evidence: Vec<SpeakerEvidence> = pending
        .iter()
        .map(|(p, _)| SpeakerEvidence::from_utterances(&p.session.service_id, &p.session.agent_id, &p.utterances))
        .collect();
    let roles = register_agent(&evidence);

    let mut out = Vec::with_capacity(pending.len());
    for (mut p, issues) in pending {
        diagnostics.issues.extend(issues);
        let id = p.session.service_id.clone();
        let low_confidence = match roles.get(&id) {
            Some(r) => {
                resolve_speakers(&mut p.utterances, r);
                r.low_confidence
            }
            None => true,
        };
        if low_confidence && !p.utterances.is_empty() {
            diagnostics.issues.push(IngestIssue::LowConfidenceSpeakers { session_id: id.clone() });
        }
        let alignment = align_features(&p.frames, &p.utterances, &p.record)?;
        if alignment.dropped_frames > 0 || alignment.dropped_utterance_ms > 0 {
            diagnostics.issues.push(IngestIssue::DroppedFeatures {
                session_id: id.clone(),
                frames: alignment.dropped_frames,
                utterance_ms: alignment.dropped_utterance_ms,
            });
        }
        let channels = ServiceChannels::from_alignment(&id, &p.record, &alignment, &cfg.satisfaction);
        let meta = SessionMeta {
            label: labels.get(&id).copied(),
            agent_id: p.session.agent_id.clone(),
            client_id: p.session.client_id.clone(),
            begin_ts: p.session.begin_ts,
            end_ts: p.session.end_ts,
            video_uri: p.session.video_uri.clone(),
            coverage: alignment
                .operations
                .iter()
                .map(|o| RunCoverage {
                    face: o.face_coverage,
                    speech: o.speech_coverage,
                })
                .collect(),
            summary: CoverageSummary::compute(&p.frames, &p.utterances),
            dropped_frames: alignment.dropped_frames,
            dropped_utterance_ms: alignment.dropped_utterance_ms,
            speaker_low_confidence: low_confidence,
            record: p.record,
            channels,
            session_id: id,
        };
        out.push(IngestedSession {
            meta,
            frames: p.frames,
            utterances: p.utterances,
        });
    }
    diagnostics.sessions = out.len();
    Ok(IngestedCorpus {
        catalog,
        sessions: out,
        diagnostics,
    })
}
