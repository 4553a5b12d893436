//! End-to-end stages over a dataset directory: ingest, fit, score, report.
//!
//! [`Analysis::run`] does all of them in memory; [`Workspace`] persists each
//! stage's output next to the dataset.

mod config;
mod fit;
mod ingest;
mod report;
mod store;
mod views;

pub use config::PipelineConfig;
pub use fit::{fit_detectors, fit_scoring, guideline_record, select_normals, FitPlan, NormalSelector};
pub use ingest::{
    clean_frames, dataset_catalog, ingest_dataset, IngestDiagnostics, IngestIssue, IngestedCorpus, IngestedSession,
    RunCoverage, SessionMeta,
};
pub use report::{
    anchors_table, export_table, label_means, rank_anchors, score_corpus, sort_summaries, AnchorRow, BuoyPoint,
    ServiceReport, ServiceSummary, SortMetric,
};
pub use store::{
    load_normal_space, load_scoring_context, load_transition_model, read_json, save_normal_space,
    save_scoring_context, save_transition_model, write_json, ModelFile, Workspace, MODEL_VERSION,
};
pub use views::{FeatureWindow, PosePoint, RecordTimeline, TimelineColumn};

use std::io;
use std::path::Path;

use thiserror::Error;

use crate::anomaly::{AnomalyError, Detectors};
use crate::event_log::{CatalogError, LogError};
use crate::features::{AlignError, FeatureIoError, SmoothError};
use crate::satisfaction::ScoringContext;
use crate::sim::SimError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Validation(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("missing artifact {0}; run the earlier stage first")]
    Missing(String),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Features(#[from] FeatureIoError),
    #[error(transparent)]
    Smooth(#[from] SmoothError),
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error(transparent)]
    Anomaly(#[from] AnomalyError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl PipelineError {
    /// I/O problems as opposed to bad input or configuration.
    pub fn is_io(&self) -> bool {
        match self {
            PipelineError::Io(_) | PipelineError::Missing(_) => true,
            PipelineError::Log(LogError::Io(_)) => true,
            PipelineError::Features(FeatureIoError::Io(_)) => true,
            PipelineError::Catalog(CatalogError::Io(_)) => true,
            PipelineError::Sim(SimError::Io(_)) => true,
            _ => false,
        }
    }
}

/// A fully scored corpus.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub config: PipelineConfig,
    pub corpus: IngestedCorpus,
    pub detectors: Detectors,
    pub scoring: ScoringContext,
    pub reports: Vec<ServiceReport>,
}

impl Analysis {
    /// Ingests `dir`, fits on its normals and scores every session.
    pub fn run(dir: &Path, config: &PipelineConfig, plan: &FitPlan) -> Result<Self, PipelineError> {
        let corpus = ingest_dataset(dir, config)?;
        Self::from_corpus(corpus, config, plan)
    }

    pub fn from_corpus(corpus: IngestedCorpus, config: &PipelineConfig, plan: &FitPlan) -> Result<Self, PipelineError> {
        let metas = corpus.metas();
        let detectors = fit_detectors(&metas, &corpus.catalog, plan, config)?;
        let scoring = fit_scoring(&metas, config);
        let reports = score_corpus(&metas, &detectors, &scoring)?;
        Ok(Analysis {
            config: config.clone(),
            corpus,
            detectors,
            scoring,
            reports,
        })
    }

    pub fn report(&self, session_id: &str) -> Option<&ServiceReport> {
        self.reports.iter().find(|r| r.session_id == session_id)
    }

    pub fn summaries(&self) -> Vec<ServiceSummary> {
        self.corpus
            .sessions
            .iter()
            .zip(&self.reports)
            .map(|(s, r)| ServiceSummary::new(&s.meta, r, &self.detectors))
            .collect()
    }

    pub fn timeline(&self, session_id: &str) -> Result<RecordTimeline, PipelineError> {
        let (session, report) = self.pair(session_id)?;
        Ok(RecordTimeline::new(session, report, &self.scoring))
    }

    pub fn features(
        &self,
        session_id: &str,
        index: usize,
        from: Option<i64>,
        to: Option<i64>,
    ) -> Result<FeatureWindow, PipelineError> {
        let (session, _) = self.pair(session_id)?;
        FeatureWindow::new(session, index, from, to)
    }

    fn pair(&self, session_id: &str) -> Result<(&IngestedSession, &ServiceReport), PipelineError> {
        let i = self
            .corpus
            .sessions
            .iter()
            .position(|s| s.meta.session_id == session_id)
            .ok_or_else(|| PipelineError::NotFound(format!("service {session_id}")))?;
        Ok((&self.corpus.sessions[i], &self.reports[i]))
    }

    /// Writes every stage's artifacts under `workspace`.
    pub fn save(&self, workspace: &Workspace) -> Result<(), PipelineError> {
        workspace.save_ingest(&self.corpus.metas(), &self.corpus.diagnostics)?;
        save_normal_space(&workspace.normal_space_path(), &self.detectors.normal_space)?;
        save_transition_model(&workspace.transition_model_path(), &self.detectors.transitions)?;
        save_scoring_context(&workspace.scoring_context_path(), &self.scoring)?;
        workspace.save_reports(&self.reports)
    }
}
