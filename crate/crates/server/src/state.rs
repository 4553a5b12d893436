use std::path::Path;
use std::sync::{Arc, RwLock};

use anchorscope::pipeline::{ingest_dataset, Analysis, FitPlan, PipelineConfig, ServiceSummary, Workspace};
use tokio::sync::Mutex;

use crate::annotations::AnnotationJournal;
use crate::video;
use crate::{ServerConfig, ServerError};

/// An immutable scored view of the dataset.
#[derive(Debug, Default)]
pub struct Snapshot {
    pub analysis: Option<Analysis>,
    pub summaries: Vec<ServiceSummary>,
}

impl Snapshot {
    /// Ingests, fits and scores `dir`. A directory without services gives an
    /// empty snapshot. `has_video` reflects the media files present now.
    pub fn build(dir: &Path, config: &PipelineConfig, plan: &FitPlan) -> Result<Self, ServerError> {
        let corpus = ingest_dataset(dir, config)?;
        if corpus.sessions.is_empty() {
            return Ok(Snapshot::default());
        }
        let analysis = Analysis::from_corpus(corpus, config, plan)?;
        let mut summaries = analysis.summaries();
        for (row, session) in summaries.iter_mut().zip(&analysis.corpus.sessions) {
            row.has_video = video::locate(dir, &session.meta).is_some();
        }
        Ok(Snapshot {
            summaries,
            analysis: Some(analysis),
        })
    }

    pub fn analysis(&self) -> Result<&Analysis, ServerError> {
        self.analysis
            .as_ref()
            .ok_or_else(|| ServerError::NotFound("dataset has no services".into()))
    }
}

pub struct Shared {
    pub workspace: Workspace,
    pub pipeline: PipelineConfig,
    pub plan: FitPlan,
    pub journal: AnnotationJournal,
    snapshot: RwLock<Arc<Snapshot>>,
    refit: Mutex<()>,
}

/// Cheaply clonable handle shared by all handlers.
#[derive(Clone)]
pub struct AppState(pub Arc<Shared>);

impl AppState {
    pub fn new(config: &ServerConfig) -> Result<Self, ServerError> {
        let pipeline = config.pipeline_config()?;
        let plan = config.fit_plan();
        let dir = &config.dataset_dir;
        if !dir.is_dir() {
            return Err(ServerError::Config(format!("dataset directory {} not found", dir.display())));
        }
        let workspace = Workspace::new(dir.clone());
        let snapshot = Snapshot::build(dir, &pipeline, &plan)?;
        if let Some(a) = &snapshot.analysis {
            a.save(&workspace)?;
        }
        let journal = AnnotationJournal::open(&workspace.annotations_path())?;
        Ok(AppState(Arc::new(Shared {
            workspace,
            pipeline,
            plan,
            journal,
            snapshot: RwLock::new(Arc::new(snapshot)),
            refit: Mutex::new(()),
        })))
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.0.snapshot.read().expect("snapshot lock").clone()
    }

    /// Rebuilds the snapshot from disk and swaps it in atomically.
    /// Concurrent refits run one after another.
    pub async fn refit(&self) -> Result<Arc<Snapshot>, ServerError> {
        let _guard = self.0.refit.lock().await;
        let shared = self.0.clone();
        let snapshot = tokio::task::spawn_blocking(move || -> Result<Snapshot, ServerError> {
            let s = Snapshot::build(&shared.workspace.root, &shared.pipeline, &shared.plan)?;
            if let Some(a) = &s.analysis {
                a.save(&shared.workspace)?;
            }
            Ok(s)
        })
        .await
        .map_err(|e| ServerError::Internal(e.to_string()))??;
        let snapshot = Arc::new(snapshot);
        *self.0.snapshot.write().expect("snapshot lock") = snapshot.clone();
        Ok(snapshot)
    }
}
