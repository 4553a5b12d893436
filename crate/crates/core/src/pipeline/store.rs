use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{IngestDiagnostics, PipelineError, ServiceReport, SessionMeta};
use crate::anomaly::{NormalSpace, TransitionModel};
use crate::satisfaction::ScoringContext;

pub const MODEL_VERSION: u32 = 1;

/// A fitted model with its format tag and version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile<T> {
    pub format: String,
    pub version: u32,
    pub model: T,
}

/// Where pipeline artifacts live inside a dataset directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workspace {
    pub root: PathBuf,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Workspace { root: root.into() }
    }

    pub fn sessions_path(&self) -> PathBuf {
        self.root.join("ingest").join("sessions.json")
    }

    pub fn diagnostics_path(&self) -> PathBuf {
        self.root.join("ingest").join("diagnostics.json")
    }

    pub fn normal_space_path(&self) -> PathBuf {
        self.root.join("models").join("normal_space.json")
    }

    pub fn transition_model_path(&self) -> PathBuf {
        self.root.join("models").join("transition_model.json")
    }

    pub fn scoring_context_path(&self) -> PathBuf {
        self.root.join("models").join("scoring_context.json")
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn report_path(&self, session_id: &str) -> PathBuf {
        self.reports_dir().join(format!("{session_id}.json"))
    }

    pub fn summary_path(&self) -> PathBuf {
        self.reports_dir().join("summary.json")
    }

    pub fn annotations_path(&self) -> PathBuf {
        self.root.join("annotations.jsonl")
    }

    pub fn videos_dir(&self) -> PathBuf {
        self.root.join("videos")
    }

    pub fn save_ingest(&self, sessions: &[SessionMeta], diagnostics: &IngestDiagnostics) -> Result<(), PipelineError> {
        write_json(&self.sessions_path(), &sessions)?;
        write_json(&self.diagnostics_path(), diagnostics)
    }

    pub fn load_sessions(&self) -> Result<Vec<SessionMeta>, PipelineError> {
        read_json(&self.sessions_path())
    }

    pub fn save_reports(&self, reports: &[ServiceReport]) -> Result<(), PipelineError> {
        for r in reports {
            write_json(&self.report_path(&r.session_id), r)?;
        }
        write_json(&self.summary_path(), &reports)
    }

    pub fn load_reports(&self) -> Result<Vec<ServiceReport>, PipelineError> {
        read_json(&self.summary_path())
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, PipelineError> {
    let file = File::open(path).map_err(|e| PipelineError::Missing(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

fn save_model<T: Serialize>(path: &Path, format: &str, model: &T) -> Result<(), PipelineError> {
    write_json(
        path,
        &ModelFile {
            format: format.to_string(),
            version: MODEL_VERSION,
            model,
        },
    )
}

fn load_model<T: DeserializeOwned>(path: &Path, format: &str) -> Result<T, PipelineError> {
    let file: ModelFile<T> = read_json(path)?;
    if file.format != format || file.version != MODEL_VERSION {
        return Err(PipelineError::Validation(format!(
            "{}: expected {format} v{MODEL_VERSION}, found {} v{}",
            path.display(),
            file.format,
            file.version
        )));
    }
    Ok(file.model)
}

pub const NORMAL_SPACE_FORMAT: &str = "anchorscope.normal_space";
pub const TRANSITION_MODEL_FORMAT: &str = "anchorscope.transition_model";
pub const SCORING_CONTEXT_FORMAT: &str = "anchorscope.scoring_context";

pub fn save_normal_space(path: &Path, model: &NormalSpace) -> Result<(), PipelineError> {
    save_model(path, NORMAL_SPACE_FORMAT, model)
}

pub fn load_normal_space(path: &Path) -> Result<NormalSpace, PipelineError> {
    load_model(path, NORMAL_SPACE_FORMAT)
}

pub fn save_transition_model(path: &Path, model: &TransitionModel) -> Result<(), PipelineError> {
    save_model(path, TRANSITION_MODEL_FORMAT, model)
}

pub fn load_transition_model(path: &Path) -> Result<TransitionModel, PipelineError> {
    load_model(path, TRANSITION_MODEL_FORMAT)
}

pub fn save_scoring_context(path: &Path, ctx: &ScoringContext) -> Result<(), PipelineError> {
    save_model(path, SCORING_CONTEXT_FORMAT, ctx)
}

pub fn load_scoring_context(path: &Path) -> Result<ScoringContext, PipelineError> {
    load_model(path, SCORING_CONTEXT_FORMAT)
}
