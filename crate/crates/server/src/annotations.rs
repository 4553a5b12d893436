use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::ServerError;

/// A human rating of one service on three 1-5 scales.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub session_id: String,
    pub annotator_id: String,
    pub client_satisfaction: u8,
    pub agent_proficiency: u8,
    pub service_smoothness: u8,
    /// UTC milliseconds.
    pub created_at: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewAnnotation {
    pub session_id: String,
    pub annotator_id: String,
    pub client_satisfaction: i64,
    pub agent_proficiency: i64,
    pub service_smoothness: i64,
}

impl NewAnnotation {
    pub fn validate(&self) -> Result<(), String> {
        if self.session_id.trim().is_empty() {
            return Err("session_id is required".into());
        }
        if self.annotator_id.trim().is_empty() {
            return Err("annotator_id is required".into());
        }
        for (name, v) in [
            ("client_satisfaction", self.client_satisfaction),
            ("agent_proficiency", self.agent_proficiency),
            ("service_smoothness", self.service_smoothness),
        ] {
            if !(1..=5).contains(&v) {
                return Err(format!("{name} must be between 1 and 5, got {v}"));
            }
        }
        Ok(())
    }
}

struct Inner {
    file: File,
    records: Vec<Annotation>,
}

/// Append-only JSON-lines journal. One writer at a time; readers see
/// records in the order they were appended.
pub struct AnnotationJournal {
    path: PathBuf,
    inner: Mutex<Inner>,
}

impl AnnotationJournal {
    pub fn open(path: &Path) -> Result<Self, ServerError> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut records = Vec::new();
        if path.exists() {
            for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let a: Annotation = serde_json::from_str(&line)
                    .map_err(|e| ServerError::Config(format!("{} line {}: {e}", path.display(), i + 1)))?;
                records.push(a);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(AnnotationJournal {
            path: path.to_path_buf(),
            inner: Mutex::new(Inner { file, records }),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, new: NewAnnotation) -> Result<Annotation, ServerError> {
        new.validate().map_err(ServerError::Validation)?;
        let created_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as i64)
            .unwrap_or(0);
        let mut inner = self.inner.lock().expect("journal lock");
        let created_at = inner.records.last().map_or(created_at, |l| created_at.max(l.created_at));
        let record = Annotation {
            session_id: new.session_id,
            annotator_id: new.annotator_id,
            client_satisfaction: new.client_satisfaction as u8,
            agent_proficiency: new.agent_proficiency as u8,
            service_smoothness: new.service_smoothness as u8,
            created_at,
        };
        let mut line = serde_json::to_string(&record)?;
        line.push('\n');
        inner.file.write_all(line.as_bytes())?;
        inner.file.flush()?;
        inner.records.push(record.clone());
        Ok(record)
    }

    pub fn for_session(&self, session_id: Option<&str>) -> Vec<Annotation> {
        let inner = self.inner.lock().expect("journal lock");
        inner
            .records
            .iter()
            .filter(|a| session_id.is_none_or(|s| a.session_id == s))
            .cloned()
            .collect()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("journal lock").records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
