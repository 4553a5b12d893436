//! Scripted service scenarios with ground truth.
//!
//! Each session draws a satisfaction type, operation durations and client
//! reactions from a seeded generator and emits a log, frame and utterance
//! streams, and the record vector the log should aggregate to.

mod corpus;
mod generate;
mod spec;

pub use corpus::{
    generate_corpus, generate_corpus_with, read_truth, write_corpus, CorpusConfig, Manifest, ManifestEntry,
    CATALOG_FILE, MANIFEST_FILE, MANIFEST_VERSION,
};
pub use generate::{generate_session, GeneratedSession, SessionIdentity};
pub use spec::{ClientProfile, GroundTruth, ScenarioSpec, ScenarioType};

use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error("catalog unusable for simulation: {0}")]
    Catalog(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
