//! Operational anchors: services whose operation durations or operation
//! order deviate from the normal procedure.
//!
//! * [`temporal`] scores per-operation duration vectors by their squared
//!   residual outside a PCA subspace fitted on normal services.
//! * [`sequential`] scores resampled operation sequences with a smoothed
//!   first-order Markov chain.

pub mod sequential;
pub mod temporal;

pub use sequential::{
    fit_transition_model, resample_sequence, ResampledSequence, SequenceScore, TransitionModel,
    TransitionScore,
};
pub use temporal::{
    build_duration_vector, fit_normal_space, ComponentSelection, NormalSpace, TemporalScore, RESIDUAL_TOLERANCE,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event_log::ServiceRecordVector;

#[derive(Debug, Error, PartialEq)]
pub enum AnomalyError {
    #[error("insufficient training data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty input")]
    EmptyInput,
}

/// Both detectors' verdicts for one service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub temporal_score: f64,
    pub temporal_flag: bool,
    pub sequence_log_prob: f64,
    pub sequential_flag: bool,
    pub per_transition: Vec<TransitionScore>,
}

/// A fitted pair of detectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detectors {
    pub normal_space: NormalSpace,
    pub transitions: TransitionModel,
}

impl Detectors {
    pub fn analyze(&self, record: &ServiceRecordVector) -> Result<AnomalyReport, AnomalyError> {
        let vector = build_duration_vector(record, &self.normal_space.feature_order);
        let temporal = self.normal_space.temporal_anomaly(&vector)?;
        let resampled = resample_sequence(record, self.transitions.window)?;
        let seq = self.transitions.score_resampled(&resampled);
        Ok(AnomalyReport {
            temporal_score: temporal.score,
            temporal_flag: temporal.flag,
            sequence_log_prob: seq.log_prob,
            sequential_flag: seq.flag,
            per_transition: seq.transitions,
        })
    }
}
