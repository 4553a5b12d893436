use serde::{Deserialize, Serialize};

use super::{PipelineConfig, PipelineError, SessionMeta};
use crate::anomaly::{
    build_duration_vector, fit_normal_space, fit_transition_model, resample_sequence, Detectors,
};
use crate::event_log::{OperationCatalog, OperationRun, ServiceRecordVector};
use crate::satisfaction::{ScoringContext, ServiceChannels};

/// Which services count as normal when fitting the detectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalSelector {
    /// Sessions whose label is in `PipelineConfig::normal_labels`.
    Labeled,
    /// An explicit list of session ids.
    Sessions(Vec<String>),
}

/// Training choices for `fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitPlan {
    pub normals: NormalSelector,
    /// Train the transition model on the catalog order alone.
    pub sequential_from_guideline: bool,
}

impl Default for FitPlan {
    fn default() -> Self {
        FitPlan {
            normals: NormalSelector::Labeled,
            sequential_from_guideline: false,
        }
    }
}

/// The catalog order as one record with equal operation durations.
pub fn guideline_record(catalog: &OperationCatalog) -> ServiceRecordVector {
    const STEP_MS: i64 = 60_000;
    let items = catalog
        .operations
        .iter()
        .enumerate()
        .map(|(i, op)| OperationRun {
            operation: op.clone(),
            count: 1,
            start_ts: i as i64 * STEP_MS,
            end_ts: (i as i64 + 1) * STEP_MS,
            turn: catalog.owner(op),
        })
        .collect();
    ServiceRecordVector { items }
}

pub fn select_normals<'a>(
    sessions: &'a [SessionMeta],
    plan: &FitPlan,
    cfg: &PipelineConfig,
) -> Result<Vec<&'a SessionMeta>, PipelineError> {
    let picked: Vec<&SessionMeta> = match &plan.normals {
        NormalSelector::Labeled => sessions
            .iter()
            .filter(|s| s.label.is_some_and(|l| cfg.normal_labels.contains(&l)))
            .collect(),
        NormalSelector::Sessions(ids) => {
            if let Some(missing) = ids.iter().find(|id| !sessions.iter().any(|s| &s.session_id == *id)) {
                return Err(PipelineError::Validation(format!("unknown normal session {missing:?}")));
            }
            sessions.iter().filter(|s| ids.contains(&s.session_id)).collect()
        }
    };
    if picked.is_empty() {
        return Err(PipelineError::Validation(
            "no normal sessions to fit on; label the corpus or list session ids".into(),
        ));
    }
    Ok(picked)
}

/// Fits the temporal and sequential detectors on the selected normals.
pub fn fit_detectors(
    sessions: &[SessionMeta],
    catalog: &OperationCatalog,
    plan: &FitPlan,
    cfg: &PipelineConfig,
) -> Result<Detectors, PipelineError> {
    let normals = select_normals(sessions, plan, cfg)?;
    let order = catalog.operations.clone();
    let vectors: Vec<Vec<f64>> = normals
        .iter()
        .map(|s| build_duration_vector(&s.record, &order))
        .collect();
    let normal_space = fit_normal_space(&vectors, &order, cfg.pca_components, cfg.pca_alpha)?;

    let records: Vec<ServiceRecordVector> = if plan.sequential_from_guideline {
        vec![guideline_record(catalog)]
    } else {
        normals.iter().map(|s| s.record.clone()).collect()
    };
    let sequences = records
        .iter()
        .map(|r| resample_sequence(r, cfg.markov_window).map(|r| r.states))
        .collect::<Result<Vec<_>, _>>()?;
    let transitions = fit_transition_model(&sequences, &order, cfg.markov_epsilon, cfg.markov_window)?;
    Ok(Detectors {
        normal_space,
        transitions,
    })
}

/// Corpus statistics for the satisfaction score, fitted on every session.
pub fn fit_scoring(sessions: &[SessionMeta], cfg: &PipelineConfig) -> ScoringContext {
    let channels: Vec<ServiceChannels> = sessions.iter().map(|s| s.channels.clone()).collect();
    ScoringContext::fit(&channels, &cfg.satisfaction)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guideline_follows_catalog() {
        let c = OperationCatalog::default();
        let g = guideline_record(&c);
        assert_eq!(g.operations().collect::<Vec<_>>(), c.operations.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(g.repeated_positions().is_empty());
    }
}
