use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::AnomalyError;
use crate::event_log::ServiceRecordVector;
use crate::stats::nearest_rank_quantile;

/// Share of training sequences allowed below the service threshold.
const SERVICE_TAIL: f64 = 0.05;

/// A record sampled at equally spaced instants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResampledSequence {
    pub states: Vec<String>,
    /// Index of the run each sample fell into.
    pub runs: Vec<usize>,
}

/// Samples the operation active at the midpoints of `samples` equal slices of
/// the record span. Self-transitions are kept.
pub fn resample_sequence(record: &ServiceRecordVector, samples: usize) -> Result<ResampledSequence, AnomalyError> {
    if samples < 2 {
        return Err(AnomalyError::InvalidParameter(format!("window {samples} < 2")));
    }
    let (Some(start), Some(_)) = (record.start_ts(), record.end_ts()) else {
        return Err(AnomalyError::EmptyInput);
    };
    let span = record.span_ms() as i128;
    let mut out = ResampledSequence {
        states: Vec::with_capacity(samples),
        runs: Vec::with_capacity(samples),
    };
    for i in 0..samples as i128 {
        let t = start + ((2 * i + 1) * span / (2 * samples as i128)) as i64;
        let idx = record.items.partition_point(|r| r.start_ts <= t).max(1) - 1;
        out.states.push(record.items[idx].operation.clone());
        out.runs.push(idx);
    }
    Ok(out)
}

/// Smoothed first-order Markov chain over operations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionModel {
    pub states: Vec<String>,
    /// Row-stochastic; every cell is at least `epsilon`.
    pub probs: Vec<Vec<f64>>,
    pub epsilon: f64,
    /// Resampling length used for training and scoring.
    pub window: usize,
    /// Number of transitions seen in training.
    pub train_transitions: usize,
    pub service_threshold: f64,
    /// Natural log of `service_threshold`; the flag compares against this.
    pub log_service_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionScore {
    pub position: usize,
    pub from: String,
    pub to: String,
    pub prob: f64,
    pub flagged: bool,
    /// One of the states was never seen by the model.
    pub unknown: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from_run: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to_run: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceScore {
    pub log_prob: f64,
    pub flag: bool,
    pub transitions: Vec<TransitionScore>,
}

/// Fits transition probabilities from normal sequences.
///
/// Maximum-likelihood rows are mixed with a uniform floor:
/// `p = epsilon + (1 - m * epsilon) * count / row_total`, so each row still
/// sums to one and no cell drops below `epsilon`. Rows never seen in training
/// are uniform. `epsilon` defaults to `1 / (10 n)` for `n` training
/// transitions, which keeps unseen transitions below the `1 / n` flag line.
pub fn fit_transition_model(
    sequences: &[Vec<String>],
    states: &[String],
    epsilon: Option<f64>,
    window: usize,
) -> Result<TransitionModel, AnomalyError> {
    if sequences.is_empty() {
        return Err(AnomalyError::InsufficientData { needed: 1, got: 0 });
    }
    if window < 2 {
        return Err(AnomalyError::InvalidParameter(format!("window {window} < 2")));
    }
    let mut all_states: Vec<String> = states.to_vec();
    for seq in sequences {
        for s in seq {
            if !all_states.contains(s) {
                all_states.push(s.clone());
            }
        }
    }
    let m = all_states.len();
    let index: HashMap<&str, usize> = all_states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();

    let mut counts = vec![vec![0usize; m]; m];
    let mut n = 0usize;
    for seq in sequences {
        for w in seq.windows(2) {
            counts[index[w[0].as_str()]][index[w[1].as_str()]] += 1;
            n += 1;
        }
    }
    if n == 0 {
        return Err(AnomalyError::InsufficientData { needed: 1, got: 0 });
    }
    let eps = epsilon.unwrap_or(1.0 / (10.0 * n as f64));
    if !(eps > 0.0 && eps * m as f64 <= 1.0) {
        return Err(AnomalyError::InvalidParameter(format!(
            "epsilon {eps} must be in (0, 1/{m}]"
        )));
    }

    let probs: Vec<Vec<f64>> = counts
        .iter()
        .map(|row| {
            let total: usize = row.iter().sum();
            if total == 0 {
                vec![1.0 / m as f64; m]
            } else {
                row.iter()
                    .map(|&c| eps + (1.0 - m as f64 * eps) * c as f64 / total as f64)
                    .collect()
            }
        })
        .collect();

    let mut model = TransitionModel {
        states: all_states,
        probs,
        epsilon: eps,
        window,
        train_transitions: n,
        service_threshold: 1.0,
        log_service_threshold: 0.0,
    };
    let log_probs: Vec<f64> = sequences.iter().map(|s| model.log_prob(s)).collect();
    let threshold = nearest_rank_quantile(&log_probs, SERVICE_TAIL).unwrap_or(0.0);
    model.log_service_threshold = threshold;
    model.service_threshold = threshold.exp();
    Ok(model)
}

impl TransitionModel {
    fn index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }

    /// Transition probability; `None` when either state is unknown.
    pub fn transition_prob(&self, from: &str, to: &str) -> Option<f64> {
        Some(self.probs[self.index(from)?][self.index(to)?])
    }

    /// Per-transition flag line: a transition seen once in training.
    pub fn transition_threshold(&self) -> f64 {
        1.0 / self.train_transitions as f64
    }

    pub fn log_prob(&self, sequence: &[String]) -> f64 {
        sequence
            .windows(2)
            .map(|w| self.transition_prob(&w[0], &w[1]).unwrap_or(self.epsilon).ln())
            .sum()
    }

    /// `log P(E) = sum_t log p(e_t, e_t+1)` with per-transition and
    /// per-service flags. Unknown states score as `epsilon` and are flagged.
    pub fn score_sequence(&self, sequence: &[String]) -> SequenceScore {
        let line = self.transition_threshold();
        let mut log_prob = 0.0;
        let transitions = sequence
            .windows(2)
            .enumerate()
            .map(|(position, w)| {
                let known = self.transition_prob(&w[0], &w[1]);
                let prob = known.unwrap_or(self.epsilon);
                log_prob += prob.ln();
                TransitionScore {
                    position,
                    from: w[0].clone(),
                    to: w[1].clone(),
                    prob,
                    flagged: known.is_none() || prob < line,
                    unknown: known.is_none(),
                    from_run: None,
                    to_run: None,
                }
            })
            .collect();
        SequenceScore {
            log_prob,
            flag: log_prob < self.log_service_threshold,
            transitions,
        }
    }

    pub fn score_resampled(&self, resampled: &ResampledSequence) -> SequenceScore {
        let mut score = self.score_sequence(&resampled.states);
        for t in &mut score.transitions {
            t.from_run = resampled.runs.get(t.position).copied();
            t.to_run = resampled.runs.get(t.position + 1).copied();
        }
        score
    }

    /// Largest deviation of a row sum from one.
    pub fn row_sum_error(&self) -> f64 {
        self.probs
            .iter()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}
