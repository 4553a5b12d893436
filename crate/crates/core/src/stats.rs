//! Small descriptive-statistics helpers shared by the scoring modules.

use serde::{Deserialize, Serialize};

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
pub fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Z-score transform fitted on a sample.
///
/// Degenerate samples (fewer than two values, or zero spread) map everything
/// to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl Standardizer {
    pub fn fit(values: &[f64]) -> Self {
        let m = mean(values);
        let sd = sample_sd(values);
        let scale = m.abs().max(1.0);
        Standardizer {
            mean: m,
            sd: if sd > 1e-12 * scale { sd } else { 0.0 },
            n: values.len(),
        }
    }

    pub fn z(&self, x: f64) -> f64 {
        if self.sd == 0.0 {
            0.0
        } else {
            (x - self.mean) / self.sd
        }
    }

    /// Too few samples for the z-score to mean anything.
    pub fn low_confidence(&self) -> bool {
        self.n < 2
    }
}

pub fn zscores(values: &[f64]) -> Vec<f64> {
    let s = Standardizer::fit(values);
    values.iter().map(|&x| s.z(x)).collect()
}

/// Nearest-rank empirical quantile: the smallest sample value with at least
/// `q` of the sample at or below it.
pub fn nearest_rank_quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (q * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}
