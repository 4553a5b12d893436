use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::AnomalyError;
use crate::event_log::ServiceRecordVector;
use crate::stats::{nearest_rank_quantile, Standardizer};

/// Seconds spent in each operation of `feature_order`, summed over runs.
/// Operations outside `feature_order` are ignored.
pub fn build_duration_vector(record: &ServiceRecordVector, feature_order: &[String]) -> Vec<f64> {
    let mut v = vec![0.0; feature_order.len()];
    for run in &record.items {
        if let Some(i) = feature_order.iter().position(|o| *o == run.operation) {
            v[i] += run.duration_s();
        }
    }
    v
}

/// How many principal components span the normal subspace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentSelection {
    Fixed(usize),
    /// Smallest k whose components explain at least this fraction of variance.
    VarianceFraction(f64),
}

impl Default for ComponentSelection {
    fn default() -> Self {
        ComponentSelection::VarianceFraction(0.95)
    }
}

/// Principal subspace of standardized normal duration vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalSpace {
    pub feature_order: Vec<String>,
    pub mean: Vec<f64>,
    /// Per-dimension sample SD; 0 pins the dimension to 0 after standardizing.
    pub scale: Vec<f64>,
    /// `k` orthonormal rows of length `feature_order.len()`.
    pub components: Vec<Vec<f64>>,
    /// All covariance eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub k: usize,
    pub q_threshold: f64,
    pub alpha: f64,
    pub training_size: usize,
}

/// Residuals this close to the threshold count as rounding noise.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalScore {
    /// Squared norm of the residual outside the normal subspace.
    pub score: f64,
    pub flag: bool,
}

/// Fits the normal subspace and its residual threshold.
///
/// The threshold is the nearest-rank `alpha` quantile of the training
/// residuals, so at most a `1 - alpha` share of the training set is flagged.
pub fn fit_normal_space(
    vectors: &[Vec<f64>],
    feature_order: &[String],
    selection: ComponentSelection,
    alpha: f64,
) -> Result<NormalSpace, AnomalyError> {
    let d = feature_order.len();
    if d == 0 {
        return Err(AnomalyError::EmptyInput);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(AnomalyError::InvalidParameter(format!("alpha {alpha} outside (0, 1)")));
    }
    for v in vectors {
        if v.len() != d {
            return Err(AnomalyError::DimensionMismatch { expected: d, got: v.len() });
        }
    }
    let n = vectors.len();
    let min_samples = match selection {
        ComponentSelection::Fixed(k) => {
            if k == 0 || k > d {
                return Err(AnomalyError::InvalidParameter(format!("k = {k} not in 1..={d}")));
            }
            k + 1
        }
        ComponentSelection::VarianceFraction(f) => {
            if !(f > 0.0 && f <= 1.0) {
                return Err(AnomalyError::InvalidParameter(format!("variance fraction {f} outside (0, 1]")));
            }
            2
        }
    };
    if n < min_samples {
        return Err(AnomalyError::InsufficientData { needed: min_samples, got: n });
    }

    let standardizers: Vec<Standardizer> = (0..d)
        .map(|j| Standardizer::fit(&vectors.iter().map(|v| v[j]).collect::<Vec<_>>()))
        .collect();
    let mean: Vec<f64> = standardizers.iter().map(|s| s.mean).collect();
    let scale: Vec<f64> = standardizers.iter().map(|s| s.sd).collect();
    let z = DMatrix::from_fn(n, d, |i, j| standardizers[j].z(vectors[i][j]));
    let cov = (z.transpose() * &z) / (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();

    let k = match selection {
        ComponentSelection::Fixed(k) => k,
        ComponentSelection::VarianceFraction(f) => {
            let total: f64 = eigenvalues.iter().sum();
            if total <= 0.0 {
                1
            } else {
                let mut acc = 0.0;
                let mut k = d;
                for (i, ev) in eigenvalues.iter().enumerate() {
                    acc += ev;
                    if acc >= f * total * (1.0 - 1e-12) {
                        k = i + 1;
                        break;
                    }
                }
                k
            }
        }
    };

    let components: Vec<Vec<f64>> = order[..k]
        .iter()
        .map(|&c| {
            let mut col: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
            // fix the sign so fits are reproducible regardless of solver convention
            let pivot = col
                .iter()
                .copied()
                .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
            if pivot < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
            col
        })
        .collect();

    let mut space = NormalSpace {
        feature_order: feature_order.to_vec(),
        mean,
        scale,
        components,
        eigenvalues,
        k,
        q_threshold: 0.0,
        alpha,
        training_size: n,
    };
    let residuals: Vec<f64> = vectors
        .iter()
        .map(|v| space.decompose(&space.standardize(v).expect("dims checked")).1)
        .collect();
    space.q_threshold = nearest_rank_quantile(&residuals, alpha).unwrap_or(0.0).max(0.0);
    Ok(space)
}

impl NormalSpace {
    pub fn dimension(&self) -> usize {
        self.feature_order.len()
    }

    pub fn standardize(&self, vector: &[f64]) -> Result<Vec<f64>, AnomalyError> {
        if vector.len() != self.dimension() {
            return Err(AnomalyError::DimensionMismatch {
                expected: self.dimension(),
                got: vector.len(),
            });
        }
        Ok(vector
            .iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(x, (m, s))| if *s == 0.0 { 0.0 } else { (x - m) / s })
            .collect())
    }

    /// Splits a standardized vector into (squared projection, squared residual).
    pub fn decompose(&self, z: &[f64]) -> (f64, f64) {
        let mut residual = z.to_vec();
        let mut projected = 0.0;
        for c in &self.components {
            let coef: f64 = c.iter().zip(z).map(|(a, b)| a * b).sum();
            projected += coef * coef;
            for (r, ci) in residual.iter_mut().zip(c) {
                *r -= coef * ci;
            }
        }
        (projected, residual.iter().map(|r| r * r).sum())
    }

    pub fn temporal_anomaly(&self, vector: &[f64]) -> Result<TemporalScore, AnomalyError> {
        let z = self.standardize(vector)?;
        let (_, score) = self.decompose(&z);
        Ok(TemporalScore {
            score,
            flag: score > self.q_threshold + RESIDUAL_TOLERANCE,
        })
    }

    /// Largest deviation of `components * components^T` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.components.iter().enumerate() {
            for (j, b) in self.components.iter().enumerate() {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}
