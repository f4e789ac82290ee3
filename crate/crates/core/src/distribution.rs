use thiserror::Error;

pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum DistributionError {
    #[error("empty probability vector")]
    Empty,
    #[error("negative or non-finite probability {value} at cell {index}")]
    BadEntry { index: usize, value: f64 },
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("counts sum to zero")]
    ZeroTotal,
}

/// A probability vector over the `K` points of a lattice space.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, DistributionError> {
        if probs.is_empty() {
            return Err(DistributionError::Empty);
        }
        if let Some((index, &value)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(DistributionError::BadEntry { index, value });
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(DistributionError::NotNormalized(total));
        }
        Ok(Self(probs))
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self, DistributionError> {
        if weights.is_empty() {
            return Err(DistributionError::Empty);
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(DistributionError::BadEntry { index, value });
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(DistributionError::ZeroTotal);
        }
        Ok(Self(weights.iter().map(|w| w / total).collect()))
    }

    pub fn from_counts(counts: &[u64]) -> Result<Self, DistributionError> {
        let w: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        Self::from_weights(&w)
    }

    pub fn uniform(k: usize) -> Self {
        Self(vec![1.0 / k as f64; k])
    }

    pub fn point_mass(k: usize, at: usize) -> Self {
        let mut p = vec![0.0; k];
        p[at] = 1.0;
        Self(p)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.0.iter().all(|&p| p > 0.0)
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}
