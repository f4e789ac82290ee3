//! Entropy, Kullback-Leibler divergence and moments on a finite space.

use thiserror::Error;

use crate::distribution::Distribution;

#[derive(Debug, Error, PartialEq)]
pub enum InfoError {
    #[error("q vanishes at cell {cell} where p = {p}")]
    AbsoluteContinuityViolation { cell: usize, p: f64 },
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
}

/// Shannon entropy in nats, with `0 log 0 = 0`.
pub fn entropy(p: &Distribution) -> f64 {
    -p.probs()
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

/// `D(p‖q) = Σ p log(p/q)`.
pub fn kl(p: &Distribution, q: &Distribution) -> Result<f64, InfoError> {
    if p.len() != q.len() {
        return Err(InfoError::ShapeMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    let mut total = 0.0;
    for (cell, (&a, &b)) in p.probs().iter().zip(q.probs()).enumerate() {
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return Err(InfoError::AbsoluteContinuityViolation { cell, p: a });
        }
        total += a * (a / b).ln();
    }
    // rounding can push an exact zero slightly negative
    Ok(total.max(0.0))
}

/// `s_α = Σ_k p_k f^α(ω_k)` for each column.
pub fn moments<C: AsRef<[f64]>>(p: &Distribution, columns: &[C]) -> Result<Vec<f64>, InfoError> {
    columns
        .iter()
        .map(|c| {
            let c = c.as_ref();
            if c.len() != p.len() {
                return Err(InfoError::ShapeMismatch {
                    expected: p.len(),
                    got: c.len(),
                });
            }
            Ok(p.probs().iter().zip(c).map(|(a, b)| a * b).sum())
        })
        .collect()
}
