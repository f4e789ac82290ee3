//! Finite lattice state spaces.
//!
//! Coordinates are stored in doubled units (`2 * value`): the half-integer
//! levels of the shifted microimage space become exact integers.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("point {index} has {got} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("duplicate point at positions {first} and {second}")]
    DuplicatePoint { first: usize, second: usize },
    #[error("invalid level count {0}, need L >= 2")]
    BadLevels(usize),
    #[error("space of {0} points is too large")]
    TooLarge(u128),
}

/// An enumerated finite set of points in `Q^m` with half-integer coordinates.
#[derive(Debug, Clone)]
pub struct LatticeSpace {
    dimension: usize,
    points: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, usize>,
    /// Set for spaces of the form `{-(L-1)/2, .., (L-1)/2}^m`.
    levels: Option<usize>,
}

impl LatticeSpace {
    /// Builds a space from points given in doubled units.
    pub fn from_doubled(dimension: usize, points: Vec<Vec<i64>>) -> Result<Self, LatticeError> {
        if dimension == 0 {
            return Err(LatticeError::ZeroDimension);
        }
        let mut index = HashMap::with_capacity(points.len());
        for (k, p) in points.iter().enumerate() {
            if p.len() != dimension {
                return Err(LatticeError::DimensionMismatch {
                    index: k,
                    expected: dimension,
                    got: p.len(),
                });
            }
            if let Some(first) = index.insert(p.clone(), k) {
                return Err(LatticeError::DuplicatePoint { first, second: k });
            }
        }
        Ok(Self {
            dimension,
            points,
            index,
            levels: None,
        })
    }

    /// The centered grid `{-(L-1)/2, .., (L-1)/2}^m`, enumerated
    /// lexicographically with the first coordinate most significant.
    pub fn centered_grid(levels: usize, dimension: usize) -> Result<Self, LatticeError> {
        if levels < 2 {
            return Err(LatticeError::BadLevels(levels));
        }
        if dimension == 0 {
            return Err(LatticeError::ZeroDimension);
        }
        let size = (levels as u128).checked_pow(dimension as u32).unwrap_or(u128::MAX);
        if size > 50_000_000 {
            return Err(LatticeError::TooLarge(size));
        }
        let size = size as usize;
        let l = levels as i64;
        let mut points = Vec::with_capacity(size);
        for k in 0..size {
            let mut rest = k;
            let mut p = vec![0i64; dimension];
            for slot in p.iter_mut().rev() {
                let level = (rest % levels) as i64;
                rest /= levels;
                *slot = 2 * level - (l - 1);
            }
            points.push(p);
        }
        let mut space = Self::from_doubled(dimension, points)?;
        space.levels = Some(levels);
        Ok(space)
    }

    /// `Ω_n^L`: the shifted space of `n x n` microimages with `L` levels.
    pub fn microimages(levels: usize, patch: usize) -> Result<Self, LatticeError> {
        Self::centered_grid(levels, patch * patch)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of points `K`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn levels(&self) -> Option<usize> {
        self.levels
    }

    /// Point `k` in doubled units.
    pub fn doubled(&self, k: usize) -> &[i64] {
        &self.points[k]
    }

    pub fn points_doubled(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn index_of_doubled(&self, p: &[i64]) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Point `k` as exact rationals.
    pub fn point(&self, k: usize) -> Vec<BigRational> {
        self.points[k]
            .iter()
            .map(|&c| BigRational::new(BigInt::from(c), BigInt::from(2)))
            .collect()
    }

    pub fn point_f64(&self, k: usize) -> Vec<f64> {
        self.points[k].iter().map(|&c| c as f64 / 2.0).collect()
    }

    /// Index of the grid point with the given levels `0..L`.
    pub fn index_of_levels(&self, levels: &[usize]) -> Option<usize> {
        let l = self.levels?;
        if levels.len() != self.dimension {
            return None;
        }
        let mut k = 0usize;
        for &v in levels {
            if v >= l {
                return None;
            }
            k = k * l + v;
        }
        Some(k)
    }

    /// Human-readable coordinates, e.g. `-3/2,1/2`.
    pub fn format_point(&self, k: usize) -> String {
        self.points[k]
            .iter()
            .map(|&c| {
                if c % 2 == 0 {
                    (c / 2).to_string()
                } else {
                    format!("{c}/2")
                }
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}
