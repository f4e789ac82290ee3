//! Incremental orthonormal basis for spans of feature vectors.
//!
//! The inner product is the uniform average `⟨u, v⟩ = (1/K) Σ u_k v_k`. The
//! constant vector is always the first basis direction; every further
//! column is centered and scaled to unit standard deviation, then
//! orthogonalized by two passes of Gram-Schmidt. A column whose relative
//! residual falls below the pivot threshold is linearly dependent.
//!
//! [`ModularSpan`] makes the same decisions exactly, over a prime field.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;

pub const DEFAULT_PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct OrthoBasis {
    k: usize,
    pivot_tol: f64,
    /// Non-constant orthonormal directions, each of length `k`.
    q: Vec<Vec<f64>>,
    /// `r[j]` holds the coefficients of standardized column `j` on `q[0..=j]`.
    r: Vec<Vec<f64>>,
    means: Vec<f64>,
    sds: Vec<f64>,
}

/// Centering and scaling of a column under the uniform measure.
#[derive(Debug, Clone, Copy)]
pub struct Standardization {
    pub mean: f64,
    pub sd: f64,
}

pub fn standardization(v: &[f64]) -> Standardization {
    let k = v.len() as f64;
    let mean = v.iter().sum::<f64>() / k;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / k;
    Standardization {
        mean,
        sd: var.sqrt(),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
}

impl OrthoBasis {
    /// Basis spanning only the constant vector.
    pub fn new(k: usize, pivot_tol: f64) -> Self {
        Self {
            k,
            pivot_tol,
            q: Vec::new(),
            r: Vec::new(),
            means: Vec::new(),
            sds: Vec::new(),
        }
    }

    /// Dimension of the span, counting the constant.
    pub fn dim(&self) -> usize {
        self.q.len() + 1
    }

    pub fn space_len(&self) -> usize {
        self.k
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.q
    }

    pub fn r_columns(&self) -> &[Vec<f64>] {
        &self.r
    }

    pub fn standardizations(&self) -> impl Iterator<Item = Standardization> + '_ {
        self.means
            .iter()
            .zip(&self.sds)
            .map(|(&mean, &sd)| Standardization { mean, sd })
    }

    /// Relative residual of `v` after removing its component in the span;
    /// 0 for vectors in the span of the constant.
    pub fn residual(&self, v: &[f64]) -> f64 {
        match self.orthogonalize(v) {
            Some((_, _, w, _)) => dot(&w, &w).sqrt(),
            None => 0.0,
        }
    }

    pub fn is_independent(&self, v: &[f64]) -> bool {
        self.residual(v) >= self.pivot_tol
    }

    /// Standardizes and orthogonalizes `v`; returns `(std, coeffs, residual
    /// vector, residual norm)` or `None` for a numerically constant vector.
    fn orthogonalize(&self, v: &[f64]) -> Option<(Standardization, Vec<f64>, Vec<f64>, f64)> {
        assert_eq!(v.len(), self.k, "vector length must match the space");
        let st = standardization(v);
        let rms = (dot(v, v)).sqrt();
        if rms == 0.0 || st.sd / rms < self.pivot_tol {
            return None;
        }
        let mut w: Vec<f64> = v.iter().map(|x| (x - st.mean) / st.sd).collect();
        let mut coeffs = vec![0.0; self.q.len()];
        for _ in 0..2 {
            for (i, qi) in self.q.iter().enumerate() {
                let c = dot(qi, &w);
                coeffs[i] += c;
                w.iter_mut().zip(qi).for_each(|(x, q)| *x -= c * q);
            }
        }
        let norm = dot(&w, &w).sqrt();
        Some((st, coeffs, w, norm))
    }

    /// Appends `v` if independent; returns `false` (leaving the basis
    /// unchanged) otherwise.
    pub fn push(&mut self, v: &[f64]) -> bool {
        let Some((st, mut coeffs, w, norm)) = self.orthogonalize(v) else {
            return false;
        };
        if norm < self.pivot_tol {
            return false;
        }
        self.q.push(w.into_iter().map(|x| x / norm).collect());
        coeffs.push(norm);
        self.r.push(coeffs);
        self.means.push(st.mean);
        self.sds.push(st.sd);
        true
    }
}

/// Prime modulus for exact rank computations.
pub const MODULUS: u64 = (1 << 61) - 1;

fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MODULUS as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a);
        }
        a = mul_mod(a, a);
        e >>= 1;
    }
    acc
}

fn inv_mod(a: u64) -> u64 {
    pow_mod(a, MODULUS - 2)
}

/// Image of a rational whose denominator is prime to [`MODULUS`].
pub fn rational_mod(r: &BigRational) -> u64 {
    let p = BigInt::from(MODULUS);
    let reduce = |v: &BigInt| -> u64 { v.mod_floor(&p).to_u64().expect("reduced below modulus") };
    let den = reduce(r.denom());
    assert!(den != 0, "denominator divisible by the modulus");
    mul_mod(reduce(r.numer()), inv_mod(den))
}

pub fn vector_mod(v: &[BigRational]) -> Vec<u64> {
    v.iter().map(rational_mod).collect()
}

/// Row space over `Z/p`, kept in reduced row echelon form.
///
/// A vector independent mod p is independent over the rationals, so
/// `push` never accepts a dependent vector; a rational-independent vector
/// is rejected only if `p` divides every maximal minor involving it.
#[derive(Debug, Clone)]
pub struct ModularSpan {
    k: usize,
    rows: Vec<(usize, Vec<u64>)>,
}

impl ModularSpan {
    pub fn new(k: usize) -> Self {
        Self { k, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn space_len(&self) -> usize {
        self.k
    }

    fn reduce(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.k, "vector length must match the space");
        let mut w = v.to_vec();
        for (pivot, row) in &self.rows {
            let c = w[*pivot];
            if c != 0 {
                let neg = MODULUS - c;
                for (x, r) in w.iter_mut().zip(row) {
                    *x = (*x + mul_mod(neg, *r)) % MODULUS;
                }
            }
        }
        w
    }

    pub fn is_independent(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().any(|&x| x != 0)
    }

    /// Appends `v` if independent; returns whether it was.
    pub fn push(&mut self, v: &[u64]) -> bool {
        let mut w = self.reduce(v);
        let Some(pivot) = w.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = inv_mod(w[pivot]);
        w.iter_mut().for_each(|x| *x = mul_mod(*x, inv));
        for (_, row) in self.rows.iter_mut() {
            let c = row[pivot];
            if c != 0 {
                let neg = MODULUS - c;
                for (x, r) in row.iter_mut().zip(&w) {
                    *x = (*x + mul_mod(neg, *r)) % MODULUS;
                }
            }
        }
        self.rows.push((pivot, w));
        true
    }

    /// Dimension of the sum of this span and the span of `others`.
    pub fn joint_rank<'a>(&self, others: impl IntoIterator<Item = &'a [u64]>) -> usize {
        let mut s = self.clone();
        for v in others {
            s.push(v);
        }
        s.dim()
    }
}
