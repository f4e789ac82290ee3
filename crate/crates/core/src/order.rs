//! Graded lexicographic monomial ordering, ranks, distances and shells.
//!
//! `α ≺ β` iff `|α| < |β|`, or the degrees agree and the most significant
//! differing exponent is larger in `β`. With the default precedence the
//! last variable is the most significant, so the order begins
//! `1, x1, x2, .., xN, x1², x1x2, x2², x1x3, ..`.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrderError {
    #[error("multi-index of length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("empty index set")]
    EmptyA,
    #[error("invalid precedence permutation")]
    BadPrecedence,
    #[error("rank overflow")]
    Overflow,
}

/// Exponent vector `α ∈ ℕ^N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Product notation such as `f1^2*f3`, or `1` for the zero index.
    pub fn pretty(&self, symbol: &str) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                if e == 1 {
                    format!("{symbol}{}", i + 1)
                } else {
                    format!("{symbol}{}^{e}", i + 1)
                }
            })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Which shell members count as lookahead candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CandidatePolicy {
    /// Everything within ≺-distance `d` of some member, on either side.
    #[default]
    LiteralShell,
    /// Only indices strictly after the ≺-largest member.
    SucceedingOnly,
}

/// Graded lexicographic order on `ℕ^N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialOrder {
    /// `precedence[i]` is the variable with significance `i` (0 = least).
    precedence: Vec<usize>,
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

impl MonomialOrder {
    /// Default precedence `v1 < v2 < .. < vN`.
    pub fn graded_lex(nvars: usize) -> Self {
        assert!(nvars > 0, "need at least one variable");
        Self {
            precedence: (0..nvars).collect(),
        }
    }

    pub fn with_precedence(precedence: Vec<usize>) -> Result<Self, OrderError> {
        let mut seen = vec![false; precedence.len()];
        for &p in &precedence {
            if p >= seen.len() || seen[p] {
                return Err(OrderError::BadPrecedence);
            }
            seen[p] = true;
        }
        if precedence.is_empty() {
            return Err(OrderError::BadPrecedence);
        }
        Ok(Self { precedence })
    }

    pub fn nvars(&self) -> usize {
        self.precedence.len()
    }

    fn check(&self, a: &MultiIndex) -> Result<(), OrderError> {
        if a.len() != self.nvars() {
            return Err(OrderError::LengthMismatch {
                expected: self.nvars(),
                got: a.len(),
            });
        }
        Ok(())
    }

    pub fn compare(&self, a: &MultiIndex, b: &MultiIndex) -> Result<Ordering, OrderError> {
        self.check(a)?;
        self.check(b)?;
        let by_degree = a.degree().cmp(&b.degree());
        if by_degree != Ordering::Equal {
            return Ok(by_degree);
        }
        for &v in self.precedence.iter().rev() {
            match a.0[v].cmp(&b.0[v]) {
                Ordering::Equal => continue,
                other => return Ok(other),
            }
        }
        Ok(Ordering::Equal)
    }

    /// Number of multi-indices strictly below `a`.
    pub fn rank(&self, a: &MultiIndex) -> Result<u128, OrderError> {
        self.check(a)?;
        let n = self.nvars() as u128;
        let d = a.degree() as u128;
        let mut r = if d == 0 {
            0
        } else {
            binomial(d - 1 + n, n).ok_or(OrderError::Overflow)?
        };
        let mut rem = d;
        for i in (1..self.nvars()).rev() {
            let ai = a.0[self.precedence[i]] as u128;
            for v in 0..ai {
                r = r
                    .checked_add(binomial(rem - v + i as u128 - 1, i as u128 - 1).ok_or(OrderError::Overflow)?)
                    .ok_or(OrderError::Overflow)?;
            }
            rem -= ai;
        }
        Ok(r)
    }

    /// Inverse of [`rank`](Self::rank).
    pub fn unrank(&self, mut r: u128) -> MultiIndex {
        let n = self.nvars() as u128;
        let mut d: u128 = 0;
        loop {
            let upto = binomial(d + n, n).expect("rank within u128");
            if r < upto {
                break;
            }
            d += 1;
        }
        if d > 0 {
            r -= binomial(d - 1 + n, n).unwrap();
        }
        let mut out = vec![0u32; self.nvars()];
        let mut rem = d;
        for i in (1..self.nvars()).rev() {
            let mut v = 0;
            loop {
                let c = binomial(rem - v + i as u128 - 1, i as u128 - 1).unwrap();
                if r < c {
                    break;
                }
                r -= c;
                v += 1;
            }
            out[self.precedence[i]] = v as u32;
            rem -= v;
        }
        out[self.precedence[0]] = rem as u32;
        MultiIndex(out)
    }

    /// The next `count` indices strictly after `start_after` (from the zero
    /// index when `None`).
    pub fn enumerate(
        &self,
        start_after: Option<&MultiIndex>,
        count: usize,
    ) -> Result<Vec<MultiIndex>, OrderError> {
        let first = match start_after {
            Some(a) => self.rank(a)? + 1,
            None => 0,
        };
        Ok((0..count as u128).map(|i| self.unrank(first + i)).collect())
    }

    /// `d(α, β) = |{γ : min(α,β) ≺ γ ⪯ max(α,β)}|`.
    pub fn distance(&self, a: &MultiIndex, b: &MultiIndex) -> Result<u128, OrderError> {
        Ok(self.rank(a)?.abs_diff(self.rank(b)?))
    }

    /// `B(A, d)` sorted increasingly under ≺.
    pub fn shell(
        &self,
        members: &[MultiIndex],
        depth: u128,
        policy: CandidatePolicy,
    ) -> Result<Vec<MultiIndex>, OrderError> {
        let ranks = self.shell_ranks(members, depth, policy)?;
        Ok(ranks.into_iter().map(|r| self.unrank(r)).collect())
    }

    /// Ranks of [`shell`](Self::shell), sorted increasingly.
    pub fn shell_ranks(
        &self,
        members: &[MultiIndex],
        depth: u128,
        policy: CandidatePolicy,
    ) -> Result<Vec<u128>, OrderError> {
        if members.is_empty() {
            return Err(OrderError::EmptyA);
        }
        let ranks = members
            .iter()
            .map(|a| self.rank(a))
            .collect::<Result<Vec<_>, _>>()?;
        let mut out: HashSet<u128> = HashSet::new();
        match policy {
            CandidatePolicy::LiteralShell => {
                for &r in &ranks {
                    let lo = r.saturating_sub(depth);
                    let hi = r.checked_add(depth).ok_or(OrderError::Overflow)?;
                    out.extend(lo..=hi);
                }
            }
            CandidatePolicy::SucceedingOnly => {
                let top = *ranks.iter().max().unwrap();
                out.extend(top + 1..=top + depth);
            }
        }
        let mut v: Vec<u128> = out.into_iter().collect();
        v.sort_unstable();
        Ok(v)
    }
}
