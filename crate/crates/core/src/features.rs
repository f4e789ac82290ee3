//! Monomial feature vectors over a lattice, orbit signatures and orbit
//! indicators.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::GroupAction;
use crate::generators::GeneratorSet;
use crate::lattice::LatticeSpace;
use crate::order::MultiIndex;
use crate::rational::{to_f64, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureError {
    #[error("multi-index of length {got} for a pool of arity {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("generators have {gens} variables, space has dimension {space}")]
    DimensionMismatch { gens: usize, space: usize },
    #[error("orbits {0} and {1} share a signature; the generators do not separate orbits")]
    SignatureCollision(usize, usize),
    #[error("generator values differ within orbit {0}")]
    NotInvariant(usize),
    #[error("orbit {0} does not exist")]
    NoSuchOrbit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolTag {
    Invariant,
    Ordinary,
}

impl PoolTag {
    pub fn symbol(self) -> &'static str {
        match self {
            PoolTag::Invariant => "f",
            PoolTag::Ordinary => "x",
        }
    }
}

/// A model term: a monomial index tagged with the pool it is drawn from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Term {
    pub pool: PoolTag,
    pub index: MultiIndex,
}

impl Term {
    pub fn new(pool: PoolTag, index: MultiIndex) -> Self {
        Self { pool, index }
    }

    pub fn is_constant(&self) -> bool {
        self.index.is_zero()
    }

    /// `f:(0,0,2,0,0)` style notation.
    pub fn tuple_notation(&self) -> String {
        format!("{}:{}", self.pool.symbol(), self.index)
    }

    /// `f3^2` style notation.
    pub fn pretty(&self) -> String {
        self.index.pretty(self.pool.symbol())
    }

    /// Parses `f:(0,0,2,0,0)`, `x:(1,0,0,0)` or a product such as `f3^2`,
    /// `f1*f3` or `x1^2*x4`, given the arities of the two pools. A bare
    /// `1` is the invariant constant.
    pub fn parse(text: &str, invariant_arity: usize, ordinary_arity: usize) -> Result<Self, TermParseError> {
        let text = text.trim();
        let bad = |why: &str| TermParseError(format!("{text:?}: {why}"));
        let arity = |pool| match pool {
            PoolTag::Invariant => invariant_arity,
            PoolTag::Ordinary => ordinary_arity,
        };
        let pool_of = |s: &str| match s {
            "f" => Some(PoolTag::Invariant),
            "x" => Some(PoolTag::Ordinary),
            _ => None,
        };
        if text == "1" {
            return Ok(Self::new(PoolTag::Invariant, MultiIndex::zero(invariant_arity)));
        }
        if let Some((head, tuple)) = text.split_once(':') {
            let pool = pool_of(head.trim()).ok_or_else(|| bad("pool must be f or x"))?;
            let inner = tuple
                .trim()
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(|| bad("expected a parenthesized tuple"))?;
            let exps = inner
                .split(',')
                .map(|e| e.trim().parse::<u32>().map_err(|_| bad("exponents must be integers")))
                .collect::<Result<Vec<_>, _>>()?;
            if exps.len() != arity(pool) {
                return Err(bad(&format!("expected {} exponents", arity(pool))));
            }
            return Ok(Self::new(pool, MultiIndex(exps)));
        }
        let mut pool = None;
        let mut exps = Vec::new();
        for factor in text.split('*') {
            let factor = factor.trim();
            let (base, exp) = match factor.split_once('^') {
                Some((b, e)) => (b, e.trim().parse::<u32>().map_err(|_| bad("bad exponent"))?),
                None => (factor, 1),
            };
            let p = base.get(..1).and_then(pool_of).ok_or_else(|| bad("factors look like f3 or x2"))?;
            if *pool.get_or_insert(p) != p {
                return Err(bad("factors mix pools"));
            }
            if exps.is_empty() {
                exps = vec![0; arity(p)];
            }
            let i: usize = base[1..].parse().map_err(|_| bad("bad variable number"))?;
            if i == 0 || i > exps.len() {
                return Err(bad(&format!("variable number outside 1..={}", exps.len())));
            }
            exps[i - 1] += exp;
        }
        Ok(Self::new(pool.expect("split yields a factor"), MultiIndex(exps)))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid term {0}")]
pub struct TermParseError(pub String);

/// `f^α` evaluated at every point of the space.
#[derive(Debug, Clone)]
pub struct FeatureVector {
    pub index: MultiIndex,
    pub pool: PoolTag,
    pub exact: Vec<Rational>,
    pub values: Vec<f64>,
}

/// Evaluates monomials in a generator set over a lattice, caching by index.
#[derive(Debug)]
pub struct FeaturePool {
    tag: PoolTag,
    gens: GeneratorSet,
    /// `gen_values[k][i] = f_i(ω_k)`
    gen_values: Vec<Vec<Rational>>,
    cache: RwLock<HashMap<MultiIndex, Arc<FeatureVector>>>,
}

impl FeaturePool {
    pub fn new(tag: PoolTag, gens: GeneratorSet, space: &LatticeSpace) -> Result<Self, FeatureError> {
        if gens.nvars() != space.dimension() {
            return Err(FeatureError::DimensionMismatch {
                gens: gens.nvars(),
                space: space.dimension(),
            });
        }
        let gen_values = (0..space.len())
            .map(|k| {
                let x = space.point(k);
                gens.polys()
                    .iter()
                    .map(|f| f.eval(&x).expect("dimension checked"))
                    .collect()
            })
            .collect();
        Ok(Self {
            tag,
            gens,
            gen_values,
            cache: RwLock::new(HashMap::new()),
        })
    }

    /// Coordinate monomials `x^α` (the trivial group's generators).
    pub fn ordinary(space: &LatticeSpace) -> Self {
        Self::new(PoolTag::Ordinary, GeneratorSet::coordinates(space.dimension()), space)
            .expect("coordinates match the space")
    }

    pub fn tag(&self) -> PoolTag {
        self.tag
    }

    pub fn arity(&self) -> usize {
        self.gens.len()
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.gens
    }

    pub fn space_len(&self) -> usize {
        self.gen_values.len()
    }

    pub fn generator_values(&self, k: usize) -> &[Rational] {
        &self.gen_values[k]
    }

    pub fn eval(&self, index: &MultiIndex) -> Result<Arc<FeatureVector>, FeatureError> {
        if index.len() != self.arity() {
            return Err(FeatureError::ArityMismatch {
                expected: self.arity(),
                got: index.len(),
            });
        }
        if let Some(f) = self.cache.read().unwrap().get(index) {
            return Ok(Arc::clone(f));
        }
        let exact: Vec<Rational> = self
            .gen_values
            .iter()
            .map(|vals| {
                vals.iter()
                    .zip(&index.0)
                    .filter(|(_, &e)| e > 0)
                    .fold(Rational::one(), |acc, (v, &e)| acc * num_traits::pow(v.clone(), e as usize))
            })
            .collect();
        let values = exact.iter().map(to_f64).collect();
        let fv = Arc::new(FeatureVector {
            index: index.clone(),
            pool: self.tag,
            exact,
            values,
        });
        let mut cache = self.cache.write().unwrap();
        Ok(Arc::clone(cache.entry(index.clone()).or_insert(fv)))
    }
}

/// One generator-value tuple per orbit, checked pairwise distinct.
pub fn orbit_signature(gens: &GeneratorSet, action: &GroupAction) -> Result<Vec<Vec<Rational>>, FeatureError> {
    let space = action.space();
    if gens.nvars() != space.dimension() {
        return Err(FeatureError::DimensionMismatch {
            gens: gens.nvars(),
            space: space.dimension(),
        });
    }
    let orbits = action.orbits();
    let eval = |k: usize| -> Vec<Rational> {
        let x = space.point(k);
        gens.polys().iter().map(|f| f.eval(&x).unwrap()).collect()
    };
    let mut sigs = Vec::with_capacity(orbits.len());
    for o in 0..orbits.len() {
        let members = orbits.members(o);
        let sig = eval(members[0]);
        if members[1..].iter().any(|&k| eval(k) != sig) {
            return Err(FeatureError::NotInvariant(o));
        }
        sigs.push(sig);
    }
    let mut seen: HashMap<&[Rational], usize> = HashMap::new();
    for (o, s) in sigs.iter().enumerate() {
        if let Some(&first) = seen.get(s.as_slice()) {
            return Err(FeatureError::SignatureCollision(first, o));
        }
        seen.insert(s, o);
    }
    Ok(sigs)
}

/// The invariant function equal to 1 on `orbit` and 0 on every other orbit,
/// built as a normalized product of squared signature distances.
pub fn orbit_indicator(
    orbit: usize,
    gens: &GeneratorSet,
    action: &GroupAction,
) -> Result<Vec<Rational>, FeatureError> {
    let sigs = orbit_signature(gens, action)?;
    orbit_indicator_from_signatures(orbit, &sigs, action)
}

pub fn orbit_indicator_from_signatures(
    orbit: usize,
    sigs: &[Vec<Rational>],
    action: &GroupAction,
) -> Result<Vec<Rational>, FeatureError> {
    if orbit >= sigs.len() {
        return Err(FeatureError::NoSuchOrbit(orbit));
    }
    let sq_dist = |a: &[Rational], b: &[Rational]| -> Rational {
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                let d = x - y;
                &d * &d
            })
            .fold(Rational::zero(), |acc, v| acc + v)
    };
    let h = |at: &[Rational]| -> Rational {
        sigs.iter()
            .enumerate()
            .filter(|(o, _)| *o != orbit)
            .map(|(_, s)| sq_dist(at, s))
            .fold(Rational::one(), |acc, v| acc * v)
    };
    let norm = h(&sigs[orbit]);
    // the generators are invariant, so h is constant on each orbit
    let per_orbit: Vec<Rational> = sigs.iter().map(|s| h(s) / &norm).collect();
    let orbits = action.orbits();
    Ok((0..action.space().len())
        .map(|k| per_orbit[orbits.orbit_of(k)].clone())
        .collect())
}
