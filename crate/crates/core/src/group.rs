//! Finite matrix groups given by generators.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::path::Path;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{int, parse_rational, RatMatrix, Rational};

pub const DEFAULT_MAX_ORDER: usize = 10_000;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("generator {0} is not invertible")]
    NonInvertibleGenerator(usize),
    #[error("generator {index} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("group closure exceeded {0} elements")]
    OrderBoundExceeded(usize),
    #[error("invalid group definition: {0}")]
    BadSpec(String),
    #[error("unknown builtin group `{0}`")]
    UnknownBuiltin(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupElement {
    pub matrix: RatMatrix,
    /// Word in generator names, read right to left (`"rs"` is `r * s`).
    pub label: Option<String>,
}

impl GroupElement {
    pub fn new(matrix: RatMatrix) -> Self {
        Self {
            matrix,
            label: None,
        }
    }

    pub fn named(matrix: RatMatrix, label: impl Into<String>) -> Self {
        Self {
            matrix,
            label: Some(label.into()),
        }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.dim()
    }

    /// Image of a point, `ρ(g) x`.
    pub fn act_point(&self, x: &[Rational]) -> Result<Vec<Rational>, GroupError> {
        if x.len() != self.dimension() {
            return Err(GroupError::DimensionMismatch {
                index: 0,
                expected: self.dimension(),
                got: x.len(),
            });
        }
        Ok(self.matrix.apply(x))
    }

    /// Image of a point in doubled integer units; `None` when the image
    /// leaves the half-integer lattice.
    pub fn act_doubled(&self, x: &[i64]) -> Option<Vec<i64>> {
        let xs: Vec<Rational> = x.iter().map(|&v| int(v)).collect();
        self.matrix
            .apply(&xs)
            .into_iter()
            .map(|v| if v.is_integer() { v.to_integer().to_i64() } else { None })
            .collect()
    }
}

/// A finite matrix group with its full element list.
#[derive(Debug, Clone)]
pub struct GroupSpec {
    dimension: usize,
    generators: Vec<GroupElement>,
    elements: Vec<GroupElement>,
    inverses: Vec<usize>,
    /// `products[a * order + b]` is the index of `elements[a] * elements[b]`.
    products: Vec<usize>,
}

/// Breadth-first closure of `generators` under multiplication.
pub fn close_group(
    dimension: usize,
    generators: Vec<GroupElement>,
    max_order: usize,
) -> Result<GroupSpec, GroupError> {
    for (i, g) in generators.iter().enumerate() {
        if g.dimension() != dimension {
            return Err(GroupError::DimensionMismatch {
                index: i,
                expected: dimension,
                got: g.dimension(),
            });
        }
        if g.matrix.det().is_zero() {
            return Err(GroupError::NonInvertibleGenerator(i));
        }
    }
    let names: Vec<String> = generators
        .iter()
        .enumerate()
        .map(|(i, g)| g.label.clone().unwrap_or_else(|| format!("g{}", i + 1)))
        .collect();

    let identity = RatMatrix::identity(dimension);
    let mut seen: HashMap<RatMatrix, usize> = HashMap::new();
    let mut elements = vec![GroupElement::named(identity.clone(), "e")];
    seen.insert(identity, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(idx) = queue.pop_front() {
        for (g, name) in generators.iter().zip(&names) {
            let m = g.matrix.mul(&elements[idx].matrix);
            if seen.contains_key(&m) {
                continue;
            }
            if elements.len() >= max_order {
                return Err(GroupError::OrderBoundExceeded(max_order));
            }
            let label = match elements[idx].label.as_deref() {
                Some("e") | None => name.clone(),
                Some(w) => format!("{name}{w}"),
            };
            seen.insert(m.clone(), elements.len());
            queue.push_back(elements.len());
            elements.push(GroupElement::named(m, label));
        }
    }

    let order = elements.len();
    let mut products = vec![0usize; order * order];
    for a in 0..order {
        for b in 0..order {
            let m = elements[a].matrix.mul(&elements[b].matrix);
            products[a * order + b] = *seen
                .get(&m)
                .ok_or_else(|| GroupError::BadSpec("closure is not multiplicatively closed".into()))?;
        }
    }
    let inverses = (0..order)
        .map(|a| {
            (0..order)
                .find(|&b| products[a * order + b] == 0)
                .ok_or_else(|| GroupError::BadSpec("element without inverse".into()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(GroupSpec {
        dimension,
        generators,
        elements,
        inverses,
        products,
    })
}

impl GroupSpec {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    /// All elements; index 0 is the identity.
    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &GroupElement {
        &self.elements[i]
    }

    pub fn inverse_index(&self, i: usize) -> usize {
        self.inverses[i]
    }

    pub fn product_index(&self, a: usize, b: usize) -> usize {
        self.products[a * self.order() + b]
    }

    /// Inverse matrices of the generators.
    pub fn generator_inverses(&self) -> Vec<RatMatrix> {
        self.generators
            .iter()
            .map(|g| g.matrix.inverse().expect("generators checked invertible"))
            .collect()
    }

    /// Exact check that every element has determinant +1 or -1.
    pub fn all_unimodular(&self) -> bool {
        self.elements.iter().all(|g| g.matrix.det().abs() == int(1))
    }

    /// The symmetry group of the 2x2 microimage square: rotation `r`,
    /// anti-diagonal reflection `s` and photometric inversion `i`.
    pub fn microimage() -> Self {
        let r = RatMatrix::from_i64(&[&[0, 0, 0, 1], &[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0]]);
        let s = RatMatrix::from_i64(&[&[1, 0, 0, 0], &[0, 0, 0, 1], &[0, 0, 1, 0], &[0, 1, 0, 0]]);
        let i = RatMatrix::from_i64(&[&[-1, 0, 0, 0], &[0, -1, 0, 0], &[0, 0, -1, 0], &[0, 0, 0, -1]]);
        let gens = vec![
            GroupElement::named(r.unwrap(), "r"),
            GroupElement::named(s.unwrap(), "s"),
            GroupElement::named(i.unwrap(), "i"),
        ];
        close_group(4, gens, DEFAULT_MAX_ORDER).expect("microimage group is finite")
    }

    /// The `2^m` coordinate sign flips.
    pub fn sign_inversion(m: usize) -> Self {
        let gens = (0..m)
            .map(|i| {
                let mut rows = RatMatrix::identity(m).rows();
                rows[i][i] = int(-1);
                GroupElement::named(RatMatrix::from_rows(rows).unwrap(), format!("n{}", i + 1))
            })
            .collect();
        close_group(m, gens, DEFAULT_MAX_ORDER).expect("sign flips generate a finite group")
    }

    pub fn trivial(m: usize) -> Self {
        close_group(m, Vec::new(), DEFAULT_MAX_ORDER).expect("trivial group")
    }

    /// Resolves `microimage`, `trivial`, `trivial(m)` or `sign_inversion(m)`.
    /// `default_dim` is used for `trivial` without an argument.
    pub fn builtin(name: &str, default_dim: usize) -> Result<Self, GroupError> {
        let name = name.trim();
        let (head, arg) = match name.split_once('(') {
            Some((h, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| GroupError::UnknownBuiltin(name.to_string()))?;
                let m: usize = inner
                    .trim()
                    .parse()
                    .map_err(|_| GroupError::UnknownBuiltin(name.to_string()))?;
                if m == 0 {
                    return Err(GroupError::UnknownBuiltin(name.to_string()));
                }
                (h.trim(), Some(m))
            }
            None => (name, None),
        };
        match (head, arg) {
            ("microimage", None) => Ok(Self::microimage()),
            ("trivial", m) => Ok(Self::trivial(m.unwrap_or(default_dim))),
            ("sign_inversion", Some(m)) => Ok(Self::sign_inversion(m)),
            _ => Err(GroupError::UnknownBuiltin(name.to_string())),
        }
    }

    pub fn from_file(path: &Path, max_order: usize) -> Result<Self, GroupError> {
        let text = std::fs::read_to_string(path)?;
        let file: GroupFile =
            serde_json::from_str(&text).map_err(|e| GroupError::BadSpec(e.to_string()))?;
        file.build(max_order)
    }
}

/// On-disk group description. Entries are integers or `"p/q"` strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupFile {
    pub dimension: usize,
    pub generators: Vec<Vec<Vec<serde_json::Value>>>,
    #[serde(default)]
    pub names: Vec<String>,
}

impl GroupFile {
    pub fn build(&self, max_order: usize) -> Result<GroupSpec, GroupError> {
        let mut gens = Vec::with_capacity(self.generators.len());
        for (gi, rows) in self.generators.iter().enumerate() {
            let parsed = rows
                .iter()
                .map(|row| row.iter().map(entry_to_rational).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            if parsed.len() != self.dimension || parsed.iter().any(|r| r.len() != self.dimension) {
                return Err(GroupError::DimensionMismatch {
                    index: gi,
                    expected: self.dimension,
                    got: parsed.len(),
                });
            }
            let matrix = RatMatrix::from_rows(parsed)
                .ok_or_else(|| GroupError::BadSpec(format!("generator {gi} is not square")))?;
            gens.push(GroupElement {
                matrix,
                label: self.names.get(gi).cloned(),
            });
        }
        close_group(self.dimension, gens, max_order)
    }
}

fn entry_to_rational(v: &serde_json::Value) -> Result<Rational, GroupError> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(int)
            .ok_or_else(|| GroupError::BadSpec(format!("non-integer numeric entry {n}; use \"p/q\""))),
        serde_json::Value::String(s) => {
            parse_rational(s).ok_or_else(|| GroupError::BadSpec(format!("bad rational `{s}`")))
        }
        other => Err(GroupError::BadSpec(format!("bad matrix entry {other}"))),
    }
}
