//! Generating sets of invariant polynomials.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::GroupSpec;
use crate::poly::{parse_poly, parse_poly_with_prefix, ParseError, PolyExpr};

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("generator {index}: {source}")]
    Parse { index: usize, source: ParseError },
    #[error("relation: {0}")]
    RelationParse(ParseError),
    #[error("polynomial in {got} variables used with a group of dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty generator set")]
    Empty,
    #[error("invalid generator file: {0}")]
    BadFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Polynomials `f_1..f_N` in `x_1..x_m`, with an optional relation
/// `q(y_1..y_N)` satisfying `q(f_1..f_N) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    polys: Vec<PolyExpr>,
    relation: Option<PolyExpr>,
    symbol: String,
}

impl GeneratorSet {
    pub fn new(polys: Vec<PolyExpr>, relation: Option<PolyExpr>) -> Result<Self, GeneratorError> {
        let m = polys.first().ok_or(GeneratorError::Empty)?.nvars();
        if let Some(p) = polys.iter().find(|p| p.nvars() != m) {
            return Err(GeneratorError::DimensionMismatch {
                expected: m,
                got: p.nvars(),
            });
        }
        if let Some(q) = &relation {
            if q.nvars() != polys.len() {
                return Err(GeneratorError::DimensionMismatch {
                    expected: polys.len(),
                    got: q.nvars(),
                });
            }
        }
        Ok(Self {
            polys,
            relation,
            symbol: "f".into(),
        })
    }

    /// Parses generator strings over `x1..xm` and an optional relation over
    /// `y1..yN`.
    pub fn parse(m: usize, generators: &[&str], relation: Option<&str>) -> Result<Self, GeneratorError> {
        let polys = generators
            .iter()
            .enumerate()
            .map(|(index, s)| parse_poly(s, m).map_err(|source| GeneratorError::Parse { index, source }))
            .collect::<Result<Vec<_>, _>>()?;
        let relation = relation
            .map(|q| parse_poly_with_prefix(q, generators.len(), "y").map_err(GeneratorError::RelationParse))
            .transpose()?;
        Self::new(polys, relation)
    }

    /// The five fundamental invariants of the 2x2 microimage group and their
    /// single defining relation.
    pub fn microimage() -> Self {
        let gens = [
            "(x1 + x3)*(x2 + x4)",
            "x1*x3 + x2*x4",
            "x1^2 + x2^2 + x3^2 + x4^2",
            "x1*x2*x3*x4",
            "(x1^2 + x3^2)*(x2^2 + x4^2)",
        ];
        // variables y1..y5 stand for f1..f5 in the order above
        let q = "4*y2^2*y5 + 8*y2*y3*y4 + 2*y2*y3*y5 - 2*y1^2*y2*y3 + 16*y4^2 - 8*y4*y5 \
                 - 8*y1^2*y4 + 4*y3^2*y4 + y5^2 - 2*y1^2*y5 + y1^4";
        Self::parse(4, &gens, Some(q)).expect("builtin generators parse")
    }

    /// `{x_i²}`: generators for the coordinate sign-flip group.
    pub fn sign_inversion(m: usize) -> Self {
        let polys = (0..m).map(|i| PolyExpr::var(m, i).pow(2)).collect();
        Self::new(polys, None).expect("m >= 1")
    }

    /// The coordinates `x_1..x_m`, generators for the trivial group.
    pub fn coordinates(m: usize) -> Self {
        let polys = (0..m).map(|i| PolyExpr::var(m, i)).collect();
        let mut s = Self::new(polys, None).expect("m >= 1");
        s.symbol = "x".into();
        s
    }

    pub fn from_file(path: &Path) -> Result<Self, GeneratorError> {
        let text = std::fs::read_to_string(path)?;
        let file: GeneratorFile =
            serde_json::from_str(&text).map_err(|e| GeneratorError::BadFile(e.to_string()))?;
        file.build()
    }

    /// Resolves `microimage`, `sign_inversion(m)` or `coordinates(m)`.
    pub fn builtin(name: &str) -> Option<Self> {
        let name = name.trim();
        if name == "microimage" {
            return Some(Self::microimage());
        }
        let (head, rest) = name.split_once('(')?;
        let m: usize = rest.strip_suffix(')')?.trim().parse().ok()?;
        if m == 0 {
            return None;
        }
        match head.trim() {
            "sign_inversion" => Some(Self::sign_inversion(m)),
            "coordinates" => Some(Self::coordinates(m)),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// Number of underlying variables `m`.
    pub fn nvars(&self) -> usize {
        self.polys[0].nvars()
    }

    pub fn polys(&self) -> &[PolyExpr] {
        &self.polys
    }

    pub fn relation(&self) -> Option<&PolyExpr> {
        self.relation.as_ref()
    }

    /// Display symbol for monomials in these generators (`f` or `x`).
    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    /// Symbolic `q(f_1..f_N)`; `None` without a relation.
    pub fn relation_composed(&self) -> Option<PolyExpr> {
        self.relation.as_ref().map(|q| q.compose(&self.polys))
    }

    pub fn to_file(&self) -> GeneratorFile {
        GeneratorFile {
            m: self.nvars(),
            generators: self.polys.iter().map(|p| p.to_string()).collect(),
            relation_q: self.relation.as_ref().map(|q| q.to_string_with("y")),
        }
    }
}

/// Is `p` fixed by every generator of `group`?
pub fn check_invariance(p: &PolyExpr, group: &GroupSpec) -> Result<bool, GeneratorError> {
    if p.nvars() != group.dimension() {
        return Err(GeneratorError::DimensionMismatch {
            expected: group.dimension(),
            got: p.nvars(),
        });
    }
    // (g p)(x) = p(g⁻¹ x); checking the generators suffices
    Ok(group
        .generator_inverses()
        .iter()
        .all(|ginv| p.linear_substitute(ginv) == *p))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorFile {
    pub m: usize,
    pub generators: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation_q: Option<String>,
}

impl GeneratorFile {
    pub fn build(&self) -> Result<GeneratorSet, GeneratorError> {
        let gens: Vec<&str> = self.generators.iter().map(String::as_str).collect();
        GeneratorSet::parse(self.m, &gens, self.relation_q.as_deref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn microimage_set_is_certified() {
        let gens = GeneratorSet::microimage();
        assert_eq!(gens.len(), 5);
        let g = GroupSpec::microimage();
        for f in gens.polys() {
            assert!(check_invariance(f, &g).unwrap());
        }
        assert!(gens.relation_composed().unwrap().is_zero());
    }

    #[test]
    fn coordinate_is_not_invariant() {
        let g = GroupSpec::microimage();
        assert!(!check_invariance(&PolyExpr::var(4, 0), &g).unwrap());
        assert!(check_invariance(&PolyExpr::one(4), &g).unwrap());
        assert!(check_invariance(&PolyExpr::one(3), &g).is_err());
    }

    #[test]
    fn sign_inversion_set() {
        let s = GeneratorSet::sign_inversion(1);
        assert_eq!(s.polys()[0].to_string(), "x1^2");
        let s3 = GeneratorSet::sign_inversion(3);
        let g = GroupSpec::sign_inversion(3);
        assert_eq!(s3.len(), 3);
        assert!(s3.relation().is_none());
        assert!(s3.polys().iter().all(|f| check_invariance(f, &g).unwrap()));
    }

    #[test]
    fn file_roundtrip() {
        let gens = GeneratorSet::microimage();
        let file = gens.to_file();
        let json = serde_json::to_string(&file).unwrap();
        let back: GeneratorFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.build().unwrap(), gens);
    }

    #[test]
    fn rejects_mixed_dimensions() {
        let err = GeneratorSet::new(vec![PolyExpr::var(2, 0), PolyExpr::var(3, 0)], None).unwrap_err();
        assert!(matches!(err, GeneratorError::DimensionMismatch { expected: 2, got: 3 }));
    }
}
