//! Sparse multivariate polynomials with exact rational coefficients.

mod parse;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::rational::{RatMatrix, Rational};

pub use parse::{parse_poly, parse_poly_with_prefix, ParseError};

/// Exponent vector of a monomial.
pub type Exponents = Vec<u32>;

/// Canonical sparse polynomial in `nvars` variables: merged terms, no zero
/// coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyExpr {
    nvars: usize,
    terms: BTreeMap<Exponents, Rational>,
}

impl PolyExpr {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    /// The variable `x_{i+1}` (zero-based `i`).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Rational::one());
        p
    }

    pub fn monomial(exponents: Exponents, coeff: Rational) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, coeff);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Constant value, if the polynomial is constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&x| x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    fn add_term(&mut self, exponents: Exponents, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(exponents).or_insert_with(Rational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, mut exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.nvars);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, x: &[Rational]) -> Option<Rational> {
        if x.len() != self.nvars {
            return None;
        }
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(xi.clone(), k as usize);
                }
            }
            total += t;
        }
        Some(total)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                crate::rational::to_f64(c)
                    * x.iter().zip(e).map(|(xi, &k)| xi.powi(k as i32)).product::<f64>()
            })
            .sum()
    }

    /// Substitutes `subs[i]` for variable `i`; all substitutes must share
    /// one variable count, which becomes the result's.
    pub fn compose(&self, subs: &[PolyExpr]) -> Self {
        assert_eq!(subs.len(), self.nvars, "one substitute per variable");
        let out_vars = subs.first().map(|p| p.nvars).unwrap_or(0);
        let mut cache: BTreeMap<(usize, u32), PolyExpr> = BTreeMap::new();
        let mut out = Self::zero(out_vars);
        for (e, c) in &self.terms {
            let mut t = Self::constant(out_vars, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let f = cache
                    .entry((i, k))
                    .or_insert_with(|| subs[i].pow(k))
                    .clone();
                t = t.mul(&f);
            }
            out = out.add(&t);
        }
        out
    }

    /// `p(M x)`: substitutes the linear forms given by the rows of `m`.
    pub fn linear_substitute(&self, m: &RatMatrix) -> Self {
        assert_eq!(m.dim(), self.nvars);
        let n = self.nvars;
        let forms: Vec<PolyExpr> = (0..n)
            .map(|i| {
                let mut f = Self::zero(n);
                for j in 0..n {
                    f.add_term(
                        {
                            let mut e = vec![0; n];
                            e[j] = 1;
                            e
                        },
                        m.get(i, j).clone(),
                    );
                }
                f
            })
            .collect();
        self.compose(&forms)
    }

    /// Formats with variables `{prefix}1 .. {prefix}n`.
    pub fn to_string_with(&self, prefix: &str) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        // highest graded terms first
        let mut keys: Vec<&Exponents> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (idx, e) in keys.into_iter().enumerate() {
            let c = &self.terms[e];
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("{prefix}{}", i + 1)
                    } else {
                        format!("{prefix}{}^{k}", i + 1)
                    }
                })
                .collect();
            if vars.is_empty() {
                out.push_str(&abs.to_string());
            } else {
                if !abs.is_one() {
                    out.push_str(&abs.to_string());
                    out.push('*');
                }
                out.push_str(&vars.join("*"));
            }
        }
        out
    }
}

impl fmt::Display for PolyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_with("x"))
    }
}

impl fmt::Debug for PolyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyExpr({})", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn product_expands() {
        let p = parse_poly("(x1+x3)*(x2+x4)", 4).unwrap();
        let expected = parse_poly("x1*x2 + x1*x4 + x2*x3 + x3*x4", 4).unwrap();
        assert_eq!(p, expected);
        assert_eq!(p.num_terms(), 4);
    }

    #[test]
    fn cancellation_leaves_constant() {
        let p = parse_poly("x1^2 - x1^2 + 3", 1).unwrap();
        assert_eq!(p.as_constant(), Some(int(3)));
        assert!(parse_poly("0", 3).unwrap().is_zero());
    }

    #[test]
    fn eval_examples() {
        let f3 = parse_poly("x1^2+x2^2+x3^2+x4^2", 4).unwrap();
        let p = vec![ratio(3, 2); 4];
        assert_eq!(f3.eval(&p), Some(int(9)));
        let f1 = parse_poly("(x1+x3)*(x2+x4)", 4).unwrap();
        let q = vec![ratio(1, 2), ratio(-1, 2), ratio(1, 2), ratio(-1, 2)];
        assert_eq!(f1.eval(&q), Some(int(-1)));
        let f4 = parse_poly("x1*x2*x3*x4", 4).unwrap();
        assert_eq!(f4.eval(&[int(0), int(5), int(7), int(1)]), Some(int(0)));
        assert_eq!(f4.eval(&[int(0)]), None);
    }

    #[test]
    fn display_roundtrip() {
        let p = parse_poly("-3/2*x1^2*x2 + x3 - 7 + 1/3*x2", 3).unwrap();
        let printed = p.to_string();
        assert_eq!(parse_poly(&printed, 3).unwrap(), p);
    }

    #[test]
    fn compose_and_substitute() {
        let q = parse_poly_with_prefix("y1^2 - y2", 2, "y").unwrap();
        let f1 = parse_poly("x1 + x2", 2).unwrap();
        let f2 = parse_poly("x1^2 + 2*x1*x2 + x2^2", 2).unwrap();
        assert!(q.compose(&[f1, f2]).is_zero());

        let swap = RatMatrix::from_i64(&[&[0, 1], &[1, 0]]).unwrap();
        let p = parse_poly("x1^2 + 3*x2", 2).unwrap();
        assert_eq!(p.linear_substitute(&swap), parse_poly("x2^2 + 3*x1", 2).unwrap());
    }

    #[test]
    fn pow_matches_repeated_mul() {
        let p = parse_poly("x1 - 2*x2 + 1", 2).unwrap();
        assert_eq!(p.pow(3), p.mul(&p).mul(&p));
        assert_eq!(p.pow(0), PolyExpr::one(2));
    }
}
