//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' integer)?
//! atom  := integer | variable | '(' expr ')'
//! ```
//!
//! Division is only allowed by nonzero constants.

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::PolyExpr;
use crate::rational::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown variable `{name}` at position {position}")]
    UnknownVariable { name: String, position: usize },
}

pub fn parse_poly(text: &str, nvars: usize) -> Result<PolyExpr, ParseError> {
    parse_poly_with_prefix(text, nvars, "x")
}

/// Parses with variables named `{prefix}1 .. {prefix}nvars`.
pub fn parse_poly_with_prefix(text: &str, nvars: usize, prefix: &str) -> Result<PolyExpr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        nvars,
        prefix,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
    prefix: &'a str,
}

impl Parser<'_> {
    fn err(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<PolyExpr, ParseError> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == b'+' { acc.add(&rhs) } else { acc.sub(&rhs) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<PolyExpr, ParseError> {
        let mut acc = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            let at = self.pos;
            self.pos += 1;
            let rhs = self.unary()?;
            if c == b'*' {
                acc = acc.mul(&rhs);
            } else {
                match rhs.as_constant() {
                    Some(d) if !d.is_zero() => acc = acc.scale(&(Rational::from_integer(1.into()) / d)),
                    Some(_) => {
                        return Err(ParseError::Syntax {
                            position: at,
                            message: "division by zero".into(),
                        })
                    }
                    None => {
                        return Err(ParseError::Syntax {
                            position: at,
                            message: "division by a non-constant".into(),
                        })
                    }
                }
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<PolyExpr, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<PolyExpr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            let digits = self.digits();
            if digits.is_empty() {
                return Err(self.err("expected a nonnegative integer exponent"));
            }
            let exp: u32 = digits.parse().map_err(|_| ParseError::Syntax {
                position: start,
                message: "exponent too large".into(),
            })?;
            return Ok(base.pow(exp));
        }
        Ok(base)
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<PolyExpr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let d = self.digits();
                let n: BigInt = d.parse().expect("digits");
                Ok(PolyExpr::constant(self.nvars, Rational::from_integer(n)))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
                    self.pos += 1;
                }
                let name = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
                let idx = self.digits();
                let full = format!("{name}{idx}");
                let unknown = || ParseError::UnknownVariable {
                    name: full.clone(),
                    position: start,
                };
                if name != self.prefix || idx.is_empty() {
                    return Err(unknown());
                }
                let i: usize = idx.parse().map_err(|_| unknown())?;
                if i == 0 || i > self.nvars {
                    return Err(unknown());
                }
                Ok(PolyExpr::var(self.nvars, i - 1))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syntax_errors_carry_position() {
        assert_eq!(
            parse_poly("x1 + * x2", 2),
            Err(ParseError::Syntax {
                position: 5,
                message: "unexpected character".into()
            })
        );
        assert!(matches!(parse_poly("(x1", 1), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_poly("x1^", 1), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_poly("x1 x2", 2), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_poly("x1/x2", 2), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_poly("x1/0", 2), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_poly("", 2), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn unknown_variables() {
        assert_eq!(
            parse_poly("x1 + x5", 4),
            Err(ParseError::UnknownVariable {
                name: "x5".into(),
                position: 5
            })
        );
        assert!(matches!(parse_poly("z1", 4), Err(ParseError::UnknownVariable { .. })));
        assert!(matches!(parse_poly("x0", 4), Err(ParseError::UnknownVariable { .. })));
        assert!(matches!(parse_poly("x", 4), Err(ParseError::UnknownVariable { .. })));
    }

    #[test]
    fn precedence() {
        let a = parse_poly("-x1^2", 1).unwrap();
        assert_eq!(a, parse_poly("0 - (x1*x1)", 1).unwrap());
        let b = parse_poly("1/2*x1 + 2*x1", 1).unwrap();
        assert_eq!(b, parse_poly("5*x1/2", 1).unwrap());
    }
}
