//! Text form of homogeneous polynomials, e.g. `2*z*t + w^2` or `(z+w)(z-it)`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::homog::HomogPoly3;
use crate::error::{Error, Result};

type Sparse = BTreeMap<(usize, usize, usize), Complex64>;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn err(pos: usize, msg: &str) -> Error {
    Error::InvalidArgument(format!("polynomial syntax at offset {pos}: {msg}"))
}

fn constant(c: Complex64) -> Sparse {
    let mut m = Sparse::new();
    m.insert((0, 0, 0), c);
    m
}

fn mul(a: &Sparse, b: &Sparse) -> Sparse {
    let mut out = Sparse::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            *out.entry((ea.0 + eb.0, ea.1 + eb.1, ea.2 + eb.2))
                .or_insert(Complex64::new(0.0, 0.0)) += ca * cb;
        }
    }
    out
}

fn add(a: &mut Sparse, b: &Sparse, sign: f64) {
    for (e, c) in b {
        *a.entry(*e).or_insert(Complex64::new(0.0, 0.0)) += c * sign;
    }
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Sparse> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                let t = self.term()?;
                let mut z = Sparse::new();
                add(&mut z, &t, -1.0);
                z
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            add(&mut acc, &t, if c == b'+' { 1.0 } else { -1.0 });
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Sparse> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = mul(&acc, &self.power()?);
                }
                Some(c) if c == b'(' || c.is_ascii_alphanumeric() || c == b'.' => {
                    acc = mul(&acc, &self.power()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Sparse> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let e: usize = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| err(start, "expected an exponent"))?;
            let mut out = constant(Complex64::new(1.0, 0.0));
            for _ in 0..e {
                out = mul(&out, &base);
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Sparse> {
        let pos = self.pos;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(err(self.pos, "expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_digit()
                        || self.src[self.pos] == b'.'
                        || self.src[self.pos] == b'e'
                            && self
                                .src
                                .get(self.pos + 1)
                                .is_some_and(|n| n.is_ascii_digit() || *n == b'-'))
                {
                    if self.src[self.pos] == b'e' && self.src.get(self.pos + 1) == Some(&b'-') {
                        self.pos += 1;
                    }
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let x: f64 = s.parse().map_err(|_| err(start, "bad number"))?;
                if self.src.get(self.pos) == Some(&b'i') {
                    self.pos += 1;
                    return Ok(constant(Complex64::new(0.0, x)));
                }
                Ok(constant(Complex64::new(x, 0.0)))
            }
            Some(c) => {
                self.pos += 1;
                let mut m = Sparse::new();
                let one = Complex64::new(1.0, 0.0);
                match c {
                    b'z' => m.insert((1, 0, 0), one),
                    b'w' => m.insert((0, 1, 0), one),
                    b't' => m.insert((0, 0, 1), one),
                    b'i' => m.insert((0, 0, 0), Complex64::new(0.0, 1.0)),
                    _ => return Err(err(pos, &format!("unexpected '{}'", c as char))),
                };
                Ok(m)
            }
            None => Err(err(pos, "unexpected end of input")),
        }
    }
}

impl HomogPoly3 {
    /// Parses sums of products of numbers, `i`, the variables `z`, `w`, `t`,
    /// parentheses and integer powers. The result must be homogeneous.
    pub fn parse(s: &str) -> Result<Self> {
        let mut p = Parser {
            src: s.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        if p.peek().is_some() {
            return Err(err(p.pos, "trailing input"));
        }
        let terms: Vec<_> = e.into_iter().filter(|(_, c)| *c != Complex64::new(0.0, 0.0)).collect();
        let degree = match terms.first() {
            Some(((i, j, k), _)) => i + j + k,
            None => return Err(Error::InvalidArgument("polynomial is identically zero".into())),
        };
        if terms.iter().any(|((i, j, k), _)| i + j + k != degree) {
            return Err(Error::InvalidArgument(format!("'{s}' is not homogeneous")));
        }
        HomogPoly3::from_terms(degree, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_example_map_component() {
        let p = HomogPoly3::parse("2*z*t + w^2").unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(p.coeff(1, 0, 1), Complex64::new(2.0, 0.0));
        assert_eq!(p.coeff(0, 2, 0), Complex64::new(1.0, 0.0));
        assert_eq!(p.coeff(2, 0, 0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn implicit_products_and_complex() {
        let p = HomogPoly3::parse("(z+w+2t)(z-w+t)").unwrap();
        assert_eq!(p.coeff(0, 0, 2), Complex64::new(2.0, 0.0));
        assert_eq!(p.coeff(1, 0, 1), Complex64::new(3.0, 0.0));
        let q = HomogPoly3::parse("-0.5i z^2 + 1e-3 w t").unwrap();
        assert_eq!(q.coeff(2, 0, 0), Complex64::new(0.0, -0.5));
        assert_eq!(q.coeff(0, 1, 1), Complex64::new(1e-3, 0.0));
    }

    #[test]
    fn rejects_inhomogeneous() {
        assert!(HomogPoly3::parse("z^2 + w").is_err());
        assert!(HomogPoly3::parse("z + x").is_err());
        assert!(HomogPoly3::parse("z - z").is_err());
    }
}
