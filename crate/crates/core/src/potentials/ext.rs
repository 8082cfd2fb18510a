//! Complex numbers with a separate binary exponent, for orbits whose
//! coordinates fall below the double range.

use num_complex::Complex64;

use crate::poly::HomogPoly3;

const LN2: f64 = std::f64::consts::LN_2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Ext {
    m: Complex64,
    e: i64,
}

impl Ext {
    pub const ZERO: Ext = Ext { m: Complex64 { re: 0.0, im: 0.0 }, e: 0 };

    pub fn new(m: Complex64) -> Self {
        Ext { m, e: 0 }.normalized()
    }

    fn normalized(self) -> Self {
        let a = self.m.re.abs().max(self.m.im.abs());
        if a == 0.0 || !a.is_finite() {
            return Ext { m: self.m, e: 0 };
        }
        let k = a.log2().floor() as i64 + 1;
        Ext { m: self.m * 2f64.powi(-k as i32), e: self.e + k }
    }

    pub fn is_zero(&self) -> bool {
        self.m.re == 0.0 && self.m.im == 0.0
    }

    pub fn mul(self, o: Ext) -> Ext {
        Ext { m: self.m * o.m, e: self.e + o.e }.normalized()
    }

    pub fn scale(self, c: Complex64) -> Ext {
        self.mul(Ext::new(c))
    }

    pub fn add(self, o: Ext) -> Ext {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let (hi, lo) = if self.e >= o.e { (self, o) } else { (o, self) };
        let gap = lo.e - hi.e;
        if gap < -1100 {
            return hi;
        }
        Ext { m: hi.m + lo.m * 2f64.powi(gap as i32), e: hi.e }.normalized()
    }

    /// `log |self|`, `-inf` at zero.
    pub fn ln_abs(&self) -> f64 {
        self.m.norm().ln() + self.e as f64 * LN2
    }

    /// Rescales by `2^-shift` and rounds into a plain complex number.
    pub fn to_complex_scaled(self, shift: i64) -> Complex64 {
        let k = self.e - shift;
        if k < -1100 {
            Complex64::new(0.0, 0.0)
        } else {
            self.m * 2f64.powi(k as i32)
        }
    }
}

/// Evaluates `h` at a point given in extended coordinates.
pub(crate) fn evaluate(h: &HomogPoly3, x: &[Ext; 3]) -> Ext {
    let d = h.degree();
    let pows: [Vec<Ext>; 3] = std::array::from_fn(|i| {
        let mut v = Vec::with_capacity(d + 1);
        let mut acc = Ext::new(Complex64::new(1.0, 0.0));
        for _ in 0..=d {
            v.push(acc);
            acc = acc.mul(x[i]);
        }
        v
    });
    h.terms().fold(Ext::ZERO, |acc, ((i, j, k), c)| {
        acc.add(pows[0][i].mul(pows[1][j]).mul(pows[2][k]).scale(c))
    })
}

/// Divides by the euclidean norm and returns its logarithm.
pub(crate) fn normalize(y: [Ext; 3]) -> ([Ext; 3], f64) {
    let top = y.iter().filter(|c| !c.is_zero()).map(|c| c.e).max().unwrap_or(0);
    let s = y
        .iter()
        .map(|c| c.to_complex_scaled(top).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let inv = Ext { m: Complex64::new(1.0 / s, 0.0), e: -top }.normalized();
    (y.map(|c| c.mul(inv)), s.ln() + top as f64 * LN2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survives_underflow() {
        let x = Ext::new(Complex64::new(1e-200, 0.0));
        let y = x.mul(x).mul(x);
        assert!((y.ln_abs() - 3.0 * (1e-200f64).ln()).abs() < 1e-9);
        let z = y.add(Ext::new(Complex64::new(2.0, 0.0)));
        assert!((z.ln_abs() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn evaluation_matches_plain() {
        let h = HomogPoly3::parse("z^2 + 3*w*t - t^2").unwrap();
        let x = [Complex64::new(0.3, 0.1), Complex64::new(-0.7, 0.2), Complex64::new(0.5, 0.0)];
        let e = evaluate(&h, &x.map(Ext::new));
        assert!((e.to_complex_scaled(0) - h.evaluate(&x)).norm() < 1e-14);
    }
}
