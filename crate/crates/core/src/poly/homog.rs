//! Dense homogeneous polynomials in three variables `(z, w, t)`.
//!
//! Coefficients are stored in graded lexicographic order with `z > w > t`:
//! for degree `d` the exponent triples run `(d,0,0), (d-1,1,0), (d-1,0,1),
//! (d-2,2,0), ...`, i.e. `i` descending and, for fixed `i`, `j` descending.

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::series::TrackedSeries;
use super::univariate::UnivariatePoly;
use crate::error::{Error, Result};

/// Number of monomials of degree `d` in three variables.
pub fn monomial_count(d: usize) -> usize {
    (d + 1) * (d + 2) / 2
}

/// Position of `z^i w^j t^(d-i-j)` in the graded-lex coefficient array.
#[inline]
pub fn monomial_index(d: usize, i: usize, j: usize) -> usize {
    debug_assert!(i + j <= d);
    let a = d - i;
    a * (a + 1) / 2 + (a - j)
}

/// Iterator over exponent triples of degree `d` in storage order.
pub fn exponents(d: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..=d)
        .rev()
        .flat_map(move |i| (0..=d - i).rev().map(move |j| (i, j, d - i - j)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogPoly3 {
    degree: usize,
    coeffs: Vec<Complex64>,
    coeff_norm: f64,
}

impl HomogPoly3 {
    pub fn new(degree: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != monomial_count(degree) {
            return Err(Error::InvalidArgument(format!(
                "degree {degree} needs {} coefficients, got {}",
                monomial_count(degree),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(Self::from_vec(degree, coeffs))
    }

    fn from_vec(degree: usize, coeffs: Vec<Complex64>) -> Self {
        let coeff_norm = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        HomogPoly3 {
            degree,
            coeffs,
            coeff_norm,
        }
    }

    pub fn zero(degree: usize) -> Self {
        Self::from_vec(degree, vec![Complex64::zero(); monomial_count(degree)])
    }

    pub fn monomial(i: usize, j: usize, k: usize, c: Complex64) -> Self {
        let d = i + j + k;
        let mut coeffs = vec![Complex64::zero(); monomial_count(d)];
        coeffs[monomial_index(d, i, j)] = c;
        Self::from_vec(d, coeffs)
    }

    /// Builds a polynomial from `((i, j, k), coefficient)` terms; repeated
    /// exponents are summed.
    pub fn from_terms<I>(degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((usize, usize, usize), Complex64)>,
    {
        let mut coeffs = vec![Complex64::zero(); monomial_count(degree)];
        for ((i, j, k), c) in terms {
            if i + j + k != degree {
                return Err(Error::InvalidArgument(format!(
                    "exponent ({i},{j},{k}) does not have degree {degree}"
                )));
            }
            coeffs[monomial_index(degree, i, j)] += c;
        }
        Self::new(degree, coeffs)
    }

    /// The linear form `a z + b w + c t`.
    pub fn linear(a: Complex64, b: Complex64, c: Complex64) -> Self {
        Self::from_vec(1, vec![a, b, c])
    }

    /// The coordinate function `x_var` (0 = z, 1 = w, 2 = t).
    pub fn variable(var: usize) -> Self {
        let mut c = [Complex64::zero(); 3];
        c[var] = Complex64::new(1.0, 0.0);
        Self::linear(c[0], c[1], c[2])
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Maximum coefficient magnitude.
    pub fn coeff_norm(&self) -> f64 {
        self.coeff_norm
    }

    pub fn coeff(&self, i: usize, j: usize, k: usize) -> Complex64 {
        if i + j + k != self.degree {
            return Complex64::zero();
        }
        self.coeffs[monomial_index(self.degree, i, j)]
    }

    pub fn is_zero(&self) -> bool {
        self.coeff_norm == 0.0
    }

    /// Nonzero terms in storage order.
    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize, usize), Complex64)> + '_ {
        exponents(self.degree)
            .zip(self.coeffs.iter().copied())
            .filter(|(_, c)| !c.is_zero())
    }

    /// Evaluates at `x`, Horner in `z` with tabulated powers of `w` and `t`.
    pub fn evaluate(&self, x: &[Complex64; 3]) -> Complex64 {
        let d = self.degree;
        let mut pw = Vec::with_capacity(d + 1);
        let mut pt = Vec::with_capacity(d + 1);
        let (mut a, mut b) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        for _ in 0..=d {
            pw.push(a);
            pt.push(b);
            a *= x[1];
            b *= x[2];
        }
        let mut acc = Complex64::zero();
        for i in (0..=d).rev() {
            let m = d - i;
            let mut inner = Complex64::zero();
            for j in 0..=m {
                let c = self.coeffs[monomial_index(d, i, j)];
                if !c.is_zero() {
                    inner += c * pw[j] * pt[m - j];
                }
            }
            acc = acc * x[0] + inner;
        }
        acc
    }

    /// Sum of `|c| * |x|^alpha`, the rounding-error scale of [`Self::evaluate`].
    pub fn evaluate_abs(&self, x: &[Complex64; 3]) -> f64 {
        let ax = [x[0].norm(), x[1].norm(), x[2].norm()];
        self.terms()
            .map(|((i, j, k), c)| {
                c.norm() * ax[0].powi(i as i32) * ax[1].powi(j as i32) * ax[2].powi(k as i32)
            })
            .sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_vec(self.degree, self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Rescales so that the largest coefficient has magnitude one.
    pub fn normalized(&self) -> Self {
        if self.coeff_norm == 0.0 {
            return self.clone();
        }
        self.scale(Complex64::new(1.0 / self.coeff_norm, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_degree(other)?;
        Ok(Self::from_vec(
            self.degree,
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_degree(other)?;
        Ok(Self::from_vec(
            self.degree,
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    fn check_same_degree(&self, other: &Self) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::InvalidArgument(format!(
                "degree mismatch {} vs {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d = self.degree + other.degree;
        let mut out = vec![Complex64::zero(); monomial_count(d)];
        for ((i1, j1, _), a) in self.terms() {
            for ((i2, j2, _), b) in other.terms() {
                out[monomial_index(d, i1 + i2, j1 + j2)] += a * b;
            }
        }
        Self::from_vec(d, out)
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = Self::from_vec(0, vec![Complex64::new(1.0, 0.0)]);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Partial derivative with respect to variable `var`.
    pub fn partial(&self, var: usize) -> Self {
        if self.degree == 0 {
            return Self::zero(0);
        }
        let d = self.degree - 1;
        let mut out = vec![Complex64::zero(); monomial_count(d)];
        for ((i, j, k), c) in self.terms() {
            let e = [i, j, k];
            if e[var] == 0 {
                continue;
            }
            let mut f = e;
            f[var] -= 1;
            out[monomial_index(d, f[0], f[1])] += c * e[var] as f64;
        }
        Self::from_vec(d, out)
    }

    /// Substitutes `(z, w, t) -> (subs[0], subs[1], subs[2])`; the substitutes
    /// must share a common degree `e`, giving a result of degree `d * e`.
    pub fn compose(&self, subs: &[HomogPoly3; 3]) -> Result<Self> {
        let e = subs[0].degree;
        if subs.iter().any(|s| s.degree != e) {
            return Err(Error::InvalidArgument(
                "substituted polynomials must share a degree".into(),
            ));
        }
        let d = self.degree;
        let powers: Vec<Vec<HomogPoly3>> = subs
            .iter()
            .map(|s| {
                let mut v = Vec::with_capacity(d + 1);
                v.push(Self::from_vec(0, vec![Complex64::new(1.0, 0.0)]));
                for k in 1..=d {
                    let next = v[k - 1].mul(s);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Self::zero(d * e);
        for ((i, j, k), c) in self.terms() {
            let term = powers[0][i].mul(&powers[1][j]).mul(&powers[2][k]).scale(c);
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Restriction to the affine line `s -> a + s b`.
    pub fn restrict_to_line(&self, a: &[Complex64; 3], b: &[Complex64; 3]) -> UnivariatePoly {
        let lines: Vec<UnivariatePoly> = (0..3)
            .map(|v| UnivariatePoly::from_coeffs(vec![a[v], b[v]]))
            .collect();
        let d = self.degree;
        let pows: Vec<Vec<UnivariatePoly>> = lines
            .iter()
            .map(|l| {
                let mut v = vec![UnivariatePoly::constant(Complex64::new(1.0, 0.0))];
                for k in 1..=d {
                    let next = v[k - 1].mul(l);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = vec![Complex64::zero(); d + 1];
        for ((i, j, k), c) in self.terms() {
            let t = pows[0][i].mul(&pows[1][j]).mul(&pows[2][k]);
            for (n, x) in t.coeffs().iter().enumerate() {
                acc[n] += c * x;
            }
        }
        UnivariatePoly::from_coeffs(acc)
    }

    /// Evaluates on a triple of tracked series (used for local expansions).
    pub fn evaluate_series(&self, xs: &[TrackedSeries; 3]) -> TrackedSeries {
        let d = self.degree;
        let t = xs[0].truncation();
        let powers: Vec<Vec<TrackedSeries>> = xs
            .iter()
            .map(|s| {
                let mut v = Vec::with_capacity(d + 1);
                v.push(TrackedSeries::constant(t, Complex64::new(1.0, 0.0)));
                for k in 1..=d {
                    let next = v[k - 1].mul(s);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = TrackedSeries::zero(t);
        for ((i, j, k), c) in self.terms() {
            let term = powers[0][i].mul(&powers[1][j]).mul(&powers[2][k]);
            acc.add_scaled_assign(&term, c);
        }
        acc
    }

    /// Gradient `(dp/dz, dp/dw, dp/dt)`.
    pub fn gradient(&self) -> [HomogPoly3; 3] {
        [self.partial(0), self.partial(1), self.partial(2)]
    }
}

/// Determinant of the 3x3 Jacobian matrix of the lift `(f0, f1, f2)`.
pub fn jacobian_determinant(f: &[HomogPoly3; 3]) -> HomogPoly3 {
    let g: Vec<[HomogPoly3; 3]> = f.iter().map(|p| p.gradient()).collect();
    let m = |r: usize, c: usize| &g[r][c];
    let minor = |r1: usize, r2: usize, c1: usize, c2: usize| -> HomogPoly3 {
        m(r1, c1)
            .mul(m(r2, c2))
            .sub(&m(r1, c2).mul(m(r2, c1)))
            .expect("equal degrees")
    };
    let t0 = m(0, 0).mul(&minor(1, 2, 1, 2));
    let t1 = m(0, 1).mul(&minor(1, 2, 0, 2));
    let t2 = m(0, 2).mul(&minor(1, 2, 0, 1));
    t0.sub(&t1)
        .and_then(|x| x.add(&t2))
        .expect("equal degrees")
}

/// Name of coordinate `var` (0 = z, 1 = w, 2 = t).
pub fn variable_name(var: usize) -> &'static str {
    ["z", "w", "t"][var]
}

impl std::fmt::Display for HomogPoly3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for ((i, j, k), c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            for (v, e) in [i, j, k].into_iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*{}", variable_name(v))?,
                    _ => write!(f, "*{}^{}", variable_name(v), e)?,
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn index_matches_enumeration() {
        for d in 0..6 {
            for (n, (i, j, _)) in exponents(d).enumerate() {
                assert_eq!(monomial_index(d, i, j), n);
            }
            assert_eq!(exponents(d).count(), monomial_count(d));
        }
    }

    #[test]
    fn evaluate_monomial_z2w() {
        let p = HomogPoly3::monomial(2, 1, 0, c(1.0));
        let v = p.evaluate(&[c(2.0), c(3.0), c(1.0)]);
        assert_eq!(v, c(12.0));
    }

    #[test]
    fn evaluate_origin_is_zero() {
        let p = HomogPoly3::from_terms(2, [((2, 0, 0), c(3.0)), ((0, 1, 1), c(-1.5))]).unwrap();
        assert_eq!(p.evaluate(&[Complex64::zero(); 3]), Complex64::zero());
    }

    #[test]
    fn evaluate_sum_of_squares_on_isotropic_point() {
        let p = HomogPoly3::from_terms(
            2,
            [((2, 0, 0), c(1.0)), ((0, 2, 0), c(1.0)), ((0, 0, 2), c(1.0))],
        )
        .unwrap();
        let v = p.evaluate(&[c(1.0), Complex64::i(), c(0.0)]);
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn from_terms_rejects_wrong_degree() {
        assert!(HomogPoly3::from_terms(2, [((1, 1, 1), c(1.0))]).is_err());
    }

    #[test]
    fn partial_and_jacobian_of_power_map() {
        let f = [
            HomogPoly3::monomial(2, 0, 0, c(1.0)),
            HomogPoly3::monomial(0, 2, 0, c(1.0)),
            HomogPoly3::monomial(0, 0, 2, c(1.0)),
        ];
        let j = jacobian_determinant(&f);
        assert_eq!(j.degree(), 3);
        assert_eq!(j.coeff(1, 1, 1), c(8.0));
        assert!(j.coeffs().iter().filter(|x| !x.is_zero()).count() == 1);
    }

    #[test]
    fn compose_with_linear_substitution() {
        // (z + w)^2 composed with z -> t, w -> z gives (t + z)^2
        let p = HomogPoly3::linear(c(1.0), c(1.0), c(0.0)).pow(2);
        let subs = [HomogPoly3::variable(2), HomogPoly3::variable(0), HomogPoly3::variable(1)];
        let q = p.compose(&subs).unwrap();
        assert_eq!(q.coeff(2, 0, 0), c(1.0));
        assert_eq!(q.coeff(1, 0, 1), c(2.0));
        assert_eq!(q.coeff(0, 0, 2), c(1.0));
    }

    #[test]
    fn restriction_to_line_matches_evaluation() {
        let p = HomogPoly3::from_terms(
            3,
            [((3, 0, 0), c(1.0)), ((1, 1, 1), Complex64::new(0.5, -2.0)), ((0, 0, 3), c(-4.0))],
        )
        .unwrap();
        let a = [c(0.3), Complex64::new(0.1, 0.7), c(-1.0)];
        let b = [c(1.0), c(-0.4), Complex64::new(0.2, 0.2)];
        let u = p.restrict_to_line(&a, &b);
        for s in [c(0.0), c(1.3), Complex64::new(-0.5, 0.9)] {
            let x = [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
            assert!((u.evaluate(s) - p.evaluate(&x)).norm() < 1e-12);
        }
    }
}
