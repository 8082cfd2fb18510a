//! Binary forms and rational maps of the projective line, used for the
//! restriction of a map to an invariant line.

use num_complex::Complex64;

use crate::error::Result;
use crate::poly::{roots_univariate, HomogPoly3, UnivariatePoly};

/// `sum c_k a^(d-k) b^k`.
#[derive(Clone, Debug)]
pub struct BinaryForm {
    coeffs: Vec<Complex64>,
}

fn pmul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl BinaryForm {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty());
        BinaryForm { coeffs }
    }

    /// `h(a p + b q)`.
    pub fn restrict(h: &HomogPoly3, p: &[Complex64; 3], q: &[Complex64; 3]) -> Self {
        let mut c = h.restrict_to_line(p, q).coeffs().to_vec();
        c.resize(h.degree() + 1, Complex64::new(0.0, 0.0));
        BinaryForm { coeffs: c }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn evaluate(&self, x: [Complex64; 2]) -> Complex64 {
        let d = self.degree();
        let mut pa = vec![Complex64::new(1.0, 0.0); d + 1];
        let mut pb = vec![Complex64::new(1.0, 0.0); d + 1];
        for k in 1..=d {
            pa[k] = pa[k - 1] * x[0];
            pb[k] = pb[k - 1] * x[1];
        }
        (0..=d).map(|k| self.coeffs[k] * pa[d - k] * pb[k]).sum()
    }

    fn scale(&self, s: Complex64) -> Self {
        BinaryForm::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.degree(), other.degree());
        BinaryForm::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect())
    }

    /// Product with the linear form `u a + v b`.
    fn mul_linear(&self, u: Complex64, v: Complex64) -> Self {
        BinaryForm::new(pmul(&self.coeffs, &[u, v]))
    }

    /// `self(A(a, b), B(a, b))`.
    pub fn compose(&self, a: &BinaryForm, b: &BinaryForm) -> BinaryForm {
        let d = self.degree();
        let e = a.degree();
        let mut pa = vec![vec![Complex64::new(1.0, 0.0)]];
        let mut pb = vec![vec![Complex64::new(1.0, 0.0)]];
        for k in 1..=d {
            pa.push(pmul(&pa[k - 1], &a.coeffs));
            pb.push(pmul(&pb[k - 1], &b.coeffs));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); d * e + 1];
        for k in 0..=d {
            for (n, x) in pmul(&pa[d - k], &pb[k]).iter().enumerate() {
                out[n] += self.coeffs[k] * x;
            }
        }
        BinaryForm::new(out)
    }

    /// Zeros on the projective line with multiplicities, found in the two
    /// affine charts `a = 1` (for `|s| <= 1`) and `b = 1`.
    pub fn zeros(&self) -> Result<Vec<([Complex64; 2], usize)>> {
        let one = Complex64::new(1.0, 0.0);
        let mut out: Vec<([Complex64; 2], usize)> = Vec::new();
        let forward = UnivariatePoly::from_coeffs(self.coeffs.clone());
        let mut rev = self.coeffs.clone();
        rev.reverse();
        let backward = UnivariatePoly::from_coeffs(rev);
        for (poly, flip) in [(forward, false), (backward, true)] {
            let roots = if poly.degree() == 0 {
                Vec::new()
            } else {
                roots_univariate(&poly)?.roots
            };
            for r in roots {
                let inside = if flip { r.value.norm() < 1.0 } else { r.value.norm() <= 1.0 };
                if !inside {
                    continue;
                }
                let x = if flip { [r.value, one] } else { [one, r.value] };
                let x = unit(x);
                if !out.iter().any(|(y, _)| chordal(y, &x) < 1e-6) {
                    out.push((x, r.multiplicity));
                }
            }
        }
        Ok(out)
    }

    /// Order of vanishing at `x`, with Taylor coefficients below `rel_tol`
    /// (relative) counted as zero.
    pub fn order_at(&self, x: [Complex64; 2], rel_tol: f64) -> usize {
        if x[0].norm() >= x[1].norm() {
            UnivariatePoly::with_tolerance(self.coeffs.clone(), 0.0).root_order_at(x[1] / x[0], rel_tol)
        } else {
            let mut rev = self.coeffs.clone();
            rev.reverse();
            UnivariatePoly::with_tolerance(rev, 0.0).root_order_at(x[0] / x[1], rel_tol)
        }
    }
}

pub(crate) fn unit(x: [Complex64; 2]) -> [Complex64; 2] {
    let n = (x[0].norm_sqr() + x[1].norm_sqr()).sqrt();
    [x[0] / n, x[1] / n]
}

/// `|x0 y1 - x1 y0|` for unit representatives.
pub(crate) fn chordal(x: &[Complex64; 2], y: &[Complex64; 2]) -> f64 {
    (x[0] * y[1] - x[1] * y[0]).norm()
}

/// `[a : b] -> [A(a, b) : B(a, b)]`.
#[derive(Clone, Debug)]
pub struct LineMap {
    pub a: BinaryForm,
    pub b: BinaryForm,
}

impl LineMap {
    pub fn degree(&self) -> usize {
        self.a.degree()
    }

    pub fn apply(&self, x: [Complex64; 2]) -> [Complex64; 2] {
        unit([self.a.evaluate(x), self.b.evaluate(x)])
    }

    pub fn compose(&self, g: &LineMap) -> LineMap {
        LineMap {
            a: self.a.compose(&g.a, &g.b),
            b: self.b.compose(&g.a, &g.b),
        }
    }

    pub fn iterate(&self, k: usize) -> LineMap {
        let mut out = self.clone();
        for _ in 1..k {
            out = self.compose(&out);
        }
        out
    }

    /// Fixed points: zeros of `b A - a B`.
    pub fn fixed_points(&self) -> Result<Vec<[Complex64; 2]>> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let h = self.a.mul_linear(zero, one).sub(&self.b.mul_linear(one, zero));
        Ok(h.zeros()?.into_iter().map(|(x, _)| x).collect())
    }

    /// Order at `x` of the fiber form over `g(x)`; it equals the degree
    /// exactly when `x` is the only preimage of its image.
    pub fn fiber_order(&self, x: [Complex64; 2], rel_tol: f64) -> usize {
        let y = self.apply(x);
        let h = self.b.scale(y[0]).sub(&self.a.scale(y[1]));
        h.order_at(x, rel_tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn swap_map() {
        // [b^2 : a^2] swaps [1:0] and [0:1]
        let g = LineMap {
            a: BinaryForm::new(vec![c(0.0), c(0.0), c(1.0)]),
            b: BinaryForm::new(vec![c(1.0), c(0.0), c(0.0)]),
        };
        let g2 = g.iterate(2);
        assert_eq!(g2.degree(), 4);
        let fx = g2.fixed_points().unwrap();
        assert_eq!(fx.len(), 5);
        for x in [[c(1.0), c(0.0)], [c(0.0), c(1.0)]] {
            assert_eq!(g.fiber_order(x, 1e-9), 2);
            assert_eq!(g2.fiber_order(x, 1e-9), 4);
        }
        let mid = unit([c(1.0), c(1.0)]);
        assert_eq!(g.fiber_order(mid, 1e-9), 1);
    }

    #[test]
    fn zeros_include_infinity() {
        // a b^2: zero at [1:0] (s = 0, order 2) and [0:1] (order 1)
        let f = BinaryForm::new(vec![c(0.0), c(0.0), c(1.0), c(0.0)]);
        let z = f.zeros().unwrap();
        let total: usize = z.iter().map(|(_, m)| m).sum();
        assert_eq!(total, 3);
    }
}
