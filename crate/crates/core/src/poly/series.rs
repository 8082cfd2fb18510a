//! Truncated power series in two affine variables `(u, v)`.

use std::ops::{AddAssign, Mul};

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::homog::HomogPoly3;
use super::univariate::UnivariatePoly;
use crate::error::{Error, Result};

/// Relative coefficient-zero tolerance.
pub const EPS_COEF: f64 = 1e-9;
/// Zero test for tracked series: a coefficient below `SERIES_TOL` times its
/// error scale is rounding.
pub const SERIES_TOL: f64 = 1e-12;
/// Smallest error scale of a center coordinate; `SERIES_TOL * CENTER_SCALE`
/// is the absolute accuracy assumed for computed points.
const CENTER_SCALE: f64 = 1e-3;

#[inline]
pub(crate) fn series_len(t: usize) -> usize {
    (t + 1) * (t + 2) / 2
}

/// Position of `u^i v^j`: grouped by total degree, `j` ascending within a group.
#[inline]
pub(crate) fn series_index(i: usize, j: usize) -> usize {
    let k = i + j;
    k * (k + 1) / 2 + j
}

fn mul_trunc<E>(a: &[E], b: &[E], t: usize) -> Vec<E>
where
    E: Copy + Zero + Mul<Output = E> + AddAssign,
{
    let mut out = vec![E::zero(); series_len(t)];
    for k1 in 0..=t {
        let base1 = k1 * (k1 + 1) / 2;
        for j1 in 0..=k1 {
            let x = a[base1 + j1];
            if x.is_zero() {
                continue;
            }
            for k2 in 0..=(t - k1) {
                let base2 = k2 * (k2 + 1) / 2;
                let k = k1 + k2;
                let base = k * (k + 1) / 2 + j1;
                for j2 in 0..=k2 {
                    let y = b[base2 + j2];
                    if !y.is_zero() {
                        out[base + j2] += x * y;
                    }
                }
            }
        }
    }
    out
}

/// Local expansion `sum c_ij u^i v^j` with `i + j <= truncation`, taken at
/// `base_point` of some affine chart. Coefficients past the truncation are
/// unknown rather than zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineSeries2 {
    truncation: usize,
    coeffs: Vec<Complex64>,
    base_point: (Complex64, Complex64),
}

impl AffineSeries2 {
    pub fn zero(truncation: usize) -> Self {
        AffineSeries2 {
            truncation,
            coeffs: vec![Complex64::zero(); series_len(truncation)],
            base_point: (Complex64::zero(), Complex64::zero()),
        }
    }

    pub fn constant(truncation: usize, c: Complex64) -> Self {
        let mut s = Self::zero(truncation);
        s.coeffs[0] = c;
        s
    }

    /// The coordinate `u` (`var = 0`) or `v` (`var = 1`).
    pub fn variable(truncation: usize, var: usize) -> Self {
        let mut s = Self::zero(truncation);
        if truncation >= 1 {
            let idx = if var == 0 { series_index(1, 0) } else { series_index(0, 1) };
            s.coeffs[idx] = Complex64::new(1.0, 0.0);
        }
        s
    }

    /// Builds from `((i, j), c)` terms; terms beyond the truncation are dropped.
    pub fn from_terms<I>(truncation: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = ((usize, usize), Complex64)>,
    {
        let mut s = Self::zero(truncation);
        for ((i, j), c) in terms {
            if i + j <= truncation {
                s.coeffs[series_index(i, j)] += c;
            }
        }
        s
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn base_point(&self) -> (Complex64, Complex64) {
        self.base_point
    }

    pub fn with_base_point(mut self, base: (Complex64, Complex64)) -> Self {
        self.base_point = base;
        self
    }

    pub fn coeff(&self, i: usize, j: usize) -> Complex64 {
        if i + j > self.truncation {
            return Complex64::zero();
        }
        self.coeffs[series_index(i, j)]
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Nonzero terms as `((i, j), c)`.
    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize), Complex64)> + '_ {
        (0..=self.truncation)
            .flat_map(|k| (0..=k).map(move |j| (k - j, j)))
            .zip(self.coeffs.iter().copied())
            .filter(|(_, c)| !c.is_zero())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let t = self.truncation.min(other.truncation);
        let a = self.truncated(t);
        let b = other.truncated(t);
        AffineSeries2 {
            truncation: t,
            coeffs: mul_trunc(&a.coeffs, &b.coeffs, t),
            base_point: self.base_point,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let t = self.truncation.min(other.truncation);
        let n = series_len(t);
        AffineSeries2 {
            truncation: t,
            coeffs: (0..n).map(|i| f(self.coeffs[i], other.coeffs[i])).collect(),
            base_point: self.base_point,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        AffineSeries2 {
            truncation: self.truncation,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            base_point: self.base_point,
        }
    }

    pub fn truncated(&self, t: usize) -> Self {
        let t = t.min(self.truncation);
        AffineSeries2 {
            truncation: t,
            coeffs: self.coeffs[..series_len(t)].to_vec(),
            base_point: self.base_point,
        }
    }

    pub fn evaluate(&self, u: Complex64, v: Complex64) -> Complex64 {
        self.terms()
            .map(|((i, j), c)| c * u.powu(i as u32) * v.powu(j as u32))
            .sum()
    }

    /// Partial derivative in `u` (`var = 0`) or `v` (`var = 1`); the
    /// truncation drops by one.
    pub fn derivative(&self, var: usize) -> Self {
        let t = self.truncation.saturating_sub(1);
        let mut out = Self::zero(t).with_base_point(self.base_point);
        if self.truncation == 0 {
            return out;
        }
        for ((i, j), c) in self.terms() {
            let e = if var == 0 { i } else { j };
            if e == 0 {
                continue;
            }
            let (ni, nj) = if var == 0 { (i - 1, j) } else { (i, j - 1) };
            if ni + nj <= t {
                out.coeffs[series_index(ni, nj)] += c * e as f64;
            }
        }
        out
    }

    /// Total degree after discarding top-degree groups whose coefficients are
    /// below `rel_tol` times the largest coefficient.
    pub fn effective_degree(&self, rel_tol: f64) -> Option<usize> {
        let thresh = rel_tol * self.max_coeff();
        (0..=self.truncation).rev().find(|&k| {
            let base = k * (k + 1) / 2;
            self.coeffs[base..=base + k].iter().any(|c| c.norm() > thresh)
        })
    }

    /// Treating the series as a polynomial, substitutes `(u, v) -> m (u, v)`.
    pub fn compose_linear(&self, m: &[[Complex64; 2]; 2]) -> Self {
        let t = self.truncation;
        let su = TrackedSeries::from_series(&Self::from_terms(
            t,
            [((1, 0), m[0][0]), ((0, 1), m[0][1])],
        ));
        let sv = TrackedSeries::from_series(&Self::from_terms(
            t,
            [((1, 0), m[1][0]), ((0, 1), m[1][1])],
        ));
        self.compose_tracked(&su, &sv).value().clone()
    }

    /// Treating the series as a polynomial, re-expands it about `(du, dv)`.
    pub fn shift(&self, du: Complex64, dv: Complex64) -> Self {
        let t = self.truncation;
        let su = TrackedSeries::from_series(&Self::from_terms(
            t,
            [((0, 0), du), ((1, 0), Complex64::new(1.0, 0.0))],
        ));
        let sv = TrackedSeries::from_series(&Self::from_terms(
            t,
            [((0, 0), dv), ((0, 1), Complex64::new(1.0, 0.0))],
        ));
        let b = self.base_point;
        self.compose_tracked(&su, &sv)
            .value()
            .clone()
            .with_base_point((b.0 + du, b.1 + dv))
    }

    fn compose_tracked(&self, su: &TrackedSeries, sv: &TrackedSeries) -> TrackedSeries {
        let t = self.truncation;
        let mut pu = vec![TrackedSeries::constant(t, Complex64::new(1.0, 0.0))];
        let mut pv = vec![TrackedSeries::constant(t, Complex64::new(1.0, 0.0))];
        for k in 1..=t {
            let a = pu[k - 1].mul(su);
            let b = pv[k - 1].mul(sv);
            pu.push(a);
            pv.push(b);
        }
        let mut acc = TrackedSeries::zero(t);
        for ((i, j), c) in self.terms() {
            acc.add_scaled_assign(&pu[i].mul(&pv[j]), c);
        }
        acc
    }

    /// Rows of the polynomial in `v`: entry `k` is the coefficient of `v^k`
    /// as a polynomial in `u`.
    pub fn as_polys_in_v(&self) -> Vec<UnivariatePoly> {
        let t = self.truncation;
        (0..=t)
            .map(|j| {
                UnivariatePoly::from_coeffs((0..=t - j).map(|i| self.coeff(i, j)).collect())
            })
            .collect()
    }
}

/// Smallest total degree carrying a coefficient above `rel_tol` times the
/// largest coefficient.
pub fn vanishing_order(s: &AffineSeries2, rel_tol: f64) -> Result<usize> {
    let thresh = rel_tol * s.max_coeff();
    if s.max_coeff() == 0.0 {
        return Err(Error::OrderExceedsTruncation {
            truncation: s.truncation,
        });
    }
    (0..=s.truncation)
        .find(|&k| {
            let base = k * (k + 1) / 2;
            s.coeffs[base..=base + k].iter().any(|c| c.norm() > thresh)
        })
        .ok_or(Error::OrderExceedsTruncation {
            truncation: s.truncation,
        })
}

/// Taylor expansion of `p` dehomogenized in `chart` about `center`,
/// truncated at total degree `trunc`.
pub fn recenter_taylor(
    p: &HomogPoly3,
    chart: usize,
    center: (Complex64, Complex64),
    trunc: usize,
) -> Result<AffineSeries2> {
    if chart > 2 {
        return Err(Error::InvalidArgument(format!("chart index {chart}")));
    }
    if !(center.0.re.is_finite()
        && center.0.im.is_finite()
        && center.1.re.is_finite()
        && center.1.im.is_finite())
    {
        return Err(Error::ChartUndefined { chart });
    }
    let lift = chart_lift(trunc, chart, center);
    Ok(p
        .evaluate_series(&lift)
        .value()
        .clone()
        .with_base_point(center))
}

/// The lift `(..., 1, ...)` of the chart point `center + (u, v)` as series.
pub(crate) fn chart_lift(
    trunc: usize,
    chart: usize,
    center: (Complex64, Complex64),
) -> [TrackedSeries; 3] {
    let one = Complex64::new(1.0, 0.0);
    let others = other_indices(chart);
    let mut out: [TrackedSeries; 3] = std::array::from_fn(|_| TrackedSeries::zero(trunc));
    out[chart] = TrackedSeries::constant(trunc, one);
    out[others[0]] = TrackedSeries::from_series(&AffineSeries2::from_terms(
        trunc,
        [((0, 0), center.0), ((1, 0), one)],
    ));
    out[others[1]] = TrackedSeries::from_series(&AffineSeries2::from_terms(
        trunc,
        [((0, 0), center.1), ((0, 1), one)],
    ));
    // computed points are accurate to about 1e-15 in absolute terms, so tiny
    // coordinates carry the matching error scale
    for i in others {
        out[i].maj[0] = out[i].maj[0].max(CENTER_SCALE);
    }
    out
}

/// The two coordinates that serve as affine coordinates in `chart`.
pub fn other_indices(chart: usize) -> [usize; 2] {
    match chart {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    }
}

/// A series paired with a coefficient-wise error scale: machine epsilon times
/// the scale bounds the rounding error to first order. Products propagate it
/// as `|a| m_b + m_a |b|`, so cancellation in one factor is not compounded
/// through later steps. Coefficients small relative to their scale are
/// indistinguishable from zero.
#[derive(Clone, Debug)]
pub struct TrackedSeries {
    val: AffineSeries2,
    maj: Vec<f64>,
}

impl TrackedSeries {
    pub fn zero(t: usize) -> Self {
        TrackedSeries {
            val: AffineSeries2::zero(t),
            maj: vec![0.0; series_len(t)],
        }
    }

    pub fn constant(t: usize, c: Complex64) -> Self {
        Self::from_series(&AffineSeries2::constant(t, c))
    }

    pub fn from_series(s: &AffineSeries2) -> Self {
        TrackedSeries {
            maj: s.coeffs.iter().map(|c| c.norm()).collect(),
            val: s.clone(),
        }
    }

    pub fn value(&self) -> &AffineSeries2 {
        &self.val
    }

    pub fn majorant(&self) -> &[f64] {
        &self.maj
    }

    pub fn truncation(&self) -> usize {
        self.val.truncation
    }

    pub fn constant_term(&self) -> Complex64 {
        self.val.coeffs[0]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let t = self.truncation().min(other.truncation());
        let n = series_len(t);
        let a: Vec<f64> = self.val.coeffs[..n].iter().map(|c| c.norm()).collect();
        let b: Vec<f64> = other.val.coeffs[..n].iter().map(|c| c.norm()).collect();
        let mut maj = mul_trunc(&a, &other.maj[..n], t);
        for (m, x) in maj.iter_mut().zip(mul_trunc(&self.maj[..n], &b, t)) {
            *m += x;
        }
        TrackedSeries { val: self.val.mul(&other.val), maj }
    }

    pub fn add(&self, other: &Self) -> Self {
        let t = self.truncation().min(other.truncation());
        let n = series_len(t);
        TrackedSeries {
            val: self.val.add(&other.val),
            maj: (0..n).map(|i| self.maj[i] + other.maj[i]).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let t = self.truncation().min(other.truncation());
        let n = series_len(t);
        TrackedSeries {
            val: self.val.sub(&other.val),
            maj: (0..n).map(|i| self.maj[i] + other.maj[i]).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let a = s.norm();
        TrackedSeries {
            val: self.val.scale(s),
            maj: self.maj.iter().map(|m| m * a).collect(),
        }
    }

    pub fn add_scaled_assign(&mut self, other: &Self, s: Complex64) {
        let a = s.norm();
        let n = self.maj.len().min(other.maj.len());
        for i in 0..n {
            self.val.coeffs[i] += other.val.coeffs[i] * s;
            self.maj[i] += other.maj[i] * a;
        }
    }

    pub fn derivative(&self, var: usize) -> Self {
        let val = self.val.derivative(var);
        let t = val.truncation;
        let mut maj = vec![0.0; series_len(t)];
        if self.truncation() > 0 {
            for k in 1..=self.truncation() {
                for j in 0..=k {
                    let i = k - j;
                    let e = if var == 0 { i } else { j };
                    if e == 0 {
                        continue;
                    }
                    let (ni, nj) = if var == 0 { (i - 1, j) } else { (i, j - 1) };
                    maj[series_index(ni, nj)] += self.maj[series_index(i, j)] * e as f64;
                }
            }
        }
        TrackedSeries { val, maj }
    }

    /// Vanishing order where a coefficient counts as zero when it is below
    /// `rel_tol` times its error scale (or exactly zero).
    pub fn vanishing_order(&self, rel_tol: f64) -> Result<usize> {
        let t = self.truncation();
        let global = self.maj.iter().fold(0.0f64, |a, &b| a.max(b));
        (0..=t)
            .find(|&k| {
                let base = k * (k + 1) / 2;
                (0..=k).any(|j| {
                    let c = self.val.coeffs[base + j].norm();
                    c > rel_tol * self.maj[base + j] && c > 1e-280 * global
                })
            })
            .ok_or(Error::OrderExceedsTruncation { truncation: t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn recenter_zw_at_one_zero() {
        // z w at (1, 0) in chart t: (1 + u) v = v + u v
        let p = HomogPoly3::monomial(1, 1, 0, c(1.0));
        let s = recenter_taylor(&p, 2, (c(1.0), c(0.0)), 2).unwrap();
        // binomial oracle: (1+u)^1 v^1 expands to v + uv
        let mut expected = AffineSeries2::zero(2);
        expected.coeffs[series_index(0, 1)] = c(1.0);
        expected.coeffs[series_index(1, 1)] = c(1.0);
        for (a, b) in s.coeffs().iter().zip(expected.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn recenter_t_squared_is_constant_one() {
        let p = HomogPoly3::monomial(0, 0, 2, c(1.0));
        let s = recenter_taylor(&p, 2, (c(0.7), Complex64::new(-0.2, 3.0)), 3).unwrap();
        assert_eq!(s.coeff(0, 0), c(1.0));
        assert!(s.coeffs()[1..].iter().all(|x| x.is_zero()));
    }

    #[test]
    fn recenter_z_squared_at_origin() {
        let p = HomogPoly3::monomial(2, 0, 0, c(1.0));
        let s = recenter_taylor(&p, 2, (c(0.0), c(0.0)), 3).unwrap();
        assert_eq!(s.coeff(2, 0), c(1.0));
        assert_eq!(vanishing_order(&s, EPS_COEF).unwrap(), 2);
    }

    #[test]
    fn vanishing_order_examples() {
        let s = AffineSeries2::from_terms(6, [((2, 1), c(1.0)), ((5, 0), c(1.0))]);
        assert_eq!(vanishing_order(&s, EPS_COEF).unwrap(), 3);
        let s = AffineSeries2::from_terms(3, [((0, 0), c(1.0)), ((1, 0), c(1.0))]);
        assert_eq!(vanishing_order(&s, EPS_COEF).unwrap(), 0);
        let s = AffineSeries2::zero(4);
        assert!(matches!(
            vanishing_order(&s, EPS_COEF),
            Err(Error::OrderExceedsTruncation { truncation: 4 })
        ));
    }

    #[test]
    fn jacobian_order_of_skew_map_is_two() {
        // (2u + v^2, u^2): symbolic Jacobian is -4uv
        let t = 4;
        let f1 = AffineSeries2::from_terms(t, [((1, 0), c(2.0)), ((0, 2), c(1.0))]);
        let f2 = AffineSeries2::from_terms(t, [((2, 0), c(1.0))]);
        let jac = f1
            .derivative(0)
            .mul(&f2.derivative(1))
            .sub(&f1.derivative(1).mul(&f2.derivative(0)));
        assert!((jac.coeff(1, 1) - c(-4.0)).norm() < 1e-15);
        assert_eq!(vanishing_order(&jac, EPS_COEF).unwrap(), 2);
    }

    #[test]
    fn shift_round_trip() {
        let s = AffineSeries2::from_terms(
            3,
            [((0, 0), c(1.0)), ((2, 1), Complex64::new(0.3, -1.0)), ((0, 3), c(2.0))],
        );
        let d = (Complex64::new(0.4, 0.1), c(-0.6));
        let back = s.shift(d.0, d.1).shift(-d.0, -d.1);
        for (a, b) in back.coeffs().iter().zip(s.coeffs()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn tracked_order_ignores_cancellation_noise() {
        let t = 3;
        let x = TrackedSeries::from_series(&AffineSeries2::from_terms(
            t,
            [((0, 0), c(0.1)), ((1, 0), c(1.0))],
        ));
        let y = TrackedSeries::from_series(&AffineSeries2::from_terms(
            t,
            [((0, 0), c(0.3)), ((1, 0), c(3.0))],
        ));
        // 3x - y is identically zero in exact arithmetic; rounding leaves noise
        let z = x.scale(c(3.0)).sub(&y).add(&TrackedSeries::from_series(
            &AffineSeries2::from_terms(t, [((1, 1), c(1.0))]),
        ));
        assert_eq!(z.vanishing_order(EPS_COEF).unwrap(), 2);
    }
}
