//! Univariate complex polynomials and simultaneous root finding.

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::series::EPS_COEF;
use crate::error::{Error, Result};

/// Coefficients in ascending order: `c[0] + c[1] X + ...`.
///
/// Trailing coefficients below `EPS_COEF` times the largest coefficient are
/// stripped on construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnivariatePoly {
    coeffs: Vec<Complex64>,
}

impl UnivariatePoly {
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        Self::with_tolerance(coeffs, EPS_COEF)
    }

    /// Strips trailing coefficients below `rel_tol` times the largest one.
    pub fn with_tolerance(mut coeffs: Vec<Complex64>, rel_tol: f64) -> Self {
        let norm = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while coeffs.len() > 1 && coeffs.last().unwrap().norm() <= rel_tol * norm {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::zero());
        }
        UnivariatePoly { coeffs }
    }

    pub fn constant(c: Complex64) -> Self {
        UnivariatePoly { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeff_norm() == 0.0
    }

    pub fn evaluate(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, c| acc * x + c)
    }

    /// Value, derivative and the rounding scale `sum |c_k| |x|^k`.
    fn eval_with_derivative(&self, x: Complex64) -> (Complex64, Complex64, f64) {
        let ax = x.norm();
        let mut p = Complex64::zero();
        let mut dp = Complex64::zero();
        let mut scale = 0.0;
        for c in self.coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
            scale = scale * ax + c.norm();
        }
        (p, dp, scale)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![Complex64::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UnivariatePoly { coeffs: out }
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::constant(Complex64::zero());
        }
        UnivariatePoly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        }
    }

    /// Taylor coefficients about `c`: the coefficients of `q(c + X)`.
    pub fn taylor_shift(&self, c: Complex64) -> Vec<Complex64> {
        let mut a = self.coeffs.clone();
        let n = a.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let t = a[j + 1] * c;
                a[j] += t;
            }
        }
        a
    }

    /// Multiplicity of `x` as a numerical root: the number of leading Taylor
    /// coefficients at `x` below `rel_tol` times their l1 norm.
    pub fn root_order_at(&self, x: Complex64, rel_tol: f64) -> usize {
        let a = self.taylor_shift(x);
        let norm: f64 = a.iter().map(|c| c.norm()).sum();
        a.iter().take_while(|c| c.norm() <= rel_tol * norm).count()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RootOptions {
    pub max_iter: usize,
    pub res_tol: f64,
    pub cluster_radius: f64,
    /// Relative tolerance of the Taylor test that certifies a cluster as a
    /// numerically multiple root.
    pub cluster_taylor_tol: f64,
    /// Largest separation (relative to `max(1, |x|)`) a merged cluster may span.
    pub cluster_cap: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            max_iter: 200,
            res_tol: 1e-8,
            cluster_radius: 1e-6,
            cluster_taylor_tol: 1e-9,
            cluster_cap: 0.1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
    /// `|q(root)| / (coeff_norm * max(1, |root|)^deg)`.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Roots {
    pub roots: Vec<Root>,
    pub converged: bool,
    pub iterations: usize,
}

impl Roots {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }
}

pub fn roots_univariate(q: &UnivariatePoly) -> Result<Roots> {
    roots_with_options(q, &RootOptions::default())
}

pub fn roots_with_options(q: &UnivariatePoly, opts: &RootOptions) -> Result<Roots> {
    if q.degree() == 0 {
        return Err(Error::InvalidArgument(
            "root finding needs degree >= 1".into(),
        ));
    }
    // exact zeros at the origin
    let zeros = q.coeffs.iter().take_while(|c| c.is_zero()).count();
    let reduced = UnivariatePoly {
        coeffs: q.coeffs[zeros..].to_vec(),
    };
    let (mut approx, converged, iterations) = if reduced.degree() > 0 {
        aberth(&reduced, opts)
    } else {
        (Vec::new(), true, 0)
    };
    approx.extend(std::iter::repeat(Complex64::zero()).take(zeros));
    let clusters = cluster_roots(q, &approx, opts);
    let deg = q.degree() as i32;
    let norm = q.coeff_norm();
    let roots = clusters
        .into_iter()
        .map(|(value, multiplicity)| Root {
            value,
            multiplicity,
            residual: q.evaluate(value).norm() / (norm * value.norm().max(1.0).powi(deg)),
        })
        .collect::<Vec<_>>();
    let converged = converged && roots.iter().all(|r| r.residual <= opts.res_tol);
    Ok(Roots {
        roots,
        converged,
        iterations,
    })
}

/// Initial radii from the upper convex hull of `(k, log|c_k|)`.
fn initial_guesses(q: &UnivariatePoly) -> Vec<Complex64> {
    let n = q.degree();
    let logs: Vec<f64> = q
        .coeffs
        .iter()
        .map(|c| if c.is_zero() { f64::NEG_INFINITY } else { c.norm().ln() })
        .collect();
    let mut hull: Vec<usize> = Vec::new();
    for k in 0..=n {
        if logs[k] == f64::NEG_INFINITY {
            continue;
        }
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b if it lies on or below the segment a-k
            let cross = (logs[b] - logs[a]) * (k - a) as f64 - (logs[k] - logs[a]) * (b - a) as f64;
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let mut out = Vec::with_capacity(n);
    let sigma = 0.7;
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = b - a;
        let r = ((logs[a] - logs[b]) / m as f64).exp();
        for i in 0..m {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / m as f64
                + 2.0 * std::f64::consts::PI * out.len() as f64 / n as f64
                + sigma;
            out.push(Complex64::from_polar(r, theta));
        }
    }
    out
}

fn aberth(q: &UnivariatePoly, opts: &RootOptions) -> (Vec<Complex64>, bool, usize) {
    let n = q.degree();
    let mut z = initial_guesses(q);
    debug_assert_eq!(z.len(), n);
    let mut done = vec![false; n];
    let eps = f64::EPSILON;
    let mut it = 0;
    while it < opts.max_iter && done.iter().any(|d| !d) {
        it += 1;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (p, dp, scale) = q.eval_with_derivative(z[k]);
            if p.norm() <= 4.0 * (n as f64 + 1.0) * eps * scale {
                done[k] = true;
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex64::zero();
            for j in 0..n {
                if j != k {
                    let diff = z[k] - z[j];
                    if !diff.is_zero() {
                        s += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - ratio * s;
            let delta = if denom.norm() > 0.0 && ratio.re.is_finite() {
                ratio / denom
            } else {
                ratio
            };
            if !delta.re.is_finite() || !delta.im.is_finite() {
                // derivative vanished; nudge
                let bump = Complex64::new(1e-8, 1e-8) * z[k].norm().max(1.0);
                z[k] += bump;
                continue;
            }
            z[k] -= delta;
            if delta.norm() <= eps * z[k].norm() {
                done[k] = true;
            }
        }
    }
    (z, done.iter().all(|d| *d), it)
}

/// Groups approximations into clusters. Members within `cluster_radius` merge
/// outright; larger groups merge when the Taylor expansion of `q` at the
/// refined center looks like `a_m (x - c)^m` on a disk that reaches halfway
/// to the nearest root outside the group.
fn cluster_roots(
    q: &UnivariatePoly,
    approx: &[Complex64],
    opts: &RootOptions,
) -> Vec<(Complex64, usize)> {
    let n = approx.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push(((approx[i] - approx[j]).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (dist, i, j) in pairs {
        let scale = approx[i].norm().max(1.0);
        if dist > opts.cluster_cap * scale {
            break;
        }
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri == rj {
            continue;
        }
        if dist <= opts.cluster_radius * scale {
            parent[rj] = ri;
            continue;
        }
        let mid = (approx[i] + approx[j]) * 0.5;
        let reach = dist * (1.0 + 1e-9);
        let roots: Vec<usize> = (0..n)
            .filter(|&k| (approx[k] - mid).norm() <= reach)
            .map(|k| find(&mut parent, k))
            .collect();
        let mut members = Vec::new();
        let mut outside = Vec::new();
        for m in 0..n {
            if roots.contains(&find(&mut parent, m)) {
                members.push(m);
            } else {
                outside.push(m);
            }
        }
        if is_multiple_root(q, approx, &members, &outside, opts.cluster_taylor_tol) {
            for r in roots {
                let r = find(&mut parent, r);
                let ri = find(&mut parent, ri);
                parent[r] = ri;
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, g)) => g.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    groups
        .into_iter()
        .map(|(_, g)| {
            let c = centroid(approx, &g);
            let v = if g.len() > 1 {
                refine_multiple(q, c, g.len(), spread(approx, &g, c))
            } else {
                c
            };
            (v, g.len())
        })
        .collect()
}

fn spread(z: &[Complex64], idx: &[usize], c: Complex64) -> f64 {
    idx.iter().map(|&i| (z[i] - c).norm()).fold(0.0, f64::max)
}

fn is_multiple_root(
    q: &UnivariatePoly,
    approx: &[Complex64],
    members: &[usize],
    outside: &[usize],
    tol: f64,
) -> bool {
    let m = members.len();
    let c0 = centroid(approx, members);
    let c = refine_multiple(q, c0, m, spread(approx, members, c0));
    let rho = outside
        .iter()
        .map(|&i| 0.5 * (approx[i] - c).norm())
        .fold(c.norm().max(1.0), f64::min);
    let a = q.taylor_shift(c);
    let mut pw = 1.0;
    let scaled: Vec<f64> = a
        .iter()
        .map(|x| {
            let v = x.norm() * pw;
            pw *= rho;
            v
        })
        .collect();
    let top = scaled[m..].iter().fold(0.0f64, |x, &y| x.max(y));
    top > 0.0 && scaled[..m].iter().all(|&v| v <= tol * top)
}

/// Newton steps on the `(m-1)`-th derivative, where a root of multiplicity
/// `m` is simple. The result stays within twice the cluster spread of `c`.
fn refine_multiple(q: &UnivariatePoly, c: Complex64, m: usize, spread: f64) -> Complex64 {
    let mut dq = q.clone();
    for _ in 1..m {
        dq = dq.derivative();
    }
    if dq.degree() == 0 {
        return c;
    }
    let guard = 2.0 * spread + 1e-14 * c.norm().max(1.0);
    let mut x = c;
    let start = q.evaluate(c).norm();
    for _ in 0..60 {
        let (p, dp, _) = dq.eval_with_derivative(x);
        let step = p / dp;
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        let nx = x - step;
        if (nx - c).norm() > guard {
            return c;
        }
        x = nx;
        if step.norm() <= 1e-16 * x.norm().max(1.0) {
            break;
        }
    }
    if q.evaluate(x).norm() <= start {
        x
    } else {
        c
    }
}

fn centroid(z: &[Complex64], idx: &[usize]) -> Complex64 {
    idx.iter().map(|&i| z[i]).sum::<Complex64>() / idx.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sorted_real(r: &Roots) -> Vec<(f64, usize)> {
        let mut v: Vec<(f64, usize)> = r.roots.iter().map(|x| (x.value.re, x.multiplicity)).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }

    #[test]
    fn x_squared_minus_one() {
        let q = UnivariatePoly::from_coeffs(vec![c(-1.0), c(0.0), c(1.0)]);
        let r = roots_univariate(&q).unwrap();
        assert!(r.converged);
        let v = sorted_real(&r);
        assert_eq!(v.len(), 2);
        assert!((v[0].0 + 1.0).abs() < 1e-12 && v[0].1 == 1);
        assert!((v[1].0 - 1.0).abs() < 1e-12 && v[1].1 == 1);
    }

    #[test]
    fn x_fourth_is_quadruple_zero() {
        let q = UnivariatePoly::from_coeffs(vec![c(0.0), c(0.0), c(0.0), c(0.0), c(1.0)]);
        let r = roots_univariate(&q).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert_eq!(r.roots[0].multiplicity, 4);
        assert_eq!(r.roots[0].value, c(0.0));
    }

    #[test]
    fn double_root_clusters() {
        // companion matrix of X^2 - 2X + 1 is [[0, -1], [1, 2]]: trace 2,
        // determinant 1, characteristic polynomial (X - 1)^2
        let q = UnivariatePoly::from_coeffs(vec![c(1.0), c(-2.0), c(1.0)]);
        let r = roots_univariate(&q).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert_eq!(r.roots[0].multiplicity, 2);
        assert!((r.roots[0].value - c(1.0)).norm() < 1e-10);
    }

    #[test]
    fn quadruple_root_away_from_origin() {
        // (X - 0.5 - 0.25i)^4 (X + 2)
        let a = Complex64::new(0.5, 0.25);
        let mut q = UnivariatePoly::constant(c(1.0));
        for _ in 0..4 {
            q = q.mul(&UnivariatePoly::from_coeffs(vec![-a, c(1.0)]));
        }
        q = q.mul(&UnivariatePoly::from_coeffs(vec![c(2.0), c(1.0)]));
        let r = roots_univariate(&q).unwrap();
        assert_eq!(r.roots.len(), 2);
        let quad = r.roots.iter().find(|x| x.multiplicity == 4).unwrap();
        assert!((quad.value - a).norm() < 1e-8);
    }

    #[test]
    fn no_zero_degree() {
        assert!(roots_univariate(&UnivariatePoly::constant(c(1.0))).is_err());
    }

    #[test]
    fn taylor_shift_matches_derivatives() {
        let q = UnivariatePoly::from_coeffs(vec![c(1.0), c(2.0), c(3.0)]);
        let a = q.taylor_shift(c(2.0));
        // q(2) = 17, q'(2) = 14, q''/2 = 3
        assert_eq!(a, vec![c(17.0), c(14.0), c(3.0)]);
    }
}
