//! Zero-dimensional systems of two polynomials in two affine variables,
//! solved by eliminating one variable with a Sylvester resultant.

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use super::series::{AffineSeries2, EPS_COEF};
use super::univariate::{roots_with_options, RootOptions, UnivariatePoly};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct AffineSolution {
    pub point: (Complex64, Complex64),
    pub multiplicity: usize,
    /// `max(|a|, |b|)` at the point, relative to the coefficient norms.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub roots: RootOptions,
    /// Keep only solutions with `|u|, |v| <= bound` when set.
    pub bound: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            roots: RootOptions::default(),
            bound: None,
        }
    }
}

/// Relative size below which resultant coefficients are treated as rounding.
const RESULTANT_STRIP: f64 = 1e-13;

/// The Sylvester matrix counts as singular on the whole sample circle when
/// its best smallest pivot stays below this.
const SINGULAR_PIVOT: f64 = 1e-11;

/// Unitary changes of variables tried in turn; generic enough that the
/// `y`-leading coefficients are constant and projections onto `x` separate
/// distinct solutions.
fn rotation(k: usize) -> [[Complex64; 2]; 2] {
    const ANGLES: [(f64, f64); 3] = [(0.4719, 1.2343), (1.0833, 2.7011), (0.2217, -0.9133)];
    let (th, ph) = ANGLES[k % ANGLES.len()];
    let (s, c) = th.sin_cos();
    let e = Complex64::from_polar(1.0, ph);
    [
        [Complex64::new(c, 0.0), -e.conj() * s],
        [e * s, Complex64::new(c, 0.0)],
    ]
}

fn apply(m: &[[Complex64; 2]; 2], x: Complex64, y: Complex64) -> (Complex64, Complex64) {
    (m[0][0] * x + m[0][1] * y, m[1][0] * x + m[1][1] * y)
}

/// Polynomial system prepared for elimination of `y`.
struct Eliminated {
    m: [[Complex64; 2]; 2],
    a_rows: Vec<UnivariatePoly>,
    b_rows: Vec<UnivariatePoly>,
    /// Resultant coefficients in `x / radius`, ascending.
    resultant: Vec<Complex64>,
}

fn effective(s: &AffineSeries2) -> Option<(AffineSeries2, usize)> {
    let deg = s.effective_degree(EPS_COEF)?;
    Some((s.truncated(deg), deg))
}

/// Samples the resultant on the circle `|x| = radius`; the returned
/// coefficients are those of `s -> R(radius * s)`.
fn eliminate(
    a: &AffineSeries2,
    b: &AffineSeries2,
    m: usize,
    n: usize,
    k: usize,
    radius: f64,
) -> Result<Eliminated> {
    let rot = rotation(k);
    let ar = a.compose_linear(&rot);
    let br = b.compose_linear(&rot);
    let a_rows = rows_in_y(&ar, m);
    let b_rows = rows_in_y(&br, n);
    // leading y-coefficients must be nonzero constants
    let lead_ok = |rows: &[UnivariatePoly], s: &AffineSeries2| {
        rows.last().map(|r| r.coeffs()[0].norm()).unwrap_or(0.0) > 1e-6 * s.max_coeff()
    };
    if !lead_ok(&a_rows, &ar) || !lead_ok(&b_rows, &br) {
        return Err(Error::IllConditioned { re: 0.0, im: 0.0 });
    }
    let npts = m * n + 1;
    let mut values = Vec::with_capacity(npts);
    let mut pivot: f64 = 0.0;
    for i in 0..npts {
        let x = Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * i as f64 / npts as f64);
        let ca: Vec<Complex64> = a_rows.iter().map(|r| r.evaluate(x)).collect();
        let cb: Vec<Complex64> = b_rows.iter().map(|r| r.evaluate(x)).collect();
        let (det, p) = sylvester_det(&ca, &cb);
        pivot = pivot.max(p);
        values.push(det);
    }
    if pivot <= SINGULAR_PIVOT {
        return Err(Error::PositiveDimensional);
    }
    let resultant = (0..npts)
        .map(|j| {
            let mut s = Complex64::zero();
            for (i, v) in values.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * ((i * j) % npts) as f64 / npts as f64;
                s += v * Complex64::from_polar(1.0, ang);
            }
            s / npts as f64
        })
        .collect();
    Ok(Eliminated {
        m: rot,
        a_rows,
        b_rows,
        resultant,
    })
}

/// Entry `j` is the coefficient of `y^j` as a polynomial in `x`.
fn rows_in_y(s: &AffineSeries2, deg: usize) -> Vec<UnivariatePoly> {
    (0..=deg)
        .map(|j| UnivariatePoly::with_tolerance((0..=deg - j).map(|i| s.coeff(i, j)).collect(), 0.0))
        .collect()
}

/// Determinant of the Sylvester matrix of two polynomials (ascending
/// coefficients) and the smallest pivot of its row-equilibrated LU factors.
fn sylvester_det(a: &[Complex64], b: &[Complex64]) -> (Complex64, f64) {
    let m = a.len() - 1;
    let n = b.len() - 1;
    let size = m + n;
    if size == 0 {
        return (Complex64::new(1.0, 0.0), 1.0);
    }
    let mut mat = vec![vec![Complex64::zero(); size]; size];
    for r in 0..n {
        for (j, c) in a.iter().rev().enumerate() {
            mat[r][r + j] = *c;
        }
    }
    for r in 0..m {
        for (j, c) in b.iter().rev().enumerate() {
            mat[n + r][r + j] = *c;
        }
    }
    let mut log_scale = 0.0;
    for row in mat.iter_mut() {
        let n = row.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if n > 0.0 {
            row.iter_mut().for_each(|c| *c /= n);
            log_scale += n.ln();
        }
    }
    let (det, min_pivot) = lu_det(mat);
    (det * log_scale.exp(), min_pivot)
}

/// Determinant and the smallest pivot modulus.
fn lu_det(mut a: Vec<Vec<Complex64>>) -> (Complex64, f64) {
    let n = a.len();
    let mut det = Complex64::new(1.0, 0.0);
    let mut min_pivot = f64::INFINITY;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        let p = a[piv][col];
        min_pivot = min_pivot.min(p.norm());
        if p.is_zero() {
            return (Complex64::zero(), 0.0);
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= p;
        for r in col + 1..n {
            let f = a[r][col] / p;
            if f.is_zero() {
                continue;
            }
            for c in col..n {
                let t = a[col][c] * f;
                a[r][c] -= t;
            }
        }
    }
    (det, min_pivot)
}

pub fn solve_affine_system(a: &AffineSeries2, b: &AffineSeries2) -> Result<Vec<AffineSolution>> {
    solve_with_options(a, b, &SolveOptions::default())
}

pub fn solve_with_options(
    a: &AffineSeries2,
    b: &AffineSeries2,
    opts: &SolveOptions,
) -> Result<Vec<AffineSolution>> {
    let (a, m) = match effective(a) {
        Some(x) => x,
        None => return Err(Error::PositiveDimensional),
    };
    let (b, n) = match effective(b) {
        Some(x) => x,
        None => return Err(Error::PositiveDimensional),
    };
    if m == 0 || n == 0 {
        // a nonzero constant equation has no solutions
        return Ok(Vec::new());
    }
    let mut last_err = Error::IllConditioned { re: 0.0, im: 0.0 };
    for k in 0..3 {
        match solve_rotated(&a, &b, m, n, k, opts) {
            Ok(sols) => return Ok(sols),
            Err(Error::PositiveDimensional) => return Err(Error::PositiveDimensional),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

fn solve_rotated(
    a: &AffineSeries2,
    b: &AffineSeries2,
    m: usize,
    n: usize,
    k: usize,
    opts: &SolveOptions,
) -> Result<Vec<AffineSolution>> {
    let radius = opts.bound.map(|bd| bd * std::f64::consts::SQRT_2).unwrap_or(1.0);
    let el = eliminate(a, b, m, n, k, radius)?;
    // only rounding-level leading coefficients are dropped: small but genuine
    // ones belong to far solutions that the bound discards later
    let r = UnivariatePoly::with_tolerance(el.resultant.clone(), RESULTANT_STRIP);
    if r.degree() == 0 {
        return Ok(Vec::new());
    }
    let roots = roots_with_options(&r, &opts.roots)?;
    let xmax = opts
        .bound
        .map(|bd| bd * std::f64::consts::SQRT_2 * (1.0 + 1e-6))
        .unwrap_or(f64::INFINITY);
    let mut out = Vec::new();
    for root in roots.roots {
        let x = root.value * radius;
        if x.norm() > xmax {
            continue;
        }
        let ya = UnivariatePoly::with_tolerance(
            el.a_rows.iter().map(|p| p.evaluate(x)).collect(),
            RESULTANT_STRIP,
        );
        let yb = UnivariatePoly::with_tolerance(
            el.b_rows.iter().map(|p| p.evaluate(x)).collect(),
            RESULTANT_STRIP,
        );
        let y = match back_substitute(&ya, &yb, x, xmax, &opts.roots)? {
            Some(y) => y,
            None => continue,
        };
        let (mut u, mut v) = apply(&el.m, x, y);
        if root.multiplicity == 1 {
            (u, v) = newton_polish(a, b, u, v);
        }
        if let Some(bd) = opts.bound {
            let lim = bd * (1.0 + 1e-6);
            if u.norm() > lim || v.norm() > lim {
                continue;
            }
        }
        let residual = (a.evaluate(u, v).norm() / a.max_coeff())
            .max(b.evaluate(u, v).norm() / b.max_coeff());
        out.push(AffineSolution {
            point: (u, v),
            multiplicity: root.multiplicity,
            residual,
        });
    }
    Ok(out)
}

/// Picks the root `y` of `ya` at which `yb` is smallest; `None` when that
/// root lies beyond `ymax`.
fn back_substitute(
    ya: &UnivariatePoly,
    yb: &UnivariatePoly,
    x: Complex64,
    ymax: f64,
    ropts: &RootOptions,
) -> Result<Option<Complex64>> {
    if ya.degree() == 0 {
        return Err(Error::IllConditioned { re: x.re, im: x.im });
    }
    let cands = roots_with_options(ya, ropts)?;
    let nb = yb.coeff_norm().max(f64::MIN_POSITIVE);
    let deg = yb.degree() as i32;
    let mut scored: Vec<(f64, Complex64)> = cands
        .roots
        .iter()
        .map(|r| {
            let y = r.value;
            (yb.evaluate(y).norm() / (nb * y.norm().max(1.0).powi(deg)), y)
        })
        .collect();
    scored.sort_by(|p, q| p.0.total_cmp(&q.0));
    if scored.len() >= 2 {
        let (r0, y0) = scored[0];
        let (r1, y1) = scored[1];
        let near = y0.norm() <= ymax || y1.norm() <= ymax;
        if near && r1 <= 1e-6 && r1 <= 100.0 * r0.max(1e-14) && (y0 - y1).norm() > ropts.cluster_radius {
            return Err(Error::IllConditioned { re: x.re, im: x.im });
        }
    }
    Ok(scored.first().map(|s| s.1).filter(|y| y.norm() <= ymax))
}

fn newton_polish(
    a: &AffineSeries2,
    b: &AffineSeries2,
    mut u: Complex64,
    mut v: Complex64,
) -> (Complex64, Complex64) {
    let (na, nb) = (a.max_coeff(), b.max_coeff());
    if na == 0.0 || nb == 0.0 {
        return (u, v);
    }
    let (a, b) = (a.scale(Complex64::new(1.0 / na, 0.0)), b.scale(Complex64::new(1.0 / nb, 0.0)));
    let (au, av) = (a.derivative(0), a.derivative(1));
    let (bu, bv) = (b.derivative(0), b.derivative(1));
    let start = (u, v);
    let reach = 1e-4 * (1.0 + u.norm() + v.norm());
    for _ in 0..4 {
        let fa = a.evaluate(u, v);
        let fb = b.evaluate(u, v);
        let j = [
            [au.evaluate(u, v), av.evaluate(u, v)],
            [bu.evaluate(u, v), bv.evaluate(u, v)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.norm() == 0.0 {
            break;
        }
        let du = (j[1][1] * fa - j[0][1] * fb) / det;
        let dv = (j[0][0] * fb - j[1][0] * fa) / det;
        if !(du.re.is_finite() && du.im.is_finite() && dv.re.is_finite() && dv.im.is_finite()) {
            break;
        }
        let (nu, nv) = (u - du, v - dv);
        if (nu - start.0).norm() + (nv - start.1).norm() > reach {
            break;
        }
        let old = fa.norm().max(fb.norm());
        let new = a.evaluate(nu, nv).norm().max(b.evaluate(nu, nv).norm());
        if new > old {
            break;
        }
        u = nu;
        v = nv;
        if du.norm() + dv.norm() <= 1e-16 * (1.0 + u.norm() + v.norm()) {
            break;
        }
    }
    (u, v)
}

/// Intersection multiplicity of `{a = 0, b = 0}` at a known solution:
/// the order of the resultant at the projection of `point`, with Taylor
/// coefficients counted as zero below `rel_tol` times their l1 norm.
pub fn local_intersection_multiplicity(
    a: &AffineSeries2,
    b: &AffineSeries2,
    point: (Complex64, Complex64),
    rel_tol: f64,
) -> Result<usize> {
    let (a, m) = effective(a).ok_or(Error::PositiveDimensional)?;
    let (b, n) = effective(b).ok_or(Error::PositiveDimensional)?;
    if m == 0 || n == 0 {
        return Ok(0);
    }
    let mut last_err = Error::IllConditioned { re: 0.0, im: 0.0 };
    let mut orders = Vec::new();
    for k in 0..3 {
        match eliminate(&a, &b, m, n, k, 1.0) {
            Ok(el) => {
                let inv = [
                    [el.m[0][0].conj(), el.m[1][0].conj()],
                    [el.m[0][1].conj(), el.m[1][1].conj()],
                ];
                let (x, _) = apply(&inv, point.0, point.1);
                let r = UnivariatePoly::from_coeffs(el.resultant);
                orders.push(r.root_order_at(x, rel_tol));
                if orders.len() == 2 {
                    break;
                }
            }
            Err(Error::PositiveDimensional) => return Err(Error::PositiveDimensional),
            Err(e) => last_err = e,
        }
    }
    // a second projection guards against another solution sharing the
    // first projection; the true multiplicity is the smaller count
    orders.into_iter().min().ok_or(last_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn series(t: usize, terms: &[((usize, usize), f64)]) -> AffineSeries2 {
        AffineSeries2::from_terms(t, terms.iter().map(|&(e, x)| (e, c(x))))
    }

    fn total(s: &[AffineSolution]) -> usize {
        s.iter().map(|x| x.multiplicity).sum()
    }

    #[test]
    fn line_meets_parabola() {
        let a = series(2, &[((2, 0), 1.0), ((0, 0), -1.0)]);
        let b = series(2, &[((0, 1), 1.0), ((1, 0), -1.0)]);
        let sols = solve_affine_system(&a, &b).unwrap();
        assert_eq!(sols.len(), 2);
        for s in &sols {
            assert_eq!(s.multiplicity, 1);
            assert!((s.point.0 - s.point.1).norm() < 1e-12);
            assert!((s.point.0.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn squares_give_multiplicity_four() {
        let a = series(2, &[((2, 0), 1.0)]);
        let b = series(2, &[((0, 2), 1.0)]);
        let sols = solve_affine_system(&a, &b).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].multiplicity, 4);
        assert!(sols[0].point.0.norm() < 1e-6 && sols[0].point.1.norm() < 1e-6);
    }

    #[test]
    fn four_intersections_of_two_parabolas() {
        let a = series(2, &[((2, 0), 1.0), ((0, 1), -1.0)]);
        let b = series(2, &[((0, 2), 1.0), ((1, 0), -1.0)]);
        let sols = solve_affine_system(&a, &b).unwrap();
        assert_eq!(total(&sols), 4);
        // u^4 = u
        for s in &sols {
            let u = s.point.0;
            assert!((u.powi(4) - u).norm() < 1e-10, "{:?}", s);
            assert!((u * u - s.point.1).norm() < 1e-10);
        }
        assert!(sols.iter().any(|s| s.point.0.norm() < 1e-10));
        assert!(sols.iter().any(|s| (s.point.0 - c(1.0)).norm() < 1e-10));
    }

    #[test]
    fn common_factor_is_positive_dimensional() {
        // u (u - v) and u (u + v)
        let a = series(2, &[((2, 0), 1.0), ((1, 1), -1.0)]);
        let b = series(2, &[((2, 0), 1.0), ((1, 1), 1.0)]);
        assert_eq!(
            solve_affine_system(&a, &b).unwrap_err(),
            Error::PositiveDimensional
        );
    }

    #[test]
    fn local_multiplicity_counts_tangency() {
        // v = u^2 meets v = 0 with multiplicity 2 at the origin
        let a = series(2, &[((0, 1), 1.0), ((2, 0), -1.0)]);
        let b = series(2, &[((0, 1), 1.0), ((0, 0), 0.0)]);
        let z = (c(0.0), c(0.0));
        assert_eq!(local_intersection_multiplicity(&a, &b, z, 1e-8).unwrap(), 2);
        let b2 = series(2, &[((0, 1), 1.0), ((1, 0), -1.0)]);
        assert_eq!(local_intersection_multiplicity(&a, &b2, z, 1e-8).unwrap(), 1);
    }

    #[test]
    fn bound_filters_far_solutions() {
        let a = series(1, &[((1, 0), 1.0), ((0, 0), -3.0)]);
        let b = series(1, &[((0, 1), 1.0)]);
        let opts = SolveOptions {
            bound: Some(1.0),
            ..Default::default()
        };
        assert!(solve_with_options(&a, &b, &opts).unwrap().is_empty());
        assert_eq!(solve_affine_system(&a, &b).unwrap().len(), 1);
    }
}
