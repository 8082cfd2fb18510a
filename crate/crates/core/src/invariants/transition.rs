use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::lines::invariant_lines;
use crate::error::{Error, Result};
use crate::map::{ProjMap, ProjPoint};
use crate::poly::{roots_univariate, HomogPoly3, UnivariatePoly};

#[derive(Clone, Debug, Serialize)]
pub struct TransitionMatrix {
    pub components: Vec<HomogPoly3>,
    /// `t[i][j]`: generic vanishing order of `phi_i o F` along `V_j`.
    pub t: Vec<Vec<u32>>,
    pub rho: f64,
    /// Nonnegative eigenvector of `t^T` for `rho`, unit sup norm.
    pub perron: Vec<f64>,
}

const SEED: u64 = 0x7a11;
/// Relative size below which the Jacobian counts as vanishing.
const VANISH: f64 = 1e-8;

/// Critical transition matrix of `f` for the given irreducible factors of
/// the Jacobian, or for its linear factors when none are given.
pub fn transition_matrix(f: &ProjMap, components: Option<&[HomogPoly3]>) -> Result<TransitionMatrix> {
    let comps: Vec<HomogPoly3> = match components {
        Some(c) => c.to_vec(),
        None => linear_critical_factors(f)?,
    };
    let jac = f.jacobian();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut samples = Vec::with_capacity(comps.len());
    for (j, phi) in comps.iter().enumerate() {
        if phi.degree() == 0 || phi.is_zero() {
            return Err(Error::ComponentInvalid {
                index: j,
                reason: "constant".into(),
            });
        }
        for (i, other) in comps[..j].iter().enumerate() {
            if proportional(phi, other) {
                return Err(Error::ComponentInvalid {
                    index: j,
                    reason: format!("proportional to component {i}"),
                });
            }
        }
        let pts = smooth_points(phi, 5, &mut rng)?;
        if pts.len() < 5 {
            return Err(Error::ComponentInvalid {
                index: j,
                reason: "no smooth points found".into(),
            });
        }
        for (x, _) in &pts {
            if !super::vanishes_at(&jac, x, VANISH) {
                return Err(Error::ComponentInvalid {
                    index: j,
                    reason: "the Jacobian does not vanish on it".into(),
                });
            }
        }
        samples.push(pts[0]);
    }

    let k = comps.len();
    let mut t = vec![vec![0u32; k]; k];
    for (i, phi) in comps.iter().enumerate() {
        let pulled = phi.compose(f.components())?;
        for (j, (x0, v)) in samples.iter().enumerate() {
            t[i][j] = slope_order(&pulled.restrict_to_line(x0, v))?;
        }
    }
    let (rho, perron) = perron(&t);
    Ok(TransitionMatrix {
        components: comps,
        t,
        rho,
        perron,
    })
}

fn proportional(a: &HomogPoly3, b: &HomogPoly3) -> bool {
    if a.degree() != b.degree() {
        return false;
    }
    let ip: Complex64 = a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    ip.norm() > (1.0 - 1e-9) * na * nb
}

fn random_vec(rng: &mut ChaCha8Rng) -> [Complex64; 3] {
    *ProjPoint::random(rng).coords()
}

/// Simple zeros of `phi` on random lines `a + s b`, returned with the line
/// direction `b`, which is transverse there.
fn smooth_points(
    phi: &HomogPoly3,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<([Complex64; 3], [Complex64; 3])>> {
    let mut out = Vec::new();
    for _ in 0..4 * count {
        if out.len() >= count {
            break;
        }
        let a = random_vec(rng);
        let b = random_vec(rng);
        let q = phi.restrict_to_line(&a, &b);
        if q.degree() == 0 {
            continue;
        }
        let roots = roots_univariate(&q)?;
        if let Some(r) = roots
            .roots
            .iter()
            .filter(|r| r.multiplicity == 1 && r.value.norm() < 10.0)
            .min_by(|x, y| x.value.norm().total_cmp(&y.value.norm()))
        {
            let x: [Complex64; 3] = std::array::from_fn(|i| a[i] + r.value * b[i]);
            out.push((x, b));
        }
    }
    Ok(out)
}

/// Order at `s = 0` from the slope of `log |q(s)|` against `log s`, after
/// coefficients at rounding level are cleared.
fn slope_order(q: &UnivariatePoly) -> Result<u32> {
    let norm = q.coeff_norm();
    let cleaned = UnivariatePoly::with_tolerance(
        q.coeffs()
            .iter()
            .map(|c| if c.norm() <= 1e-10 * norm { Complex64::new(0.0, 0.0) } else { *c })
            .collect(),
        0.0,
    );
    if cleaned.is_zero() {
        return Err(Error::NonIntegerOrder { slope: f64::INFINITY });
    }
    let xs: Vec<f64> = (12..=20).map(|k| -(k as f64) * std::f64::consts::LN_2).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| cleaned.evaluate(Complex64::new(x.exp(), 0.0)).norm().ln())
        .collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let r = slope.round();
    if !slope.is_finite() || (slope - r).abs() > 0.1 || r < 0.0 {
        return Err(Error::NonIntegerOrder { slope });
    }
    Ok(r as u32)
}

/// Spectral radius and Perron vector of `t^T` by power iteration on `t^T + I`.
pub(crate) fn perron(t: &[Vec<u32>]) -> (f64, Vec<f64>) {
    let k = t.len();
    if k == 0 {
        return (0.0, Vec::new());
    }
    let mut a = vec![1.0; k];
    let mut lambda = 1.0;
    for _ in 0..100_000 {
        let mut b: Vec<f64> = (0..k)
            .map(|i| a[i] + (0..k).map(|j| t[j][i] as f64 * a[j]).sum::<f64>())
            .collect();
        let m = b.iter().cloned().fold(0.0, f64::max);
        for x in b.iter_mut() {
            *x /= m;
        }
        let change = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        a = b;
        lambda = m;
        if change < 1e-12 {
            break;
        }
    }
    (lambda - 1.0, a)
}

/// Linear factors of the Jacobian: invariant lines and lines through pairs of
/// critical points on two random lines, kept when the Jacobian vanishes
/// along them.
fn linear_critical_factors(f: &ProjMap) -> Result<Vec<HomogPoly3>> {
    let jac = f.jacobian();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
    let mut forms: Vec<[Complex64; 3]> = invariant_lines(f).iter().map(|l| l.coeffs()).collect();
    let crit = |rng: &mut ChaCha8Rng| -> Result<Vec<[Complex64; 3]>> {
        let a = random_vec(rng);
        let b = random_vec(rng);
        let q = jac.restrict_to_line(&a, &b);
        if q.degree() == 0 {
            return Ok(Vec::new());
        }
        Ok(roots_univariate(&q)?
            .roots
            .iter()
            .map(|r| std::array::from_fn(|i| a[i] + r.value * b[i]))
            .collect())
    };
    let first = crit(&mut rng)?;
    let second = crit(&mut rng)?;
    for x in &first {
        for y in &second {
            forms.push(unit_form(cross(x, y)));
        }
    }
    let mut out: Vec<[Complex64; 3]> = Vec::new();
    for l in forms {
        let l = unit_form(l);
        if out.iter().any(|o| super::hermitian(o, &l).norm() > 1.0 - 1e-8) {
            continue;
        }
        if vanishes_on_line(&jac, &l) {
            out.push(l);
        }
    }
    out.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    Ok(out
        .into_iter()
        .map(|l| HomogPoly3::linear(l[0], l[1], l[2]))
        .collect())
}

fn key(c: &[Complex64; 3]) -> (usize, f64, f64, f64) {
    let mut best = 0;
    for i in 1..3 {
        if c[i].norm() > c[best].norm() + 1e-9 {
            best = i;
        }
    }
    (best, -c[0].norm(), -c[1].norm(), -c[2].norm())
}

fn cross(x: &[Complex64; 3], y: &[Complex64; 3]) -> [Complex64; 3] {
    [
        x[1] * y[2] - x[2] * y[1],
        x[2] * y[0] - x[0] * y[2],
        x[0] * y[1] - x[1] * y[0],
    ]
}

/// Unit norm with the largest coefficient real positive; tiny entries zeroed.
fn unit_form(l: [Complex64; 3]) -> [Complex64; 3] {
    let mut big = 0;
    for i in 1..3 {
        if l[i].norm() > l[big].norm() {
            big = i;
        }
    }
    let n = l.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let phase = l[big].conj() / l[big].norm();
    l.map(|c| {
        let x = c * phase / n;
        if x.norm() < 1e-12 {
            Complex64::new(0.0, 0.0)
        } else {
            x
        }
    })
}

fn vanishes_on_line(jac: &HomogPoly3, l: &[Complex64; 3]) -> bool {
    let [p, q] = super::line_basis(l);
    (0..6).all(|k| {
        let s = Complex64::from_polar(0.5 + 0.3 * k as f64, 1.1 * k as f64);
        let x: [Complex64; 3] = std::array::from_fn(|i| p[i] + s * q[i]);
        super::vanishes_at(jac, &x, VANISH)
    })
}
