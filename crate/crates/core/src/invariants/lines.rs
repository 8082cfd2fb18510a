use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::binary::{BinaryForm, LineMap};
use super::{hermitian, line_basis, solve_small};
use crate::map::projmap::unit_disk;
use crate::map::{ProjMap, ProjPoint};
use crate::poly::HomogPoly3;

/// A line `{l = 0}` with `l o F = lambda * l^d`.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantLine {
    /// Linear form with unit coefficient vector, largest coefficient real positive.
    pub form: HomogPoly3,
    pub lambda: Complex64,
    /// `|l o F - lambda l^d| / |l o F|` on coefficient vectors.
    pub residual: f64,
}

impl InvariantLine {
    /// Coefficients of `z`, `w`, `t`.
    pub fn coeffs(&self) -> [Complex64; 3] {
        [self.form.coeff(1, 0, 0), self.form.coeff(0, 1, 0), self.form.coeff(0, 0, 1)]
    }

    /// `|l(p)|` for a unit representative of `p`.
    pub fn distance(&self, p: &ProjPoint) -> f64 {
        let c = self.coeffs();
        let x = p.coords();
        (0..3).map(|i| c[i] * x[i]).sum::<Complex64>().norm()
    }

    pub fn contains(&self, p: &ProjPoint, tol: f64) -> bool {
        self.distance(p) <= tol
    }

    /// Orthonormal basis of the line.
    pub fn basis(&self) -> [[Complex64; 3]; 2] {
        line_basis(&self.coeffs())
    }

    /// A point of the line from two complex weights on its basis.
    pub fn point(&self, a: Complex64, b: Complex64) -> ProjPoint {
        let [p, q] = self.basis();
        ProjPoint::new(std::array::from_fn(|i| a * p[i] + b * q[i])).expect("independent basis")
    }

    /// Weights of `p` on the basis; meaningful for points of the line.
    pub fn weights(&self, p: &ProjPoint) -> [Complex64; 2] {
        let [b0, b1] = self.basis();
        [hermitian(&b0, p.coords()), hermitian(&b1, p.coords())]
    }

    /// `f` on the line in the coordinates of [`InvariantLine::basis`].
    pub fn restriction(&self, f: &ProjMap) -> LineMap {
        let [b0, b1] = self.basis();
        let comps = f.components();
        let parts: Vec<BinaryForm> = comps.iter().map(|c| BinaryForm::restrict(c, &b0, &b1)).collect();
        let project = |e: &[Complex64; 3]| {
            let n = parts[0].degree() + 1;
            BinaryForm::new(
                (0..n)
                    .map(|k| (0..3).map(|i| e[i].conj() * parts[i].coeffs()[k]).sum())
                    .collect(),
            )
        };
        LineMap {
            a: project(&b0),
            b: project(&b1),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LineSearch {
    /// Starts per normalization chart.
    pub starts: usize,
    pub line_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for LineSearch {
    fn default() -> Self {
        LineSearch {
            starts: 200,
            line_tol: 1e-7,
            max_iter: 80,
            seed: 0x11e5,
        }
    }
}

pub fn invariant_lines(f: &ProjMap) -> Vec<InvariantLine> {
    invariant_lines_with(f, &LineSearch::default())
}

/// Totally invariant lines by damped Gauss-Newton multistart on
/// `l o F = lambda l^d`, one coefficient of `l` fixed to 1 per chart.
pub fn invariant_lines_with(f: &ProjMap, opts: &LineSearch) -> Vec<InvariantLine> {
    let sys = LineSystem::new(f);
    let jobs: Vec<(usize, usize)> = (0..3)
        .flat_map(|c| (0..opts.starts).map(move |i| (c, i)))
        .collect();
    let mut found: Vec<InvariantLine> = jobs
        .par_iter()
        .filter_map(|&(chart, i)| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream((chart * opts.starts + i) as u64);
            let mut l = [Complex64::new(0.0, 0.0); 3];
            for (k, x) in l.iter_mut().enumerate() {
                *x = if k == chart {
                    Complex64::new(1.0, 0.0)
                } else {
                    unit_disk(&mut rng) * 2.0
                };
            }
            let l = sys.refine(l, chart, opts.max_iter)?;
            let line = sys.finish(f, l);
            (line.residual <= opts.line_tol).then_some(line)
        })
        .collect();
    found.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    let mut out: Vec<InvariantLine> = Vec::new();
    for line in found {
        let c = line.coeffs();
        let dup = out.iter().any(|o| hermitian(&o.coeffs(), &c).norm() > 1.0 - 1e-8);
        if !dup {
            out.push(line);
        }
    }
    out.truncate(3);
    // deterministic order: by the position of the largest coefficient, then lexicographic
    out.sort_by(|a, b| order_key(&a.coeffs()).partial_cmp(&order_key(&b.coeffs())).unwrap());
    out
}

fn order_key(c: &[Complex64; 3]) -> (usize, f64, f64, f64) {
    let mut best = 0;
    for i in 1..3 {
        if c[i].norm() > c[best].norm() + 1e-9 {
            best = i;
        }
    }
    (best, -c[0].norm(), -c[1].norm(), -c[2].norm())
}

struct LineSystem {
    d: usize,
    /// Components scaled to unit coefficient norm.
    comps: [HomogPoly3; 3],
}

impl LineSystem {
    fn new(f: &ProjMap) -> Self {
        let s = f.components().iter().map(|c| c.coeff_norm()).fold(0.0, f64::max);
        let comps = f.components().clone().map(|c| c.scale(Complex64::new(1.0 / s, 0.0)));
        LineSystem { d: f.degree(), comps }
    }

    fn pullback(&self, l: &[Complex64; 3]) -> Vec<Complex64> {
        let n = self.comps[0].coeffs().len();
        (0..n)
            .map(|m| (0..3).map(|i| l[i] * self.comps[i].coeffs()[m]).sum())
            .collect()
    }

    /// Least-squares `lambda` for a given `l`, with `l^d`.
    fn best_lambda(&self, l: &[Complex64; 3]) -> (Complex64, Vec<Complex64>, Vec<Complex64>) {
        let pb = self.pullback(l);
        let ld = HomogPoly3::linear(l[0], l[1], l[2]).pow(self.d);
        let ldc = ld.coeffs().to_vec();
        let den: f64 = ldc.iter().map(|c| c.norm_sqr()).sum();
        let num: Complex64 = ldc.iter().zip(&pb).map(|(a, b)| a.conj() * b).sum();
        let lambda = if den > 0.0 { num / den } else { Complex64::new(0.0, 0.0) };
        (lambda, pb, ldc)
    }

    fn residual(&self, l: &[Complex64; 3], lambda: Complex64) -> (Vec<Complex64>, f64) {
        let pb = self.pullback(l);
        let ld = HomogPoly3::linear(l[0], l[1], l[2]).pow(self.d);
        let r: Vec<Complex64> = pb.iter().zip(ld.coeffs()).map(|(a, b)| a - lambda * b).collect();
        let n = r.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        (r, n)
    }

    /// Levenberg-Marquardt in the two free coefficients and `lambda`.
    fn refine(&self, mut l: [Complex64; 3], chart: usize, max_iter: usize) -> Option<[Complex64; 3]> {
        let free: Vec<usize> = (0..3).filter(|&k| k != chart).collect();
        let (mut lambda, _, _) = self.best_lambda(&l);
        let (mut r, mut norm) = self.residual(&l, lambda);
        let mut damping = 1e-3;
        for _ in 0..max_iter {
            if norm < 1e-15 {
                break;
            }
            let dm1 = HomogPoly3::linear(l[0], l[1], l[2]).pow(self.d - 1);
            let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(3);
            for &k in &free {
                let e = HomogPoly3::variable(k);
                let dl = dm1.mul(&e).scale(Complex64::new(self.d as f64, 0.0));
                cols.push(
                    self.comps[k]
                        .coeffs()
                        .iter()
                        .zip(dl.coeffs())
                        .map(|(a, b)| a - lambda * b)
                        .collect(),
                );
            }
            let ld = dm1.mul(&HomogPoly3::linear(l[0], l[1], l[2]));
            cols.push(ld.coeffs().iter().map(|c| -c).collect());
            let jhj: Vec<Vec<Complex64>> = (0..3)
                .map(|a| {
                    (0..3)
                        .map(|b| cols[a].iter().zip(&cols[b]).map(|(x, y)| x.conj() * y).sum())
                        .collect()
                })
                .collect();
            let jhr: Vec<Complex64> = (0..3)
                .map(|a| -cols[a].iter().zip(&r).map(|(x, y)| x.conj() * y).sum::<Complex64>())
                .collect();
            let mut improved = false;
            for _ in 0..12 {
                let mut m = jhj.clone();
                for (a, row) in m.iter_mut().enumerate() {
                    row[a] += damping * (1.0 + jhj[a][a].re);
                }
                let Some(step) = solve_small(m, jhr.clone()) else {
                    damping *= 10.0;
                    continue;
                };
                let mut nl = l;
                nl[free[0]] += step[0];
                nl[free[1]] += step[1];
                let nlambda = lambda + step[2];
                let (nr, nn) = self.residual(&nl, nlambda);
                if nn < norm {
                    l = nl;
                    lambda = nlambda;
                    r = nr;
                    let small = step.iter().map(|s| s.norm()).sum::<f64>() < 1e-15;
                    norm = nn;
                    damping = (damping / 3.0).max(1e-12);
                    improved = !small;
                    break;
                }
                damping *= 4.0;
            }
            if !improved {
                break;
            }
        }
        l.iter().all(|c| c.re.is_finite() && c.im.is_finite()).then_some(l)
    }

    fn finish(&self, f: &ProjMap, l: [Complex64; 3]) -> InvariantLine {
        let mut big = 0;
        for i in 1..3 {
            if l[i].norm() > l[big].norm() {
                big = i;
            }
        }
        let n = l.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let phase = l[big].conj() / l[big].norm();
        let mut u = l.map(|c| c * phase / n);
        // rounding-level entries are exact zeros in the usual cases
        for c in u.iter_mut() {
            if c.norm() < 1e-13 {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        let (lambda, pb, ldc) = self.best_lambda(&u);
        let r: f64 = pb
            .iter()
            .zip(&ldc)
            .map(|(a, b)| (a - lambda * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let pbn = pb.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        // lambda against the unscaled lift
        let s = f.components().iter().map(|c| c.coeff_norm()).fold(0.0, f64::max);
        InvariantLine {
            form: HomogPoly3::linear(u[0], u[1], u[2]),
            lambda: lambda * s,
            residual: if pbn > 0.0 { r / pbn } else { f64::INFINITY },
        }
    }
}
