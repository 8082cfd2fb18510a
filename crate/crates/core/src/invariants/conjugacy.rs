use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::lines::invariant_lines;
use super::{hermitian, line_basis};
use crate::error::{Error, Result};
use crate::map::{ProjMap, ProjPoint};
use crate::multiplicity::c_order;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalForm {
    /// `(P(z, w), Q(z, w))` homogeneous of the full degree.
    Homogeneous,
    /// `(z^D + w h(z, w), w^D)` with `{w = 0}` the invariant line.
    Skew,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugacyReport {
    pub period: usize,
    /// Degree `D = d^period` of the iterate.
    pub degree: usize,
    pub form: NormalForm,
    pub contraction: usize,
    pub terms: usize,
    /// Radius of the sample ball in the adapted chart.
    pub radius: f64,
    /// Largest deviation of the twisted map from the normal form.
    pub deviation: f64,
    /// `sup |eta| D^-terms`, the geometric bound on the product tail.
    pub tail_bound: f64,
    /// How far the numerators are from the shape of the normal form.
    pub form_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionGrowth {
    /// `c(p, f^n)` for `n = 1..`.
    pub c: Vec<usize>,
    /// `min_n c_n / d^n`.
    pub alpha: f64,
}

const SAMPLES: usize = 64;
const SEED: u64 = 0xc0de;

/// Period at most 3 of `p`, if any.
fn period_of(f: &ProjMap, p: &ProjPoint) -> Option<usize> {
    let mut x = *p;
    for k in 1..=3 {
        x = f.apply(&x);
        if x.distance(p) < 1e-8 {
            return Some(k);
        }
    }
    None
}

/// Unitary frame with last column `p`; with a line form `l` through `p`,
/// the first column lies on the line so that `l` becomes a multiple of `w`.
fn frame(p: &ProjPoint, line: Option<&[Complex64; 3]>) -> [[Complex64; 3]; 3] {
    let u2 = *p.coords();
    let u0 = match line {
        Some(l) => {
            let [a, b] = line_basis(l);
            // the unit vector of the line orthogonal to p
            let v: [Complex64; 3] = {
                let ca = hermitian(&u2, &a);
                let cb = hermitian(&u2, &b);
                std::array::from_fn(|i| a[i] * cb - b[i] * ca)
            };
            unit(v)
        }
        None => line_basis(&u2.map(|c| c.conj()))[0],
    };
    let cross = [
        u2[1] * u0[2] - u2[2] * u0[1],
        u2[2] * u0[0] - u2[0] * u0[2],
        u2[0] * u0[1] - u2[1] * u0[0],
    ];
    let u1 = unit(cross.map(|c| c.conj()));
    [u0, u1, u2]
}

fn unit(v: [Complex64; 3]) -> [Complex64; 3] {
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.map(|c| c / n)
}

/// The period iterate in the chart `t = 1` of the frame.
struct LocalMap<'a> {
    f: &'a ProjMap,
    period: usize,
    cols: [[Complex64; 3]; 3],
    scale: Complex64,
}

impl LocalMap<'_> {
    /// Lift in frame coordinates, normalized so that the third entry is 1 at 0.
    fn lift(&self, z: Complex64, w: Complex64) -> [Complex64; 3] {
        let c = &self.cols;
        let mut x: [Complex64; 3] = std::array::from_fn(|i| z * c[0][i] + w * c[1][i] + c[2][i]);
        for _ in 0..self.period {
            x = self.f.lift(&x);
        }
        [0, 1, 2].map(|k| hermitian(&c[k], &x) / self.scale)
    }

    /// `(H, F2, g)` at `(z, w)`.
    fn parts(&self, z: Complex64, w: Complex64) -> ([Complex64; 2], Complex64, [Complex64; 2]) {
        let g = self.lift(z, w);
        ([g[0], g[1]], g[2], [g[0] / g[2], g[1] / g[2]])
    }

    fn eta(&self, z: Complex64, w: Complex64) -> Complex64 {
        1.0 / self.lift(z, w)[2] - 1.0
    }

    /// Truncated product `phi_T` at `(z, w)`, or `None` if the orbit escapes.
    fn phi(&self, mut x: [Complex64; 2], terms: usize, degree: usize) -> Option<Complex64> {
        let mut acc = Complex64::new(1.0, 0.0);
        let mut pw = degree as f64;
        for _ in 0..terms {
            let (_, f2, g) = self.parts(x[0], x[1]);
            let e = 1.0 / f2;
            if (e - 1.0).norm() > 0.5 {
                return None;
            }
            acc *= e.powf(1.0 / pw);
            pw *= degree as f64;
            x = g;
        }
        Some(acc)
    }
}

/// Checks the local normal form at a superattracting point of `E2` by
/// evaluating the truncated conjugating product on a small ball.
pub fn conjugacy_check(f: &ProjMap, p: &ProjPoint, terms: usize) -> Result<ConjugacyReport> {
    if terms == 0 || terms > 30 {
        return Err(Error::InvalidArgument(format!("terms must be in 1..=30, got {terms}")));
    }
    let period = period_of(f, p).ok_or(Error::NotSuperattracting)?;
    // nilpotent derivative: the second iterate has no linear part
    if c_order(f, p, 2 * period)? < 2 {
        return Err(Error::NotSuperattracting);
    }
    let degree = f.degree().pow(period as u32);
    let contraction = c_order(f, p, period)?;
    let (form, line) = if contraction == degree {
        (NormalForm::Homogeneous, None)
    } else {
        let line = invariant_lines(f)
            .into_iter()
            .find(|l| l.contains(p, 1e-7))
            .ok_or_else(|| {
                Error::NoNormalForm(format!(
                    "c = {contraction} < {degree} and no invariant line passes through the point"
                ))
            })?;
        (NormalForm::Skew, Some(line.coeffs()))
    };
    let cols = frame(p, line.as_ref());
    let mut local = LocalMap {
        f,
        period,
        cols,
        scale: Complex64::new(1.0, 0.0),
    };
    local.scale = local.lift(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))[2];

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let unit_samples: Vec<[Complex64; 2]> = (0..SAMPLES)
        .map(|k| {
            let a = Complex64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(0.0..std::f64::consts::TAU));
            let b = Complex64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(0.0..std::f64::consts::TAU));
            // every fourth sample on the line w = 0
            if k % 4 == 0 {
                [a, Complex64::new(0.0, 0.0)]
            } else {
                [a * 0.7, b * 0.7]
            }
        })
        .collect();

    let mut radius = 0.1;
    let evaluations = loop {
        let pts: Vec<[Complex64; 2]> = unit_samples.iter().map(|s| [s[0] * radius, s[1] * radius]).collect();
        let ev: Option<Vec<_>> = pts
            .iter()
            .map(|x| {
                let (h, f2, g) = local.parts(x[0], x[1]);
                let phi0 = local.phi(*x, terms, degree)?;
                let phi1 = local.phi(g, terms, degree)?;
                Some((*x, h, f2, g, phi0, phi1))
            })
            .collect();
        match ev {
            Some(ev) => break ev,
            None if radius > 1e-6 => radius /= 2.0,
            None => return Err(Error::NotSuperattracting),
        }
    };

    let mut deviation: f64 = 0.0;
    let mut eta_sup: f64 = 0.0;
    let mut form_residual: f64 = 0.0;
    let mut h_sup: f64 = 0.0;
    for (x, h, _f2, g, phi0, phi1) in &evaluations {
        eta_sup = eta_sup.max(local.eta(x[0], x[1]).norm());
        let on_line = x[1].norm() == 0.0;
        let comps: &[usize] = match form {
            NormalForm::Homogeneous => &[0, 1],
            NormalForm::Skew if on_line => &[0, 1],
            NormalForm::Skew => &[1],
        };
        let half = local.parts(x[0] * 0.5, x[1] * 0.5).0;
        let twist = phi0.powf(degree as f64);
        for &i in comps {
            // psi(g x) against N(psi(x)) for psi = phi * id
            deviation = deviation.max((g[i] * phi1 - twist * h[i]).norm());
            form_residual = form_residual.max((half[i] * 2f64.powi(degree as i32) - h[i]).norm());
            h_sup = h_sup.max(h[i].norm());
        }
    }
    Ok(ConjugacyReport {
        period,
        degree,
        form,
        contraction,
        terms,
        radius,
        deviation,
        tail_bound: eta_sup * (degree as f64).powi(-(terms as i32)),
        form_residual: if h_sup > 0.0 { form_residual / h_sup } else { 0.0 },
    })
}

/// `c(p, f^n)` for `n = 1..=n_max` and the ratio `min c_n / d^n`.
pub fn contraction_growth(f: &ProjMap, p: &ProjPoint, n_max: usize) -> Result<ContractionGrowth> {
    let d = f.degree() as f64;
    let c: Vec<usize> = (1..=n_max).map(|n| c_order(f, p, n)).collect::<Result<_>>()?;
    let alpha = c
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 / d.powi(i as i32 + 1))
        .fold(f64::INFINITY, f64::min);
    Ok(ContractionGrowth { c, alpha })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::HomogPoly3;

    fn map(s: [&str; 3]) -> ProjMap {
        ProjMap::validate(s.map(|x| HomogPoly3::parse(x).unwrap())).unwrap()
    }

    fn origin() -> ProjPoint {
        ProjPoint::real(0.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn power_map_is_already_normal() {
        let r = conjugacy_check(&map(["z^2", "w^2", "t^2"]), &origin(), 10).unwrap();
        assert_eq!(r.form, NormalForm::Homogeneous);
        assert!(r.deviation < 1e-15, "{r:?}");
        assert!(r.tail_bound < 1e-15);
    }

    #[test]
    fn skew_point_converges() {
        let f = map(["z^2 + 0.5*w*t", "w^2", "t^2 + z*w"]);
        let a = conjugacy_check(&f, &origin(), 10).unwrap();
        let b = conjugacy_check(&f, &origin(), 20).unwrap();
        assert_eq!(a.form, NormalForm::Skew);
        assert!((b.tail_bound / a.tail_bound - 2f64.powi(-10)).abs() < 1e-12);
        assert!(b.deviation <= a.deviation + 1e-15);
        assert!(a.deviation < 1e-6, "{a:?}");
    }

    #[test]
    fn homogeneous_point_with_twist() {
        let f = map(["z^2 - 0.3*w^2", "0.5*z*w + w^2", "t^2 + 0.4*z*t + 0.2*w*t + 0.3*z*w"]);
        let r = conjugacy_check(&f, &origin(), 12).unwrap();
        assert_eq!(r.form, NormalForm::Homogeneous);
        assert!(r.form_residual < 1e-12);
        assert!(r.deviation < 1e-9, "{r:?}");
    }

    #[test]
    fn rejects_repelling_points() {
        let f = map(["z^2", "w^2", "t^2"]);
        let p = ProjPoint::real(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(conjugacy_check(&f, &p, 5), Err(Error::NotSuperattracting)));
    }

    #[test]
    fn contraction_growth_of_skew_point() {
        let f = map(["z^2 + 0.5*w*t", "w^2", "t^2 + z*w"]);
        let g = contraction_growth(&f, &origin(), 5).unwrap();
        assert_eq!(g.c[0], 1);
        assert!(g.alpha >= 0.49, "{g:?}");
        let h = contraction_growth(&map(["z^2", "w^2", "t^2"]), &origin(), 5).unwrap();
        assert_eq!(h.alpha, 1.0);
    }
}
