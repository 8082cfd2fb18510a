use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::fiber::{solve_in_charts, SolvedPoints};
use super::point::{norm3, ProjPoint};
use crate::error::{Error, Result};
use crate::poly::{jacobian_determinant, recenter_taylor, HomogPoly3};

/// Number of sphere samples behind the nondegeneracy certificate.
pub const SPHERE_SAMPLES: usize = 10_000;
const VALIDATION_SEED: u64 = 0x6d61_7076_616c;

/// A holomorphic self-map of the projective plane given by its lift.
#[derive(Clone, Debug, Serialize)]
pub struct ProjMap {
    degree: usize,
    components: [HomogPoly3; 3],
    nondegeneracy_residual: f64,
    log_norm_bound: f64,
}

/// Normalized orbit together with the accumulated log-norms of the lift.
#[derive(Clone, Debug, Serialize)]
pub struct LogOrbit {
    pub points: Vec<ProjPoint>,
    pub lognorms: Vec<f64>,
}

impl ProjMap {
    /// Checks equal degrees `d >= 2` and the absence of a common zero.
    pub fn validate(components: [HomogPoly3; 3]) -> Result<Self> {
        let degs = [
            components[0].degree(),
            components[1].degree(),
            components[2].degree(),
        ];
        if degs[0] != degs[1] || degs[1] != degs[2] {
            return Err(Error::DegreeMismatch(degs));
        }
        let d = degs[0];
        if d < 2 {
            return Err(Error::DegreeTooSmall { min: 2, got: d });
        }
        let map = Self::unchecked(components);
        map.check_common_zeros()?;
        if map.nondegeneracy_residual <= 0.0 || !map.nondegeneracy_residual.is_finite() {
            return Err(Error::DegenerateMap {
                point: [(0.0, 0.0); 3],
            });
        }
        Ok(map)
    }

    /// Builds the map and its sampled certificates without solving for
    /// common zeros. Used for iterates of maps that are already valid.
    pub(crate) fn unchecked(components: [HomogPoly3; 3]) -> Self {
        let degree = components[0].degree();
        let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
        let mut min_norm = f64::INFINITY;
        let mut max_log: f64 = 0.0;
        for _ in 0..SPHERE_SAMPLES {
            let x = ProjPoint::random(&mut rng);
            let n = norm3(&lift_of(&components, x.coords()));
            min_norm = min_norm.min(n);
            max_log = max_log.max(n.ln().abs());
        }
        ProjMap {
            degree,
            components,
            nondegeneracy_residual: min_norm,
            log_norm_bound: max_log,
        }
    }

    fn check_common_zeros(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED ^ 1);
        let scale: f64 = self.components.iter().map(|c| c.coeff_norm()).sum();
        for attempt in 0..3 {
            let mix: [[Complex64; 3]; 2] = std::array::from_fn(|_| {
                std::array::from_fn(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            });
            let eqs: [HomogPoly3; 2] = std::array::from_fn(|r| {
                let mut acc = HomogPoly3::zero(self.degree);
                for (k, c) in self.components.iter().enumerate() {
                    acc = acc.add(&c.scale(mix[r][k])).expect("equal degrees");
                }
                acc
            });
            let d = self.degree;
            let solved = solve_in_charts(d * d, |chart| {
                Ok((
                    recenter_taylor(&eqs[0], chart, zero2(), d)?,
                    recenter_taylor(&eqs[1], chart, zero2(), d)?,
                ))
            });
            match solved {
                Ok(SolvedPoints { points, .. }) => {
                    for p in points {
                        let n = norm3(&self.lift(p.point.coords()));
                        if n <= 1e-6 * scale {
                            return Err(Error::DegenerateMap {
                                point: p.point.coords().map(|c| (c.re, c.im)),
                            });
                        }
                    }
                    return Ok(());
                }
                Err(Error::PositiveDimensional) if attempt < 2 => continue,
                Err(Error::PositiveDimensional) => break,
                Err(e) => return Err(e),
            }
        }
        // the combinations share a curve: report the worst sampled point
        let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
        let worst = (0..SPHERE_SAMPLES)
            .map(|_| ProjPoint::random(&mut rng))
            .min_by(|a, b| {
                norm3(&self.lift(a.coords())).total_cmp(&norm3(&self.lift(b.coords())))
            })
            .unwrap();
        Err(Error::DegenerateMap {
            point: worst.coords().map(|c| (c.re, c.im)),
        })
    }

    /// Random map of degree `d` with coefficients uniform in the unit disk,
    /// resampled until it validates.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Self> {
        const ATTEMPTS: usize = 100;
        for _ in 0..ATTEMPTS {
            let comps: [HomogPoly3; 3] = std::array::from_fn(|_| random_form(d, rng));
            if let Ok(f) = Self::validate(comps) {
                return Ok(f);
            }
        }
        Err(Error::GenerationFailed { attempts: ATTEMPTS })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &[HomogPoly3; 3] {
        &self.components
    }

    /// Minimum of `|F|` over the sphere sample.
    pub fn nondegeneracy_residual(&self) -> f64 {
        self.nondegeneracy_residual
    }

    /// Maximum of `|log |F||` over the sphere sample.
    pub fn log_norm_bound(&self) -> f64 {
        self.log_norm_bound
    }

    pub fn lift(&self, x: &[Complex64; 3]) -> [Complex64; 3] {
        lift_of(&self.components, x)
    }

    pub fn apply(&self, x: &ProjPoint) -> ProjPoint {
        ProjPoint::from_lift(self.lift(x.coords()))
    }

    pub fn iterate_lognorm(&self, x0: &ProjPoint, n: usize) -> LogOrbit {
        let mut points = Vec::with_capacity(n + 1);
        let mut lognorms = Vec::with_capacity(n + 1);
        let mut x = *x0;
        let mut a = 0.0;
        points.push(x);
        lognorms.push(a);
        let d = self.degree as f64;
        for _ in 0..n {
            let y = self.lift(x.coords());
            a = d * a + norm3(&y).ln();
            x = ProjPoint::from_lift(y);
            points.push(x);
            lognorms.push(a);
        }
        LogOrbit { points, lognorms }
    }

    /// `self` after `g`, with coefficients rescaled to unit size.
    pub fn compose(&self, g: &ProjMap) -> ProjMap {
        let comps: [HomogPoly3; 3] = std::array::from_fn(|i| {
            self.components[i]
                .compose(&g.components)
                .expect("degrees match")
        });
        let s = comps.iter().map(|c| c.coeff_norm()).fold(0.0, f64::max);
        let comps = comps.map(|c| c.scale(Complex64::new(1.0 / s, 0.0)));
        Self::unchecked(comps)
    }

    /// The `k`-th iterate as a map of degree `d^k`.
    pub fn iterate_map(&self, k: usize) -> ProjMap {
        assert!(k >= 1);
        let mut out = self.clone();
        for _ in 1..k {
            out = self.compose(&out);
        }
        out
    }

    /// Jacobian determinant of the lift, of degree `3(d - 1)`.
    pub fn jacobian(&self) -> HomogPoly3 {
        jacobian_determinant(&self.components)
    }
}

/// Uniform sample from the unit disk.
pub fn unit_disk<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    loop {
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if c.norm_sqr() <= 1.0 {
            return c;
        }
    }
}

/// Form of degree `d` with unit-disk coefficients.
pub fn random_form<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HomogPoly3 {
    let coeffs = (0..crate::poly::monomial_count(d)).map(|_| unit_disk(rng)).collect();
    HomogPoly3::new(d, coeffs).expect("length matches")
}

pub(crate) fn zero2() -> (Complex64, Complex64) {
    (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
}

fn lift_of(c: &[HomogPoly3; 3], x: &[Complex64; 3]) -> [Complex64; 3] {
    [c[0].evaluate(x), c[1].evaluate(x), c[2].evaluate(x)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::HomogPoly3;

    fn map(s: [&str; 3]) -> Result<ProjMap> {
        ProjMap::validate(s.map(|x| HomogPoly3::parse(x).unwrap()))
    }

    #[test]
    fn power_map_is_valid() {
        let f = map(["z^2", "w^2", "t^2"]).unwrap();
        assert_eq!(f.degree(), 2);
        assert!(f.nondegeneracy_residual() > 0.1);
    }

    #[test]
    fn common_zero_is_reported() {
        match map(["z^2", "w^2", "z*w"]) {
            Err(Error::DegenerateMap { point }) => {
                let p = ProjPoint::new(point.map(|(a, b)| Complex64::new(a, b))).unwrap();
                assert!(p.distance(&ProjPoint::real(0.0, 0.0, 1.0).unwrap()) < 1e-4);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn example_map_is_valid() {
        assert!(map(["2*z*t + w^2", "z^2", "t^2"]).is_ok());
    }

    #[test]
    fn degree_checks() {
        assert!(matches!(map(["z^2", "w", "t^2"]), Err(Error::DegreeMismatch(_))));
        assert!(matches!(map(["z", "w", "t"]), Err(Error::DegreeTooSmall { .. })));
    }

    #[test]
    fn apply_examples() {
        let f = map(["z^2", "w^2", "t^2"]).unwrap();
        let y = f.apply(&ProjPoint::real(2.0, 1.0, 1.0).unwrap());
        assert!(y.distance(&ProjPoint::real(4.0, 1.0, 1.0).unwrap()) < 1e-15);
        let p = ProjPoint::real(1.0, 1.0, 1.0).unwrap();
        assert!(f.apply(&p).distance(&p) < 1e-15);
        let g = map(["2*z*t + w^2", "z^2", "t^2"]).unwrap();
        let y = g.apply(&ProjPoint::real(0.0, 1.0, 0.0).unwrap());
        assert!(y.distance(&ProjPoint::real(1.0, 0.0, 0.0).unwrap()) < 1e-15);
    }

    #[test]
    fn lognorm_recurrence() {
        let f = map(["z^2", "w^2", "t^2"]).unwrap();
        let o = f.iterate_lognorm(&ProjPoint::real(1.0, 0.0, 0.0).unwrap(), 5);
        assert!(o.lognorms.iter().all(|a| *a == 0.0));
        let x = ProjPoint::real(2.0, 1.0, 1.0).unwrap();
        let o = f.iterate_lognorm(&x, 2);
        assert_eq!(o.lognorms[0], 0.0);
        // F(x/|x|) = (4, 1, 1) / 6
        let a1 = (18f64.sqrt() / 6.0).ln();
        assert!((o.lognorms[1] - a1).abs() < 1e-14);
        // a_2 = log |F^2(x)| - 4 log |x| = log |(16, 1, 1)| - 2 log 6
        let a2 = 258f64.sqrt().ln() - 2.0 * 6f64.ln();
        assert!((o.lognorms[2] - a2).abs() < 1e-13);
    }

    #[test]
    fn iterate_map_matches_iteration() {
        let f = map(["2*z*t + w^2", "z^2", "t^2 + z*w"]).unwrap();
        let f3 = f.iterate_map(3);
        assert_eq!(f3.degree(), 8);
        let x = ProjPoint::real(0.3, -0.2, 1.0).unwrap();
        let y = f.apply(&f.apply(&f.apply(&x)));
        assert!(f3.apply(&x).distance(&y) < 1e-12);
    }
}
