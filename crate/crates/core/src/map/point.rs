use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::series::other_indices;

const PHASE_FLOOR: f64 = 1e-12;

/// A point of the projective plane stored as a unit vector whose first
/// nonzero coordinate is real and positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[Complex64; 3]", into = "[Complex64; 3]")]
pub struct ProjPoint {
    coords: [Complex64; 3],
}

impl TryFrom<[Complex64; 3]> for ProjPoint {
    type Error = Error;
    fn try_from(c: [Complex64; 3]) -> Result<Self> {
        ProjPoint::new(c)
    }
}

impl From<ProjPoint> for [Complex64; 3] {
    fn from(p: ProjPoint) -> Self {
        p.coords
    }
}

impl ProjPoint {
    pub fn new(coords: [Complex64; 3]) -> Result<Self> {
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        let norm = norm3(&coords);
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero vector is not a point".into()));
        }
        Ok(Self::normalize(coords, norm))
    }

    /// Normalizes a nonzero vector (debug-asserted).
    pub(crate) fn from_lift(coords: [Complex64; 3]) -> Self {
        let norm = norm3(&coords);
        debug_assert!(norm > 0.0 && norm.is_finite());
        Self::normalize(coords, norm)
    }

    fn normalize(coords: [Complex64; 3], norm: f64) -> Self {
        // rescale first to avoid overflow in the phase computation
        let mut c = coords.map(|x| x / norm);
        // the phase reference ignores rounding-level coordinates
        let lead = c
            .iter()
            .copied()
            .find(|x| x.norm() > PHASE_FLOOR)
            .unwrap_or(c[0]);
        let phase = lead.conj() / lead.norm();
        for x in c.iter_mut() {
            *x *= phase;
        }
        let n2 = norm3(&c);
        for x in c.iter_mut() {
            *x /= n2;
        }
        for x in c.iter_mut() {
            if x.norm() > PHASE_FLOOR {
                x.im = 0.0;
                break;
            }
        }
        ProjPoint { coords: c }
    }

    pub fn real(z: f64, w: f64, t: f64) -> Result<Self> {
        Self::new([
            Complex64::new(z, 0.0),
            Complex64::new(w, 0.0),
            Complex64::new(t, 0.0),
        ])
    }

    pub fn coords(&self) -> &[Complex64; 3] {
        &self.coords
    }

    /// Fubini-Study distance `sqrt(1 - |<x, y>|^2)`.
    pub fn distance(&self, other: &ProjPoint) -> f64 {
        // norm of the component of self orthogonal to other
        let ip: Complex64 = (0..3).map(|i| self.coords[i] * other.coords[i].conj()).sum();
        let r: [Complex64; 3] = std::array::from_fn(|i| self.coords[i] - ip * other.coords[i]);
        norm3(&r).min(1.0)
    }

    /// Index of the coordinate of largest modulus (lowest index on ties).
    pub fn chart(&self) -> usize {
        let mut best = 0;
        for i in 1..3 {
            if self.coords[i].norm() > self.coords[best].norm() {
                best = i;
            }
        }
        best
    }

    /// Affine coordinates in `chart`.
    pub fn affine(&self, chart: usize) -> Result<(Complex64, Complex64)> {
        let c = self.coords[chart];
        if c.norm() <= 1e-300 {
            return Err(Error::ChartUndefined { chart });
        }
        let o = other_indices(chart);
        Ok((self.coords[o[0]] / c, self.coords[o[1]] / c))
    }

    pub fn from_affine(chart: usize, uv: (Complex64, Complex64)) -> Result<Self> {
        let mut x = [Complex64::new(0.0, 0.0); 3];
        let o = other_indices(chart);
        x[chart] = Complex64::new(1.0, 0.0);
        x[o[0]] = uv.0;
        x[o[1]] = uv.1;
        Self::new(x)
    }

    /// A Fubini-Study distributed random point.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let c: [Complex64; 3] = std::array::from_fn(|_| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            if norm3(&c) > 1e-12 {
                return Self::from_lift(c);
            }
        }
    }
}

pub(crate) fn norm3(c: &[Complex64; 3]) -> f64 {
    let m = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * c.iter().map(|x| (x / m).norm_sqr()).sum::<f64>().sqrt()
}

impl std::fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .coords
            .iter()
            .map(|c| {
                if c.im == 0.0 {
                    format!("{:.6}", c.re)
                } else {
                    format!("{:.6}{:+.6}i", c.re, c.im)
                }
            })
            .collect();
        write!(f, "[{}]", parts.join(":"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn canonical_phase_and_norm() {
        let i = Complex64::new(0.0, 1.0);
        let p = ProjPoint::new([Complex64::new(0.0, 0.0), i * 3.0, Complex64::new(4.0, 0.0)]).unwrap();
        assert_eq!(p.coords()[0], Complex64::new(0.0, 0.0));
        assert_eq!(p.coords()[1].im, 0.0);
        assert!((p.coords()[1].re - 0.6).abs() < 1e-15);
        assert!((p.coords()[2] - Complex64::new(0.0, -0.8)).norm() < 1e-15);
    }

    #[test]
    fn distance_is_projective() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = ProjPoint::random(&mut rng);
        let l = Complex64::new(-2.0, 0.7);
        let q = ProjPoint::new(p.coords().map(|c| c * l)).unwrap();
        assert!(p.distance(&q) < 1e-14);
        assert!((ProjPoint::real(1.0, 0.0, 0.0).unwrap().distance(&ProjPoint::real(0.0, 1.0, 0.0).unwrap()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_is_rejected() {
        assert!(ProjPoint::real(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn affine_round_trip() {
        let p = ProjPoint::real(2.0, 1.0, 1.0).unwrap();
        assert_eq!(p.chart(), 0);
        let uv = p.affine(0).unwrap();
        assert!((uv.0 - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let q = ProjPoint::from_affine(0, uv).unwrap();
        assert!(p.distance(&q) < 1e-12);
    }
}
