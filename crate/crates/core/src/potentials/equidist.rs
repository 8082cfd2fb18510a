use serde::Serialize;

use super::green::{curve_potentials, green};
use super::{mean_stderr, sharded};
use crate::error::Error;
use crate::map::{ProjMap, ProjPoint};
use crate::poly::HomogPoly3;

/// Potentials below `-CLIP_FLOOR` are excluded from the distance.
pub const CLIP_FLOOR: f64 = 30.0;
/// Truncation tolerance of the reference Green function.
pub const GREEN_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquidistRow {
    pub n: usize,
    pub l1_distance: f64,
    pub stderr: f64,
    pub clip_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquidistReport {
    pub curve: HomogPoly3,
    pub per_n: Vec<EquidistRow>,
    pub samples: usize,
    pub seed: u64,
    pub clip_floor: f64,
    pub green_tol: f64,
    /// Set unless the last distance is at most half the first and below it
    /// by more than two combined standard errors.
    pub nonconvergence: bool,
}

/// Monte Carlo `L^1(FS)` distance between the potentials of
/// `(k d^n)^-1 (f^n)^*[phi = 0]` and the Green function, `n = 0..=n_max`.
pub fn equidist_distance(f: &ProjMap, phi: &HomogPoly3, n_max: usize, samples: usize, seed: u64) -> EquidistReport {
    let width = 3 * (n_max + 1);
    let acc = sharded(samples, seed, width, |rng, count| {
        // per n: sum, sum of squares, clipped
        let mut acc = vec![0.0; width];
        for _ in 0..count {
            let x = ProjPoint::random(rng);
            let g = green(f, &x, GREEN_TOL).value;
            match curve_potentials(f, phi, n_max, &x) {
                Ok(v) => {
                    for (n, vn) in v.iter().enumerate() {
                        if *vn < -CLIP_FLOOR {
                            acc[3 * n + 2] += 1.0;
                        } else {
                            let e = (vn - g).abs();
                            acc[3 * n] += e;
                            acc[3 * n + 1] += e * e;
                        }
                    }
                }
                Err(Error::OnCurve) => {
                    for n in 0..=n_max {
                        acc[3 * n + 2] += 1.0;
                    }
                }
                Err(e) => unreachable!("curve potentials only fail on the curve: {e}"),
            }
        }
        acc
    });
    let total = samples as f64;
    let per_n: Vec<EquidistRow> = (0..=n_max)
        .map(|n| {
            let clipped = acc[3 * n + 2];
            let (mean, se) = mean_stderr(total - clipped, acc[3 * n], acc[3 * n + 1]);
            EquidistRow {
                n,
                l1_distance: mean,
                stderr: se,
                clip_fraction: if samples == 0 { 0.0 } else { clipped / total },
            }
        })
        .collect();
    let (first, last) = (&per_n[0], &per_n[n_max]);
    let gap = 2.0 * (first.stderr.powi(2) + last.stderr.powi(2)).sqrt();
    let converging = last.l1_distance <= 0.5 * first.l1_distance && last.l1_distance < first.l1_distance - gap;
    EquidistReport {
        curve: phi.clone(),
        per_n,
        samples,
        seed,
        clip_floor: CLIP_FLOOR,
        green_tol: GREEN_TOL,
        nonconvergence: !converging,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power_map() -> ProjMap {
        ProjMap::validate(["z^2", "w^2", "t^2"].map(|s| HomogPoly3::parse(s).unwrap())).unwrap()
    }

    #[test]
    fn generic_line_converges() {
        let f = power_map();
        let phi = HomogPoly3::parse("z + w + 2*t").unwrap();
        let r = equidist_distance(&f, &phi, 6, 2000, 1);
        assert!(!r.nonconvergence);
        assert!(r.per_n[6].l1_distance < 0.05);
        for row in &r.per_n {
            assert!(row.clip_fraction < 0.05);
        }
    }

    #[test]
    fn invariant_line_does_not() {
        let f = power_map();
        let r = equidist_distance(&f, &HomogPoly3::variable(0), 8, 2000, 2);
        assert!(r.nonconvergence);
        for row in &r.per_n {
            assert!((row.l1_distance - r.per_n[0].l1_distance).abs() < 1e-9);
            assert!(row.l1_distance >= 0.1);
        }
    }

    #[test]
    fn seeded_reports_repeat() {
        let f = power_map();
        let phi = HomogPoly3::parse("z - w + t").unwrap();
        assert_eq!(equidist_distance(&f, &phi, 3, 1500, 9), equidist_distance(&f, &phi, 3, 1500, 9));
    }
}
