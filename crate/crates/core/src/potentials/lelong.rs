use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::fit::weighted_line;
use crate::error::{Error, Result};

/// Boundary points sampled per radius.
pub const BOUNDARY_SAMPLES: usize = 64;
/// Largest admissible root-mean-square residual of a slope fit.
pub const FIT_LIMIT: f64 = 0.1;
const ANGLE_SEED: u64 = 0x1e10;

/// `2^-4, ..., 2^-14`.
pub fn default_r_grid() -> Vec<f64> {
    (4..=14).map(|k| 2f64.powi(-k)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LelongEstimate {
    pub point: (Complex64, Complex64),
    pub value: f64,
    pub r_grid: Vec<f64>,
    pub fit_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KiselmanEstimate {
    pub point: (Complex64, Complex64),
    pub weights: (f64, f64),
    pub slope: f64,
    pub r_grid: Vec<f64>,
    pub fit_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    pub alpha: f64,
    /// Largest estimate over the sampled points.
    pub sup_estimate: f64,
    /// Index of the point attaining it.
    pub argmax: usize,
}

/// Fits `sup` against `log r` after dropping the largest radius. Smaller
/// radii get larger weights `-log r`.
fn slope_fit(r_grid: &[f64], sups: &[f64]) -> Result<(f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = r_grid.iter().copied().zip(sups.iter().copied()).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let kept = &pairs[1.min(pairs.len())..];
    if kept.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "slope fits need at least 6 radii, got {}",
            r_grid.len()
        )));
    }
    if kept.iter().any(|(_, s)| !s.is_finite()) {
        return Err(Error::FitUnstable { residual: f64::INFINITY, limit: FIT_LIMIT });
    }
    let x: Vec<f64> = kept.iter().map(|(r, _)| r.ln()).collect();
    let y: Vec<f64> = kept.iter().map(|(_, s)| *s).collect();
    let w: Vec<f64> = x.iter().map(|v| -v).collect();
    let fit = weighted_line(&x, &y, &w).ok_or(Error::FitUnstable { residual: f64::NAN, limit: FIT_LIMIT })?;
    if !(fit.residual <= FIT_LIMIT) {
        return Err(Error::FitUnstable { residual: fit.residual, limit: FIT_LIMIT });
    }
    Ok((fit.slope, fit.residual))
}

fn check_grid(r_grid: &[f64]) -> Result<()> {
    if r_grid.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidArgument("radii must be positive".into()));
    }
    Ok(())
}

fn unit_phase<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Lelong number of `u` at `p`: slope of the sampled maximum over spheres
/// `|zeta - p| = r` against `log r`.
pub fn lelong_estimate<U>(u: U, p: (Complex64, Complex64), r_grid: &[f64]) -> Result<LelongEstimate>
where
    U: Fn(Complex64, Complex64) -> f64,
{
    check_grid(r_grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ANGLE_SEED);
    let dirs: Vec<(Complex64, Complex64)> = (0..BOUNDARY_SAMPLES)
        .map(|_| {
            let g: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            (Complex64::new(g[0], g[1]) / n, Complex64::new(g[2], g[3]) / n)
        })
        .collect();
    let sups: Vec<f64> = r_grid
        .iter()
        .map(|&r| {
            dirs.iter()
                .map(|(a, b)| u(p.0 + a * r, p.1 + b * r))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let (value, fit_residual) = slope_fit(r_grid, &sups)?;
    Ok(LelongEstimate { point: p, value, r_grid: r_grid.to_vec(), fit_residual })
}

/// Kiselman number of `u` at `p` with weights `(a1, a2)`, from the polydisks
/// `|z - p1| < r^(1/a1)`, `|w - p2| < r^(1/a2)` sampled on their tori.
pub fn kiselman_estimate<U>(
    u: U,
    p: (Complex64, Complex64),
    weights: (f64, f64),
    r_grid: &[f64],
) -> Result<KiselmanEstimate>
where
    U: Fn(Complex64, Complex64) -> f64,
{
    check_grid(r_grid)?;
    let (a1, a2) = weights;
    if !(a1 > 0.0 && a2 > 0.0) {
        return Err(Error::InvalidArgument("weights must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ANGLE_SEED);
    let phases: Vec<(Complex64, Complex64)> =
        (0..BOUNDARY_SAMPLES).map(|_| (unit_phase(&mut rng), unit_phase(&mut rng))).collect();
    let sups: Vec<f64> = r_grid
        .iter()
        .map(|&r| {
            let (s1, s2) = (r.powf(1.0 / a1), r.powf(1.0 / a2));
            phases
                .iter()
                .map(|(a, b)| u(p.0 + a * s1, p.1 + b * s2))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let (slope, fit_residual) = slope_fit(r_grid, &sups)?;
    Ok(KiselmanEstimate { point: p, weights, slope: a1 * a2 * slope, r_grid: r_grid.to_vec(), fit_residual })
}

/// For each `alpha`, the largest weight-`(alpha, 1)` Kiselman estimate over
/// `points`.
pub fn kiselman_decay_scan<U>(
    u: U,
    points: &[(Complex64, Complex64)],
    alpha_grid: &[f64],
    r_grid: &[f64],
) -> Result<Vec<DecayRow>>
where
    U: Fn(Complex64, Complex64) -> f64,
{
    if points.is_empty() {
        return Err(Error::InvalidArgument("no sample points".into()));
    }
    alpha_grid
        .iter()
        .map(|&alpha| {
            let mut best = DecayRow { alpha, sup_estimate: f64::NEG_INFINITY, argmax: 0 };
            for (i, p) in points.iter().enumerate() {
                let e = kiselman_estimate(&u, *p, (alpha, 1.0), r_grid)?;
                if e.slope > best.sup_estimate {
                    best.sup_estimate = e.slope;
                    best.argmax = i;
                }
            }
            Ok(best)
        })
        .collect()
}
