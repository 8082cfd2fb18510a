use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::fit::weighted_line;
use super::{mean_stderr, sharded};
use crate::error::{Error, Result};
use crate::map::{ProjMap, ProjPoint};
use crate::poly::HomogPoly3;

/// Polydisk `|z - c1| <= r1, |w - c2| <= r2` in chart coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChartBox {
    pub center: (Complex64, Complex64),
    pub radii: (f64, f64),
}

/// Euclidean ball in the affine coordinates of `chart`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChartBall {
    pub chart: usize,
    pub center: (Complex64, Complex64),
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SublevelRow {
    pub t: f64,
    pub fraction: f64,
    pub stderr: f64,
    pub hits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SublevelTable {
    pub rows: Vec<SublevelRow>,
    pub samples: usize,
    pub seed: u64,
}

impl SublevelTable {
    /// Exponential decay rate of the fraction in `t`, fitted on rows with at
    /// least `min_hits` hits.
    pub fn decay_rate(&self, min_hits: usize) -> Result<f64> {
        let rows: Vec<&SublevelRow> = self.rows.iter().filter(|r| r.hits >= min_hits.max(1)).collect();
        let x: Vec<f64> = rows.iter().map(|r| r.t).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.fraction.ln()).collect();
        let fit = weighted_line(&x, &y, &vec![1.0; x.len()])
            .ok_or_else(|| Error::InvalidArgument("fewer than two populated levels".into()))?;
        Ok(-fit.slope)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeDecay {
    pub n: usize,
    /// `d^-2n` times the Fubini-Study volume of the image counted with
    /// multiplicity; a lower bound for the image volume.
    pub jacobian_bound: f64,
    pub jacobian_stderr: f64,
    /// Occupied cells of a grid over the bounding box of the image.
    pub occupancy: f64,
    /// Difference with the same estimate on the first half of the samples.
    pub occupancy_stderr: f64,
    pub grid: usize,
    pub samples: usize,
    pub seed: u64,
}

fn disk_point<R: Rng>(rng: &mut R, r: f64) -> Complex64 {
    let rho = r * rng.gen::<f64>().sqrt();
    Complex64::from_polar(rho, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Monte Carlo fraction of `k` where `u <= -t`, for each `t` in `t_grid`.
pub fn sublevel_volume<U>(u: U, k: &ChartBox, t_grid: &[f64], samples: usize, seed: u64) -> SublevelTable
where
    U: Fn(Complex64, Complex64) -> f64 + Sync,
{
    let acc = sharded(samples, seed, t_grid.len(), |rng, count| {
        let mut hits = vec![0.0; t_grid.len()];
        for _ in 0..count {
            let z = k.center.0 + disk_point(rng, k.radii.0);
            let w = k.center.1 + disk_point(rng, k.radii.1);
            let v = u(z, w);
            for (h, t) in hits.iter_mut().zip(t_grid) {
                if v <= -t {
                    *h += 1.0;
                }
            }
        }
        hits
    });
    let rows = t_grid
        .iter()
        .zip(&acc)
        .map(|(&t, &h)| {
            let (fraction, stderr) = mean_stderr(samples as f64, h, h);
            SublevelRow { t, fraction, stderr, hits: h as usize }
        })
        .collect();
    SublevelTable { rows, samples, seed }
}

/// Fubini-Study density in affine coordinates, normalized to total mass one.
fn fs_density(a: Complex64, b: Complex64) -> f64 {
    let s = 1.0 + a.norm_sqr() + b.norm_sqr();
    2.0 / (std::f64::consts::PI.powi(2) * s.powi(3))
}

fn others(chart: usize) -> [usize; 2] {
    match chart {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    }
}

fn ball_point<R: Rng>(rng: &mut R, ball: &ChartBall) -> (Complex64, Complex64) {
    let g: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let rho = ball.radius * rng.gen::<f64>().powf(0.25) / n;
    (
        ball.center.0 + Complex64::new(g[0], g[1]) * rho,
        ball.center.1 + Complex64::new(g[2], g[3]) * rho,
    )
}

/// Image of a chart point under `f^n` with `log |det|` of the chart
/// derivative. Each step moves to the chart of the largest coordinate.
fn track(
    f: &ProjMap,
    grad: &[[HomogPoly3; 3]; 3],
    chart: usize,
    uv: (Complex64, Complex64),
    n: usize,
) -> (usize, (Complex64, Complex64), f64) {
    let mut a = chart;
    let mut x = [Complex64::new(0.0, 0.0); 3];
    let o = others(a);
    x[a] = Complex64::new(1.0, 0.0);
    x[o[0]] = uv.0;
    x[o[1]] = uv.1;
    let mut logdet = 0.0;
    for _ in 0..n {
        let y = f.lift(&x);
        let b = (0..3).max_by(|&i, &j| y[i].norm().total_cmp(&y[j].norm())).expect("three coordinates");
        let (oa, ob) = (others(a), others(b));
        // dy along the two affine directions of chart a
        let dy: [[Complex64; 3]; 2] =
            std::array::from_fn(|c| std::array::from_fn(|i| grad[i][oa[c]].evaluate(&x)));
        let yb2 = y[b] * y[b];
        let m: [[Complex64; 2]; 2] =
            std::array::from_fn(|r| std::array::from_fn(|c| (dy[c][ob[r]] * y[b] - y[ob[r]] * dy[c][b]) / yb2));
        logdet += (m[0][0] * m[1][1] - m[0][1] * m[1][0]).norm().ln();
        x = y.map(|c| c / y[b]);
        a = b;
    }
    let o = others(a);
    (a, (x[o[0]], x[o[1]]), logdet)
}

/// Jacobian lower bound and grid occupancy estimate of the Fubini-Study
/// volume of `f^n(ball)`, volumes normalized so that the plane has volume one.
pub fn volume_decay(f: &ProjMap, ball: &ChartBall, n: usize, samples: usize, seed: u64) -> Result<VolumeDecay> {
    if ball.chart > 2 || !(ball.radius > 0.0) {
        return Err(Error::InvalidArgument("ball needs a chart index below 3 and a positive radius".into()));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("at least two samples".into()));
    }
    let grad: [[HomogPoly3; 3]; 3] = std::array::from_fn(|i| f.components()[i].gradient());
    let dd = (f.degree() as f64).powi(2 * n as i32);
    let leb = std::f64::consts::PI.powi(2) * ball.radius.powi(4) / 2.0;
    let acc = sharded(samples, seed, 2, |rng, count| {
        let mut acc = vec![0.0; 2];
        for _ in 0..count {
            let (_, img, logdet) = track(f, &grad, ball.chart, ball_point(rng, ball), n);
            let v = (2.0 * logdet + fs_density(img.0, img.1).ln()).exp() / dd * leb;
            acc[0] += v;
            acc[1] += v * v;
        }
        acc
    });
    let (jacobian_bound, jacobian_stderr) = mean_stderr(samples as f64, acc[0], acc[1]);

    // occupancy on an independent stream
    let center = ProjPoint::from_affine(ball.chart, ball.center)?;
    let target = f.iterate_lognorm(&center, n).points[n].chart();
    let pts: Vec<[f64; 4]> = {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x0cc0);
        (0..samples)
            .filter_map(|_| {
                let (c, img, _) = track(f, &grad, ball.chart, ball_point(&mut rng, ball), n);
                let p = ProjPoint::from_affine(c, img).ok()?;
                let q = p.affine(target).ok()?;
                let v = [q.0.re, q.0.im, q.1.re, q.1.im];
                v.iter().all(|x| x.is_finite()).then_some(v)
            })
            .collect()
    };
    let grid = ((samples as f64 / 8.0).powf(0.25).floor() as usize).clamp(2, 32);
    let occupancy = occupied_volume(&pts, grid);
    let half = occupied_volume(&pts[..pts.len() / 2], grid);
    Ok(VolumeDecay {
        n,
        jacobian_bound,
        jacobian_stderr,
        occupancy,
        occupancy_stderr: (occupancy - half).abs(),
        grid,
        samples,
        seed,
    })
}

fn occupied_volume(pts: &[[f64; 4]], grid: usize) -> f64 {
    if pts.is_empty() {
        return 0.0;
    }
    let mut lo = [f64::INFINITY; 4];
    let mut hi = [f64::NEG_INFINITY; 4];
    for p in pts {
        for k in 0..4 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let width: [f64; 4] = std::array::from_fn(|k| ((hi[k] - lo[k]) / grid as f64).max(f64::MIN_POSITIVE));
    let cells: BTreeSet<[usize; 4]> = pts
        .iter()
        .map(|p| std::array::from_fn(|k| (((p[k] - lo[k]) / width[k]) as usize).min(grid - 1)))
        .collect();
    let cell: f64 = width.iter().product();
    cells
        .iter()
        .map(|c| {
            let mid: [f64; 4] = std::array::from_fn(|k| lo[k] + (c[k] as f64 + 0.5) * width[k]);
            cell * fs_density(Complex64::new(mid[0], mid[1]), Complex64::new(mid[2], mid[3]))
        })
        .sum()
}

/// Slope of `log log (1 / V_n)` against `n`.
pub fn inner_rate(volumes: &[(usize, f64)]) -> Result<f64> {
    if volumes.iter().any(|(_, v)| !(*v > 0.0 && *v < 1.0)) {
        return Err(Error::InvalidArgument("volumes must lie in (0, 1)".into()));
    }
    let x: Vec<f64> = volumes.iter().map(|(n, _)| *n as f64).collect();
    let y: Vec<f64> = volumes.iter().map(|(_, v)| (1.0 / v).ln().ln()).collect();
    weighted_line(&x, &y, &vec![1.0; x.len()])
        .map(|f| f.slope)
        .ok_or_else(|| Error::InvalidArgument("need two distinct iterates".into()))
}
