use serde::Serialize;

use super::point::ProjPoint;
use super::projmap::{zero2, ProjMap};
use crate::error::{Error, Result};
use crate::poly::series::other_indices;
use crate::poly::{recenter_taylor, solve_with_options, AffineSeries2, SolveOptions};

/// Deduplication radius for simple solutions.
pub const DEDUP_SIMPLE: f64 = 1e-6;
/// Deduplication radius when either solution is multiple.
pub const DEDUP_MULTIPLE: f64 = 1e-4;

#[derive(Clone, Debug, Serialize)]
pub struct WeightedPoint {
    pub point: ProjPoint,
    pub multiplicity: usize,
    /// Chart whose unit polydisk contained the solution.
    pub chart: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolvedPoints {
    pub points: Vec<WeightedPoint>,
    pub total_multiplicity: usize,
    pub expected: usize,
    /// Whether the multiplicities add up to the expected count.
    pub complete: bool,
}

/// Preimage fiber of a target point.
#[derive(Clone, Debug, Serialize)]
pub struct Fiber {
    pub target: ProjPoint,
    pub preimages: Vec<WeightedPoint>,
    pub total_multiplicity: usize,
    pub complete: bool,
}

/// Solves a system given in each affine chart, keeping solutions in the
/// closed unit polydisk of the chart and merging duplicates across charts.
pub(crate) fn solve_in_charts<F>(expected: usize, mut system: F) -> Result<SolvedPoints>
where
    F: FnMut(usize) -> Result<(AffineSeries2, AffineSeries2)>,
{
    let opts = SolveOptions {
        bound: Some(1.0),
        ..Default::default()
    };
    let mut points: Vec<WeightedPoint> = Vec::new();
    for chart in [2, 0, 1] {
        let (a, b) = system(chart)?;
        let sols = solve_with_options(&a, &b, &opts).map_err(|e| match e {
            Error::PositiveDimensional => Error::PositiveDimensional,
            other => Error::SolverFailure {
                chart,
                reason: other.to_string(),
            },
        })?;
        for s in sols {
            let p = ProjPoint::from_affine(chart, s.point)?;
            let dup = points.iter().any(|q| {
                let tol = if q.multiplicity > 1 || s.multiplicity > 1 {
                    DEDUP_MULTIPLE
                } else {
                    DEDUP_SIMPLE
                };
                q.point.distance(&p) < tol
            });
            if !dup {
                points.push(WeightedPoint {
                    point: p,
                    multiplicity: s.multiplicity,
                    chart,
                });
            }
        }
    }
    let total_multiplicity = points.iter().map(|p| p.multiplicity).sum();
    Ok(SolvedPoints {
        points,
        total_multiplicity,
        expected,
        complete: total_multiplicity == expected,
    })
}

impl ProjMap {
    /// All preimages of `q` with multiplicities.
    pub fn preimages(&self, q: &ProjPoint) -> Result<Fiber> {
        let d = self.degree();
        let a = q.chart();
        let qc = q.coords();
        let others = other_indices(a);
        let comps = self.components();
        let eqs: [_; 2] = std::array::from_fn(|r| {
            let b = others[r];
            comps[b]
                .scale(qc[a])
                .sub(&comps[a].scale(qc[b]))
                .expect("equal degrees")
        });
        let solved = solve_in_charts(d * d, |chart| {
            Ok((
                recenter_taylor(&eqs[0], chart, zero2(), d)?,
                recenter_taylor(&eqs[1], chart, zero2(), d)?,
            ))
        })?;
        Ok(Fiber {
            target: *q,
            total_multiplicity: solved.total_multiplicity,
            complete: solved.complete,
            preimages: solved.points,
        })
    }

    /// Fixed points with multiplicities; `d^2 + d + 1` in total.
    pub fn fixed_points(&self) -> Result<SolvedPoints> {
        let d = self.degree();
        let comps = self.components();
        solve_in_charts(d * d + d + 1, |chart| {
            let o = other_indices(chart);
            let t = d + 1;
            let fc = recenter_taylor(&comps[chart], chart, zero2(), t)?;
            let f0 = recenter_taylor(&comps[o[0]], chart, zero2(), t)?;
            let f1 = recenter_taylor(&comps[o[1]], chart, zero2(), t)?;
            let u = AffineSeries2::variable(t, 0);
            let v = AffineSeries2::variable(t, 1);
            Ok((u.mul(&fc).sub(&f0), v.mul(&fc).sub(&f1)))
        })
    }
}

/// Sum of multiplicities of the points within `radius` of `p`.
pub fn multiplicity_near(points: &[WeightedPoint], p: &ProjPoint, radius: f64) -> usize {
    points
        .iter()
        .filter(|q| q.point.distance(p) < radius)
        .map(|q| q.multiplicity)
        .sum()
}
