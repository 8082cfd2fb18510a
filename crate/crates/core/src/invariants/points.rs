use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::lines::{invariant_lines, InvariantLine};
use crate::error::{Error, Result};
use crate::map::fiber::solve_in_charts;
use crate::map::projmap::{unit_disk, zero2};
use crate::map::{ProjMap, ProjPoint};
use crate::multiplicity::{e_step, MultOptions};
use crate::poly::{recenter_taylor, HomogPoly3};

#[derive(Clone, Copy, Debug)]
pub struct PointSearch {
    pub max_period: usize,
    /// Fixed points of `f^k` are solved for directly only while `d^k` stays
    /// at or below this.
    pub max_iterate_degree: usize,
    pub seed: u64,
}

impl Default for PointSearch {
    fn default() -> Self {
        PointSearch {
            max_period: 3,
            max_iterate_degree: 4,
            seed: 0x9e37,
        }
    }
}

/// A periodic orbit whose points each have the previous one as their only
/// preimage.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantOrbit {
    /// `points[i + 1] = f(points[i])`.
    pub points: Vec<ProjPoint>,
    pub period: usize,
}

impl InvariantOrbit {
    pub fn contains(&self, p: &ProjPoint, tol: f64) -> bool {
        self.points.iter().any(|q| q.distance(p) < tol)
    }
}

pub fn invariant_points(f: &ProjMap) -> Result<Vec<ProjPoint>> {
    Ok(invariant_orbits(f)?.into_iter().flat_map(|o| o.points).collect())
}

pub fn invariant_orbits(f: &ProjMap) -> Result<Vec<InvariantOrbit>> {
    invariant_orbits_with(f, &invariant_lines(f), &PointSearch::default())
}

/// Totally invariant periodic orbits of period at most `max_period`.
///
/// Candidates are fixed points of low iterates, points where the derivative
/// of the lift has rank one, and periodic points of the restrictions to the
/// given invariant lines. Each candidate is refined by iterating, which
/// converges because such orbits are superattracting, and accepted when the
/// local degree is `d^2` along the orbit.
pub fn invariant_orbits_with(
    f: &ProjMap,
    lines: &[InvariantLine],
    opts: &PointSearch,
) -> Result<Vec<InvariantOrbit>> {
    let d = f.degree();
    let mut candidates: Vec<ProjPoint> = Vec::new();
    let mut k = 1;
    while k <= opts.max_period
        && d.checked_pow(k as u32).is_some_and(|x| x <= opts.max_iterate_degree)
    {
        let g = f.iterate_map(k);
        candidates.extend(g.fixed_points()?.points.into_iter().map(|w| w.point));
        k += 1;
    }
    candidates.extend(rank_one_locus(f, opts.seed)?);
    for line in lines {
        let g = line.restriction(f);
        for k in 1..=opts.max_period.min(2) {
            for x in g.iterate(k).fixed_points()? {
                candidates.push(line.point(x[0], x[1]));
            }
        }
    }

    let mult = MultOptions::default();
    let mut out: Vec<InvariantOrbit> = Vec::new();
    for p in candidates {
        if out.iter().any(|o| o.contains(&p, 1e-3)) {
            continue;
        }
        let Some((q, period)) = superattracting_cycle(f, &p, opts.max_period) else {
            continue;
        };
        if out.iter().any(|o| o.contains(&q, 1e-6)) {
            continue;
        }
        let mut points = vec![q];
        for _ in 1..period {
            points.push(f.apply(points.last().unwrap()));
        }
        let jac = f.jacobian();
        let critical = points
            .iter()
            .all(|x| super::vanishes_at(&jac, x.coords(), 1e-6));
        if !critical {
            continue;
        }
        let mut total = true;
        for x in &points {
            if e_step(f, x, &mult)? != d * d {
                total = false;
                break;
            }
        }
        if total {
            out.push(InvariantOrbit { points, period });
        }
    }
    Ok(out)
}

/// Minimal period and an accurate representative if `p` is close to a
/// superattracting cycle of period at most `max_period`.
fn superattracting_cycle(f: &ProjMap, p: &ProjPoint, max_period: usize) -> Option<(ProjPoint, usize)> {
    let mut x = *p;
    let mut period = None;
    for j in 1..=max_period {
        x = f.apply(&x);
        if x.distance(p) < 1e-3 {
            period = Some(j);
            break;
        }
    }
    let period = period?;
    let step = |x: &ProjPoint| (0..period).fold(*x, |y, _| f.apply(&y));
    let mut q = *p;
    for _ in 0..40 {
        let next = step(&q);
        let moved = next.distance(&q);
        q = next;
        if moved < 1e-15 {
            break;
        }
    }
    (q.distance(p) < 1e-3 && step(&q).distance(&q) < 1e-10).then_some((q, period))
}

/// `2 x 2` minors of the derivative of the lift.
fn derivative_minors(f: &ProjMap) -> Vec<HomogPoly3> {
    let grads: Vec<[HomogPoly3; 3]> = f.components().iter().map(|c| c.gradient()).collect();
    let mut out = Vec::with_capacity(9);
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        for (c, e) in [(0, 1), (0, 2), (1, 2)] {
            let m = grads[a][c]
                .mul(&grads[b][e])
                .sub(&grads[a][e].mul(&grads[b][c]))
                .expect("equal degrees");
            out.push(m);
        }
    }
    out
}

/// Isolated points where the derivative of the lift has rank at most one,
/// from two random combinations of its minors. Homogeneous points lie there.
/// An empty list is returned when the locus contains a curve.
fn rank_one_locus(f: &ProjMap, seed: u64) -> Result<Vec<ProjPoint>> {
    let minors = derivative_minors(f);
    let deg = minors[0].degree();
    if deg == 0 {
        return Ok(Vec::new());
    }
    for attempt in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let combo = |rng: &mut ChaCha8Rng| {
            let mut acc = HomogPoly3::zero(deg);
            for m in &minors {
                if m.is_zero() {
                    continue;
                }
                acc = acc
                    .add(&m.normalized().scale(unit_disk(rng)))
                    .expect("equal degrees");
            }
            acc
        };
        let e0 = combo(&mut rng);
        let e1 = combo(&mut rng);
        if e0.is_zero() || e1.is_zero() {
            return Ok(Vec::new());
        }
        let solved = solve_in_charts(deg * deg, |chart| {
            Ok((
                recenter_taylor(&e0, chart, zero2(), deg)?,
                recenter_taylor(&e1, chart, zero2(), deg)?,
            ))
        });
        match solved {
            Ok(s) => return Ok(s.points.into_iter().map(|w| w.point).collect()),
            Err(Error::PositiveDimensional) => continue,
            Err(Error::SolverFailure { .. }) | Err(Error::IllConditioned { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn map(s: [&str; 3]) -> ProjMap {
        ProjMap::validate(s.map(|x| HomogPoly3::parse(x).unwrap())).unwrap()
    }

    fn corner(i: usize) -> ProjPoint {
        let mut c = [Complex64::new(0.0, 0.0); 3];
        c[i] = Complex64::new(1.0, 0.0);
        ProjPoint::new(c).unwrap()
    }

    #[test]
    fn power_map_corners() {
        let pts = invariant_points(&map(["z^2", "w^2", "t^2"])).unwrap();
        assert_eq!(pts.len(), 3);
        for i in 0..3 {
            assert!(pts.iter().any(|p| p.distance(&corner(i)) < 1e-9));
        }
    }

    #[test]
    fn example_map_orbits() {
        let orbits = invariant_orbits(&map(["2*z*t + w^2", "z^2", "t^2"])).unwrap();
        assert_eq!(orbits.len(), 2, "{orbits:?}");
        let fixed = orbits.iter().find(|o| o.period == 1).unwrap();
        assert!(fixed.contains(&corner(2), 1e-9));
        let two = orbits.iter().find(|o| o.period == 2).unwrap();
        assert!(two.contains(&corner(0), 1e-9) && two.contains(&corner(1), 1e-9));
    }

    #[test]
    fn random_map_has_none() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = ProjMap::random(2, &mut rng).unwrap();
        let orbits = invariant_orbits_with(&f, &[], &PointSearch::default()).unwrap();
        assert!(orbits.is_empty());
    }

    #[test]
    fn homogeneous_point_of_period_two_in_degree_three() {
        // [0:1:0] and [0:0:1] are swapped, each the only preimage of the other
        let f = map(["z^3", "t^3 + z*w*t", "w^3"]);
        let orbits = invariant_orbits_with(&f, &[], &PointSearch::default()).unwrap();
        assert!(orbits
            .iter()
            .any(|o| o.period == 2 && o.contains(&corner(1), 1e-9) && o.contains(&corner(2), 1e-9)));
    }
}
