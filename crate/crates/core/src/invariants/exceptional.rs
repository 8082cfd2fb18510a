use num_complex::Complex64;
use serde::Serialize;

use super::lines::{invariant_lines, InvariantLine};
use super::points::{invariant_orbits_with, PointSearch};
use crate::error::{Error, Result};
use crate::map::{ProjMap, ProjPoint};
use crate::multiplicity::{c_order, mu_order};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum E2Kind {
    /// On a line of `E1`, totally invariant for the restriction.
    #[serde(rename = "on_E1")]
    OnE1,
    /// Off `E1` with `c(p, f^k) = d^k` for the period `k`.
    #[serde(rename = "homogeneous")]
    Homogeneous,
    /// Totally invariant and superattracting off `E1`, neither test fires.
    #[serde(rename = "undetermined")]
    Undetermined,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExceptionalPoint {
    pub point: ProjPoint,
    pub kind: E2Kind,
    pub period: usize,
    /// Indices into `e1_lines` of the lines through the point.
    pub lines: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExceptionalSets {
    pub e1_lines: Vec<InvariantLine>,
    pub e2_points: Vec<ExceptionalPoint>,
    /// Set when a totally invariant orbit off `E1` was classified, which
    /// relies on such points being homogeneous.
    pub assumption_flag: bool,
}

impl ExceptionalSets {
    /// Points of kind on_E1 or homogeneous.
    pub fn confirmed(&self) -> impl Iterator<Item = &ExceptionalPoint> {
        self.e2_points.iter().filter(|p| p.kind != E2Kind::Undetermined)
    }
}

const ON_LINE: f64 = 1e-7;

/// `E1` (validated invariant lines) and `E2` with kinds.
pub fn exceptional_sets(f: &ProjMap, horizon: usize) -> Result<ExceptionalSets> {
    if horizon < 2 {
        return Err(Error::InvalidArgument(format!("horizon must be at least 2, got {horizon}")));
    }
    let d = f.degree();
    let mut e1_lines = Vec::new();
    for line in invariant_lines(f) {
        if critical_line(f, &line)? {
            e1_lines.push(line);
        }
    }

    let mut e2_points: Vec<ExceptionalPoint> = Vec::new();
    let incidence = |p: &ProjPoint| -> Vec<usize> {
        e1_lines
            .iter()
            .enumerate()
            .filter(|(_, l)| l.contains(p, ON_LINE))
            .map(|(i, _)| i)
            .collect()
    };
    let opts = PointSearch {
        max_period: horizon.min(3),
        ..Default::default()
    };
    let mut assumption_flag = false;
    for orbit in invariant_orbits_with(f, &e1_lines, &opts)? {
        let on_line = orbit.points.iter().all(|p| !incidence(p).is_empty());
        let kind = if on_line {
            E2Kind::OnE1
        } else {
            assumption_flag = true;
            let k = orbit.period;
            let c = c_order(f, &orbit.points[0], k)?;
            if c == d.pow(k as u32) {
                E2Kind::Homogeneous
            } else {
                let later = c_order(f, &orbit.points[0], k * horizon)?;
                if c > 1 || later > 1 {
                    E2Kind::Undetermined
                } else {
                    continue;
                }
            }
        };
        for p in &orbit.points {
            if e2_points.iter().any(|q| q.point.distance(p) < 1e-6) {
                continue;
            }
            e2_points.push(ExceptionalPoint {
                point: *p,
                kind,
                period: orbit.period,
                lines: incidence(p),
            });
        }
    }
    Ok(ExceptionalSets {
        e1_lines,
        e2_points,
        assumption_flag,
    })
}

/// Whether the Jacobian vanishes to order `d - 1` at a generic point of the line.
fn critical_line(f: &ProjMap, line: &InvariantLine) -> Result<bool> {
    let d = f.degree();
    let p = line.point(Complex64::new(0.613, -0.271), Complex64::new(-0.442, 0.587));
    Ok(mu_order(f, &p, 1)? == d - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::HomogPoly3;

    fn map(s: [&str; 3]) -> ProjMap {
        ProjMap::validate(s.map(|x| HomogPoly3::parse(x).unwrap())).unwrap()
    }

    fn corner(i: usize) -> ProjPoint {
        let mut c = [Complex64::new(0.0, 0.0); 3];
        c[i] = Complex64::new(1.0, 0.0);
        ProjPoint::new(c).unwrap()
    }

    #[test]
    fn power_map() {
        let s = exceptional_sets(&map(["z^2", "w^2", "t^2"]), 3).unwrap();
        assert_eq!(s.e1_lines.len(), 3);
        assert_eq!(s.e2_points.len(), 3);
        assert!(s.e2_points.iter().all(|p| p.kind == E2Kind::OnE1 && p.lines.len() == 2));
        assert!(!s.assumption_flag);
    }

    #[test]
    fn example_map() {
        let s = exceptional_sets(&map(["2*z*t + w^2", "z^2", "t^2"]), 5).unwrap();
        assert_eq!(s.e1_lines.len(), 1);
        assert_eq!(s.e2_points.len(), 2, "{:?}", s.e2_points);
        for i in 0..2 {
            assert!(s.e2_points.iter().any(|p| p.point.distance(&corner(i)) < 1e-9));
        }
        assert!(s.e2_points.iter().all(|p| p.point.distance(&corner(2)) > 0.1));
    }

    #[test]
    fn homogeneous_point_off_the_line() {
        let s = exceptional_sets(&map(["z^2 + 0.3*z*w", "w^2 - 0.7*z*w + 0.2*z^2", "t^2"]), 3).unwrap();
        assert_eq!(s.e1_lines.len(), 1);
        let p = s.e2_points.iter().find(|p| p.point.distance(&corner(2)) < 1e-9).unwrap();
        assert_eq!(p.kind, E2Kind::Homogeneous);
        assert!(s.assumption_flag);
    }
}
