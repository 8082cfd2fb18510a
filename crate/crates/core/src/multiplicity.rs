//! Local multiplicities along orbits: the vanishing order `mu` of the
//! Jacobian, the local topological degree `e` and the contraction order `c`.
//!
//! Orders are read off lifted power series. For a chart point `p` the lift
//! `Y(u, v)` of `p + (u, v)` is pushed through `F` as a truncated series; the
//! chart expression of `f^n` at `p` has the same Jacobian order as
//! `det[G, dG/du, dG/dv]` with `G = F^n(Y)`, which does not depend on the
//! charts used at `p` or at `f^n(p)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::{ProjMap, ProjPoint};
use crate::poly::series::{chart_lift, other_indices};
use crate::poly::{local_intersection_multiplicity, recenter_taylor, roots_univariate, TrackedSeries, SERIES_TOL};

#[derive(Clone, Copy, Debug)]
pub struct MultOptions {
    /// Chart used at the base point (default: its largest coordinate).
    pub chart: Option<usize>,
    /// Chart used at the image point for `c` (default: its largest coordinate).
    pub target_chart: Option<usize>,
    /// Relative zero test for series coefficients against their error scales.
    pub rel_tol: f64,
    /// Relative zero test for resultant Taylor coefficients in `e`.
    pub e_tol: f64,
    /// Hard cap on the series truncation.
    pub max_truncation: usize,
}

impl Default for MultOptions {
    fn default() -> Self {
        MultOptions {
            chart: None,
            target_chart: None,
            rel_tol: SERIES_TOL,
            e_tol: 1e-6,
            max_truncation: 256,
        }
    }
}

type Lift = [TrackedSeries; 3];

/// Lift series `F^j(Y)` for `j = 0..=n`, each rescaled so that its largest
/// constant term has modulus one.
fn lift_series(f: &ProjMap, p: &ProjPoint, chart: usize, n: usize, trunc: usize) -> Result<Vec<Lift>> {
    let center = p.affine(chart)?;
    let mut out: Vec<Lift> = Vec::with_capacity(n + 1);
    out.push(chart_lift(trunc, chart, center));
    let comps = f.components();
    for j in 0..n {
        let prev = &out[j];
        let next: Lift = std::array::from_fn(|i| comps[i].evaluate_series(prev));
        let s = next
            .iter()
            .map(|x| x.constant_term().norm())
            .fold(0.0, f64::max);
        let inv = Complex64::new(1.0 / s, 0.0);
        out.push(next.map(|x| x.scale(inv)));
    }
    Ok(out)
}

/// `det[G, dG/du, dG/dv]`.
fn lift_determinant(g: &Lift) -> TrackedSeries {
    let du: Vec<TrackedSeries> = g.iter().map(|x| x.derivative(0)).collect();
    let dv: Vec<TrackedSeries> = g.iter().map(|x| x.derivative(1)).collect();
    let minor = |a: usize, b: usize| du[a].mul(&dv[b]).sub(&du[b].mul(&dv[a]));
    g[0].mul(&minor(1, 2))
        .sub(&g[1].mul(&minor(0, 2)))
        .add(&g[2].mul(&minor(0, 1)))
}

fn base_chart(p: &ProjPoint, opts: &MultOptions) -> Result<usize> {
    let c = opts.chart.unwrap_or_else(|| p.chart());
    if c > 2 {
        return Err(Error::InvalidArgument(format!("chart index {c}")));
    }
    if p.coords()[c].norm() < 1e-12 {
        return Err(Error::ChartUndefined { chart: c });
    }
    Ok(c)
}

/// Runs `order` with truncations `2d, 4d, ...` until it succeeds or the cap
/// `min(4 d^n, max_truncation)` is passed.
fn adaptive<T>(
    f: &ProjMap,
    n: usize,
    opts: &MultOptions,
    mut order: impl FnMut(usize) -> Result<T>,
) -> Result<T> {
    let d = f.degree();
    let cap = d
        .checked_pow(n.max(1) as u32)
        .map(|x| 4 * x)
        .unwrap_or(usize::MAX)
        .min(opts.max_truncation);
    let mut trunc = (2 * d).min(cap);
    loop {
        match order(trunc) {
            Err(Error::OrderExceedsTruncation { .. }) if trunc < cap => {
                trunc = (trunc * 2).min(cap);
            }
            other => return other,
        }
    }
}

/// `mu(p, J f^n)`, the vanishing order at `p` of the Jacobian of `f^n`.
pub fn mu_order(f: &ProjMap, p: &ProjPoint, n: usize) -> Result<usize> {
    mu_order_with(f, p, n, &MultOptions::default())
}

pub fn mu_order_with(f: &ProjMap, p: &ProjPoint, n: usize, opts: &MultOptions) -> Result<usize> {
    check_n(n)?;
    let chart = base_chart(p, opts)?;
    adaptive(f, n, opts, |t| {
        let g = lift_series(f, p, chart, n, t + 1)?;
        lift_determinant(&g[n]).vanishing_order(opts.rel_tol)
    })
}

/// Orders at `p` of `Jf o f^j` for `j = 0..n`; their sums are the values of
/// [`mu_order`].
pub fn mu_steps(f: &ProjMap, p: &ProjPoint, n: usize, opts: &MultOptions) -> Result<Vec<usize>> {
    let chart = base_chart(p, opts)?;
    let jac = f.jacobian();
    (0..n)
        .map(|j| {
            adaptive(f, j + 1, opts, |t| {
                let g = lift_series(f, p, chart, j, t)?;
                jac.evaluate_series(&g[j]).vanishing_order(opts.rel_tol)
            })
        })
        .collect()
}

/// `c(p, f^n)`: the lowest degree of the local expansion of `f^n` at `p`
/// taken in charts centered at `p` and `f^n(p)`.
pub fn c_order(f: &ProjMap, p: &ProjPoint, n: usize) -> Result<usize> {
    c_order_with(f, p, n, &MultOptions::default())
}

pub fn c_order_with(f: &ProjMap, p: &ProjPoint, n: usize, opts: &MultOptions) -> Result<usize> {
    check_n(n)?;
    let chart = base_chart(p, opts)?;
    let mut image = *p;
    for _ in 0..n {
        image = f.apply(&image);
    }
    let b = match opts.target_chart {
        Some(b) if b <= 2 => {
            if image.coords()[b].norm() < 1e-12 {
                return Err(Error::ChartUndefined { chart: b });
            }
            b
        }
        Some(b) => return Err(Error::InvalidArgument(format!("chart index {b}"))),
        None => image.chart(),
    };
    adaptive(f, n, opts, |t| {
        let g = lift_series(f, p, chart, n, t)?;
        let g = &g[n];
        let gb0 = g[b].constant_term();
        let mut best = usize::MAX;
        let mut exceeded = None;
        for i in other_indices(b) {
            let num = g[i].scale(gb0).sub(&g[b].scale(g[i].constant_term()));
            match num.vanishing_order(opts.rel_tol) {
                Ok(o) => best = best.min(o),
                Err(e) => exceeded = Some(e),
            }
        }
        if best == usize::MAX {
            Err(exceeded.unwrap_or(Error::OrderExceedsTruncation { truncation: t }))
        } else {
            Ok(best)
        }
    })
}

/// Local topological degree `e(p, f)` of a single step: the intersection
/// multiplicity at `p` of the fiber equations of the exact target `f(p)`.
pub fn e_step(f: &ProjMap, p: &ProjPoint, opts: &MultOptions) -> Result<usize> {
    let chart = base_chart(p, opts)?;
    let q = f.apply(p);
    let a = q.chart();
    let qc = q.coords();
    let comps = f.components();
    let d = f.degree();
    let center = p.affine(chart)?;
    let others = other_indices(a);
    let eq = |b: usize| -> Result<_> {
        let h = comps[b]
            .scale(qc[a])
            .sub(&comps[a].scale(qc[b]))
            .expect("equal degrees");
        recenter_taylor(&h, chart, center, d)
    };
    let zero = Complex64::new(0.0, 0.0);
    local_intersection_multiplicity(&eq(others[0])?, &eq(others[1])?, (zero, zero), opts.e_tol)
}

/// `e(p, f^n)` as the product of single-step degrees along the orbit.
pub fn e_local(f: &ProjMap, p: &ProjPoint, n: usize) -> Result<usize> {
    e_local_with(f, p, n, &MultOptions::default())
}

pub fn e_local_with(f: &ProjMap, p: &ProjPoint, n: usize, opts: &MultOptions) -> Result<usize> {
    check_n(n)?;
    Ok(e_steps(f, p, n, opts)?.iter().product())
}

/// `e(f^j p, f)` for `j = 0..n`.
pub fn e_steps(f: &ProjMap, p: &ProjPoint, n: usize, opts: &MultOptions) -> Result<Vec<usize>> {
    let mut x = *p;
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let o = MultOptions {
            chart: if j == 0 { opts.chart } else { None },
            ..*opts
        };
        out.push(e_step(f, &x, &o)?);
        x = f.apply(&x);
    }
    Ok(out)
}

/// Counts preimages near `p` of targets `f(p) + delta * dir` for
/// `delta = 1e-2, 1e-3, ...` and returns the count once it is the same for
/// three consecutive values of `delta`.
pub fn e_local_ladder(f: &ProjMap, p: &ProjPoint) -> Result<usize> {
    let q = f.apply(p);
    let d = f.degree();
    let emax = (d * d) as f64;
    // preimages of f(p) away from p bound the counting radius
    let fib = f.preimages(&q)?;
    let sep = fib
        .preimages
        .iter()
        .map(|w| w.point.distance(p))
        .filter(|&r| r > 1e-3)
        .fold(1.0f64, f64::min);
    // a fixed direction orthogonal to q
    let qc = q.coords();
    let raw = [
        Complex64::new(0.31, 0.17),
        Complex64::new(-0.23, 0.41),
        Complex64::new(0.12, -0.37),
    ];
    let ip: Complex64 = (0..3).map(|i| raw[i] * qc[i].conj()).sum();
    let dir: [Complex64; 3] = std::array::from_fn(|i| raw[i] - ip * qc[i]);
    let mut counts = Vec::new();
    for k in 2..=9 {
        let delta = 10f64.powi(-k);
        let target = ProjPoint::new(std::array::from_fn(|i| qc[i] + dir[i] * delta))?;
        let rho = (10.0 * delta.powf(1.0 / emax)).min(0.5 * sep);
        let fib = f.preimages(&target)?;
        let count: usize = fib
            .preimages
            .iter()
            .filter(|w| w.point.distance(p) < rho)
            .map(|w| w.multiplicity)
            .sum();
        counts.push(count);
        let l = counts.len();
        if l >= 3 && counts[l - 1] == counts[l - 2] && counts[l - 2] == counts[l - 3] && count > 0 {
            return Ok(count);
        }
    }
    Err(Error::Unstable { sequence: counts })
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("iterate count must be at least 1".into()));
    }
    Ok(())
}

/// `count` points of the critical curve `{J = 0}`, cut out by random lines.
pub fn sample_critical_points(f: &ProjMap, count: usize, seed: u64) -> Result<Vec<ProjPoint>> {
    use rand::SeedableRng;
    let j = f.jacobian();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = *ProjPoint::random(&mut rng).coords();
        let b = *ProjPoint::random(&mut rng).coords();
        let q = j.restrict_to_line(&a, &b);
        if q.degree() == 0 {
            continue;
        }
        for r in roots_univariate(&q)?.roots {
            if out.len() == count {
                break;
            }
            let x: [Complex64; 3] = std::array::from_fn(|i| a[i] + r.value * b[i]);
            if let Ok(p) = ProjPoint::new(x) {
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// Finite-horizon multiplicity data at a point.
#[derive(Clone, Debug, Serialize)]
pub struct MultiplicityReport {
    pub point: ProjPoint,
    pub degree: usize,
    pub horizon: usize,
    pub orbit: Vec<ProjPoint>,
    /// `mu(p, J f^n)` for `n = 1..=N`, from the lifted determinant.
    pub mu_series: Vec<usize>,
    /// Orders at `p` of `Jf o f^j`, `j = 0..N`.
    pub mu_steps: Vec<usize>,
    /// `e(p, f^n)` for `n = 1..=N`.
    pub e_series: Vec<usize>,
    /// `e(f^j p, f)`, `j = 0..N`.
    pub e_steps: Vec<usize>,
    /// `c(p, f^n)` for `n = 1..=N`.
    pub c_series: Vec<usize>,
    /// `mu_orbit[n][k - 1] = mu(f^n p, J f^k)` for `1 <= n`, `n + k <= cocycle_horizon`.
    pub mu_orbit: Vec<Vec<usize>>,
    /// Same layout for `c(f^n p, f^k)`.
    pub c_orbit: Vec<Vec<usize>>,
    pub cocycle_horizon: usize,
    /// `(3 + 2 mu_N)^(1/N)`.
    pub mu_inf_est: f64,
    /// `(1 + mu_N)^(1/N)`.
    pub mu_inf_est_alt: f64,
    pub e_inf_est: f64,
    pub c_inf_est: f64,
    pub inequality_verdicts: BTreeMap<String, bool>,
}

/// Largest `n + k` covered by the orbit tables of [`asymptotics`].
pub const COCYCLE_HORIZON: usize = 4;

pub fn asymptotics(f: &ProjMap, p: &ProjPoint, horizon: usize) -> Result<MultiplicityReport> {
    asymptotics_with(f, p, horizon, &MultOptions::default())
}

pub fn asymptotics_with(
    f: &ProjMap,
    p: &ProjPoint,
    horizon: usize,
    opts: &MultOptions,
) -> Result<MultiplicityReport> {
    check_n(horizon)?;
    let orbit = f.iterate_lognorm(p, horizon).points;
    let mu_series = (1..=horizon)
        .map(|n| mu_order_with(f, p, n, opts))
        .collect::<Result<Vec<_>>>()?;
    let mu_steps = mu_steps(f, p, horizon, opts)?;
    let e_steps = e_steps(f, p, horizon, opts)?;
    let e_series: Vec<usize> = (1..=horizon).map(|n| e_steps[..n].iter().product()).collect();
    let c_series = (1..=horizon)
        .map(|n| c_order_with(f, p, n, opts))
        .collect::<Result<Vec<_>>>()?;
    let ch = horizon.min(COCYCLE_HORIZON);
    let free = MultOptions {
        chart: None,
        target_chart: None,
        ..*opts
    };
    let mut mu_orbit = Vec::new();
    let mut c_orbit = Vec::new();
    for n in 1..ch {
        let x = &orbit[n];
        mu_orbit.push(
            (1..=ch - n)
                .map(|k| mu_order_with(f, x, k, &free))
                .collect::<Result<Vec<_>>>()?,
        );
        c_orbit.push(
            (1..=ch - n)
                .map(|k| c_order_with(f, x, k, &free))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let nn = horizon as f64;
    let mu_n = *mu_series.last().unwrap() as f64;
    let mut report = MultiplicityReport {
        point: *p,
        degree: f.degree(),
        horizon,
        orbit,
        mu_inf_est: (3.0 + 2.0 * mu_n).powf(1.0 / nn),
        mu_inf_est_alt: (1.0 + mu_n).powf(1.0 / nn),
        e_inf_est: (*e_series.last().unwrap() as f64).powf(1.0 / nn),
        c_inf_est: (*c_series.last().unwrap() as f64).powf(1.0 / nn),
        mu_series,
        mu_steps,
        e_series,
        e_steps,
        c_series,
        mu_orbit,
        c_orbit,
        cocycle_horizon: ch,
        inequality_verdicts: BTreeMap::new(),
    };
    report.inequality_verdicts = inequality_report(&report, f.degree());
    Ok(report)
}

/// Named verdicts for the one-step inequalities and the cocycle laws.
pub fn inequality_report(r: &MultiplicityReport, d: usize) -> BTreeMap<String, bool> {
    let mut v = BTreeMap::new();
    let (mu, e, c) = (r.mu_series[0], r.e_series[0], r.c_series[0]);
    v.insert("mu_lower_bound_by_c".into(), 2 * (c as i64 - 1) <= mu as i64);
    v.insert("mu_upper_bound_by_e".into(), mu as i64 <= 2 * (e as i64 - 1));
    v.insert("c_at_most_sqrt_e".into(), c * c <= e);
    v.insert("mu_at_most_3(d-1)".into(), mu <= 3 * (d - 1));
    v.insert("e_between_1_and_d2".into(), 1 <= e && e <= d * d);
    v.insert("c_between_1_and_d".into(), 1 <= c && c <= d);

    let h = r.horizon;
    let series_bounds = (1..=h).all(|n| {
        let dn = d.saturating_pow(n as u32);
        let en = r.e_series[n - 1];
        let cn = r.c_series[n - 1];
        1 <= en && en <= dn.saturating_mul(dn) && 1 <= cn && cn <= dn
    });
    v.insert("series_bounds".into(), series_bounds);
    let monotone = r.mu_series.windows(2).all(|w| w[0] <= w[1])
        && r.e_series.windows(2).all(|w| w[0] <= w[1]);
    v.insert("mu_e_monotone".into(), monotone);

    let mut additive = true;
    let mut multiplicative = true;
    let mut supermult = true;
    let mut submult = true;
    let ch = r.cocycle_horizon;
    for n in 1..ch {
        for k in 1..=ch - n {
            let tail: usize = r.mu_steps[n..n + k].iter().sum();
            additive &= r.mu_series[n + k - 1] == r.mu_series[n - 1] + tail;
            let e_tail: usize = r.e_steps[n..n + k].iter().product();
            multiplicative &= r.e_series[n + k - 1] == r.e_series[n - 1] * e_tail;
            supermult &= r.c_series[n + k - 1] >= r.c_series[n - 1] * r.c_orbit[n - 1][k - 1];
            submult &= 3 + 2 * r.mu_series[n + k - 1]
                <= (3 + 2 * r.mu_series[n - 1]) * (3 + 2 * r.mu_orbit[n - 1][k - 1]);
        }
    }
    // the first step also splits the direct value
    additive &= r.mu_series[0] == r.mu_steps[0];
    v.insert("mu_additive".into(), additive);
    v.insert("e_multiplicative".into(), multiplicative);
    v.insert("c_supermultiplicative".into(), supermult);
    v.insert("mu_hat_submultiplicative".into(), submult);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::HomogPoly3;

    fn map(s: [&str; 3]) -> ProjMap {
        ProjMap::validate(s.map(|x| HomogPoly3::parse(x).unwrap())).unwrap()
    }

    fn pt(z: f64, w: f64, t: f64) -> ProjPoint {
        ProjPoint::real(z, w, t).unwrap()
    }

    #[test]
    fn power_map_orders() {
        let f = map(["z^2", "w^2", "t^2"]);
        assert_eq!(mu_order(&f, &pt(1.0, 1.0, 1.0), 1).unwrap(), 0);
        assert_eq!(mu_order(&f, &pt(1.0, 0.0, 1.0), 1).unwrap(), 1);
        assert_eq!(mu_order(&f, &pt(0.0, 0.0, 1.0), 1).unwrap(), 2);
        assert_eq!(c_order(&f, &pt(0.0, 0.0, 1.0), 1).unwrap(), 2);
        assert_eq!(c_order(&f, &pt(1.0, 1.0, 1.0), 1).unwrap(), 1);
        assert_eq!(e_local(&f, &pt(0.0, 0.0, 1.0), 1).unwrap(), 4);
        assert_eq!(e_local(&f, &pt(1.0, 1.0, 1.0), 1).unwrap(), 1);
        assert_eq!(e_local(&f, &pt(1.0, 0.0, 1.0), 1).unwrap(), 2);
    }

    #[test]
    fn example_map_orders() {
        let f = map(["2*z*t + w^2", "z^2", "t^2"]);
        let p = pt(0.0, 0.0, 1.0);
        assert_eq!(mu_order(&f, &p, 1).unwrap(), 2);
        assert_eq!(c_order(&f, &p, 1).unwrap(), 1);
        assert_eq!(e_local(&f, &p, 1).unwrap(), 4);
    }

    #[test]
    fn power_map_asymptotics() {
        let f = map(["z^2", "w^2", "t^2"]);
        let r = asymptotics(&f, &pt(0.0, 0.0, 1.0), 3).unwrap();
        assert_eq!(r.e_series, vec![4, 16, 64]);
        assert_eq!(r.c_series, vec![2, 4, 8]);
        assert!((r.e_inf_est - 4.0).abs() < 1e-12);
        assert!((r.c_inf_est - 2.0).abs() < 1e-12);
        assert!(r.inequality_verdicts.values().all(|b| *b), "{:?}", r.inequality_verdicts);
        let r = asymptotics(&f, &pt(1.0, 1.0, 1.0), 3).unwrap();
        assert_eq!(r.mu_series, vec![0, 0, 0]);
        assert_eq!(r.e_series, vec![1, 1, 1]);
        assert_eq!(r.c_series, vec![1, 1, 1]);
    }

    #[test]
    fn example_map_asymptotics() {
        let f = map(["2*z*t + w^2", "z^2", "t^2"]);
        let r = asymptotics(&f, &pt(0.0, 0.0, 1.0), 4).unwrap();
        assert_eq!(r.e_series, vec![4, 16, 64, 256]);
        assert_eq!(r.c_series, vec![1, 1, 1, 1]);
        assert!(r.inequality_verdicts.values().all(|b| *b), "{:?}", r.inequality_verdicts);
    }

    #[test]
    fn chart_independence() {
        let f = map(["z^2 + 0.3*w*t", "w^2", "t^2 - 0.2*z*w"]);
        let p = pt(0.8, 0.0, 1.0);
        let a = MultOptions { chart: Some(2), ..Default::default() };
        let b = MultOptions { chart: Some(0), target_chart: Some(0), ..Default::default() };
        for n in 1..=2 {
            assert_eq!(mu_order_with(&f, &p, n, &a).unwrap(), mu_order_with(&f, &p, n, &b).unwrap());
            assert_eq!(c_order_with(&f, &p, n, &a).unwrap(), c_order_with(&f, &p, n, &b).unwrap());
            assert_eq!(e_local_with(&f, &p, n, &a).unwrap(), e_local_with(&f, &p, n, &b).unwrap());
        }
    }

    #[test]
    fn ladder_agrees_on_simple_cases() {
        let f = map(["z^2", "w^2", "t^2"]);
        assert_eq!(e_local_ladder(&f, &pt(1.0, 1.0, 1.0)).unwrap(), 1);
        assert_eq!(e_local_ladder(&f, &pt(1.0, 0.0, 1.0)).unwrap(), 2);
        assert_eq!(e_local_ladder(&f, &pt(0.0, 0.0, 1.0)).unwrap(), 4);
    }
}
