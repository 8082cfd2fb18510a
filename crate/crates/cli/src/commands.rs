//! One function per subcommand. Each fills a report and, when the command
//! has a series, a CSV table.

use std::collections::BTreeMap;

use greenp2_core::invariants::{
    classify, exceptional_sets, gen_lattes_ueda, gen_table1, invariant_lines, invariant_orbits, transition_matrix,
    Table1Row,
};
use greenp2_core::multiplicity::{asymptotics, sample_critical_points};
use greenp2_core::potentials::{
    curve_potential, default_r_grid, equidist_distance, green, green_lift, inner_rate, kiselman_decay_scan,
    kiselman_estimate, lelong_estimate, volume_decay, ChartBall,
};
use greenp2_core::{HomogPoly3, ProjMap, ProjPoint};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::args::{GenKind, Global, Potential, PotentialArgs};
use crate::error::CliError;
use crate::mapfile::MapFile;
use crate::report::{num, Csv, Report};

pub const GREEN_TOL: f64 = 1e-8;
pub const GREEN_SAMPLES: usize = 100;
pub const MULT_POINTS: usize = 5;
pub const MULT_HORIZON: usize = 3;
pub const EXCEPTIONAL_HORIZON: usize = 3;
pub const EQUIDIST_N: usize = 8;
pub const EQUIDIST_SAMPLES: usize = 10_000;
/// Clipped fraction of samples at which an equidistribution run is flagged.
pub const CLIP_LIMIT: f64 = 0.05;
pub const CURVE_DEPTH: usize = 8;
pub const VOLUME_N: usize = 4;
pub const VOLUME_SAMPLES: usize = 20_000;

pub type Output = (Report, Option<Csv>);

fn tol(g: &Global, default: f64) -> Result<f64, CliError> {
    let t = g.tol.unwrap_or(default);
    if !(t > 0.0 && t.is_finite()) {
        return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
    }
    Ok(t)
}

fn positive(name: &str, v: Option<usize>, default: usize) -> Result<usize, CliError> {
    match v.unwrap_or(default) {
        0 => Err(CliError::Usage(format!("--{name} must be positive"))),
        v => Ok(v),
    }
}

/// `z,w,t` with complex entries such as `0.5-1i`.
pub fn parse_point(s: &str) -> Result<ProjPoint, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!("point needs three comma-separated coordinates, got `{s}`")));
    }
    let mut x = [Complex64::new(0.0, 0.0); 3];
    for (xi, p) in x.iter_mut().zip(&parts) {
        *xi = p.parse().map_err(|_| CliError::Usage(format!("cannot read `{p}` as a complex number")))?;
    }
    ProjPoint::new(x).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_weights(s: &str) -> Result<(f64, f64), CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("cannot read weights `{s}`")))?;
    match v[..] {
        [a, b] if a > 0.0 && b > 0.0 => Ok((a, b)),
        _ => Err(CliError::Usage("weights are two positive numbers `a1,a2`".into())),
    }
}

fn parse_curve(s: &str) -> Result<HomogPoly3, CliError> {
    HomogPoly3::parse(s).map_err(|e| CliError::parse("curve", e.to_string()))
}

fn map_summary(f: &ProjMap) -> serde_json::Value {
    json!({ "degree": f.degree(), "nondegeneracy_residual": f.nondegeneracy_residual() })
}

pub fn green_cmd(f: &ProjMap, g: &Global, point: Option<&str>) -> Result<Output, CliError> {
    let tol = tol(g, GREEN_TOL)?;
    let mut r = Report::new("green");
    r.set("map", map_summary(f)).set("tol", tol).set("seed", g.seed);
    let points = match point {
        Some(p) => {
            r.set("samples", 1);
            vec![parse_point(p)?]
        }
        None => {
            let samples = positive("samples", g.samples, GREEN_SAMPLES)?;
            r.set("samples", samples);
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            (0..samples).map(|_| ProjPoint::random(&mut rng)).collect()
        }
    };
    let mut csv = Csv::new(&["index", "value", "n_used", "tail_bound"]);
    let evals: Vec<_> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let e = green(f, p, tol);
            csv.push(vec![i.to_string(), num(e.value), e.n_used.to_string(), num(e.tail_bound)]);
            json!({ "point": p, "value": e.value, "n_used": e.n_used, "tail_bound": e.tail_bound })
        })
        .collect();
    r.set("evaluations", evals);
    Ok((r, Some(csv)))
}

pub fn mult_cmd(f: &ProjMap, g: &Global, point: Option<&str>) -> Result<Output, CliError> {
    let horizon = positive("n", g.n, MULT_HORIZON)?;
    let mut r = Report::new("mult");
    r.set("map", map_summary(f)).set("horizon", horizon).set("seed", g.seed);
    let points = match point {
        Some(p) => {
            r.set("samples", 1);
            vec![parse_point(p)?]
        }
        None => {
            let count = positive("samples", g.samples, MULT_POINTS)?;
            r.set("samples", count);
            sample_critical_points(f, count, g.seed)?
        }
    };
    let mut csv = Csv::new(&["index", "mu", "e", "c", "violations"]);
    let mut entries = Vec::new();
    for (i, p) in points.iter().enumerate() {
        match asymptotics(f, p, horizon) {
            Ok(rep) => {
                let bad: Vec<&String> =
                    rep.inequality_verdicts.iter().filter(|(_, ok)| !**ok).map(|(k, _)| k).collect();
                if !bad.is_empty() {
                    r.flag("inequality_violation");
                }
                let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
                csv.push(vec![
                    i.to_string(),
                    join(&rep.mu_series),
                    join(&rep.e_series),
                    join(&rep.c_series),
                    bad.len().to_string(),
                ]);
                entries.push(serde_json::to_value(&rep).expect("report serializes"));
            }
            Err(e) if e.is_numerical() => {
                r.flag("point_failed");
                csv.push(vec![i.to_string(), String::new(), String::new(), String::new(), String::new()]);
                entries.push(json!({ "point": p, "error": { "code": e.code(), "message": e.to_string() } }));
            }
            Err(e) => return Err(e.into()),
        }
    }
    r.set("points", entries);
    Ok((r, Some(csv)))
}

pub fn invariants_cmd(f: &ProjMap, g: &Global) -> Result<Output, CliError> {
    let horizon = positive("n", g.n, EXCEPTIONAL_HORIZON)?;
    let mut r = Report::new("invariants");
    r.set("map", map_summary(f)).set("horizon", horizon);
    let sets = exceptional_sets(f, horizon)?;
    if sets.e2_points.len() != sets.confirmed().count() {
        r.flag("undetermined_points");
    }
    r.set("invariant_lines", invariant_lines(f))
        .set("invariant_orbits", invariant_orbits(f)?)
        .set("exceptional", &sets)
        .set("transition", transition_matrix(f, None)?);
    Ok((r, None))
}

pub fn classify_cmd(f: &ProjMap, g: &Global) -> Result<Output, CliError> {
    let horizon = positive("n", g.n, EXCEPTIONAL_HORIZON)?;
    let mut r = Report::new("classify");
    r.set("map", map_summary(f)).set("horizon", horizon);
    let sets = exceptional_sets(f, horizon)?;
    let c = classify(&sets);
    if c.undetermined > 0 {
        r.flag("undetermined_points");
    }
    r.set("row", c.row)
        .set("label", c.label)
        .set("lines", c.lines)
        .set("points", c.points)
        .set("undetermined", c.undetermined)
        .set("incidence", &c.incidence)
        .set("assumption_flag", sets.assumption_flag);
    Ok((r, None))
}

pub fn equidist_cmd(f: &ProjMap, g: &Global, curve: &str) -> Result<Output, CliError> {
    let n = positive("n", g.n, EQUIDIST_N)?;
    let samples = positive("samples", g.samples, EQUIDIST_SAMPLES)?;
    let phi = parse_curve(curve)?;
    let rep = equidist_distance(f, &phi, n, samples, g.seed);
    let mut r = Report::new("equidist");
    let mut csv = Csv::new(&["n", "value", "stderr", "clip_fraction"]);
    for row in &rep.per_n {
        csv.push(vec![row.n.to_string(), num(row.l1_distance), num(row.stderr), num(row.clip_fraction)]);
        if row.clip_fraction >= CLIP_LIMIT {
            r.flag("clipping");
        }
    }
    r.set("map", map_summary(f))
        .set("curve", curve)
        .set("n", n)
        .set("samples", rep.samples)
        .set("seed", rep.seed)
        .set("tol", rep.green_tol)
        .set("clip_floor", rep.clip_floor)
        .set("per_n", &rep.per_n)
        .set("nonconvergence", rep.nonconvergence);
    Ok((r, Some(csv)))
}

type Psh = Box<dyn Fn(Complex64, Complex64) -> f64 + Sync>;

/// The potential as a function of affine coordinates in `chart`.
fn potential(f: &ProjMap, g: &Global, a: &PotentialArgs, chart: usize, r: &mut Report) -> Result<Psh, CliError> {
    let lift = move |u: Complex64, v: Complex64| {
        let mut x = [Complex64::new(1.0, 0.0); 3];
        let o = [(chart + 1) % 3, (chart + 2) % 3];
        let (lo, hi) = (o[0].min(o[1]), o[0].max(o[1]));
        x[lo] = u;
        x[hi] = v;
        x
    };
    r.set("potential", format!("{:?}", a.potential).to_lowercase());
    Ok(match a.potential {
        Potential::Jacobian => {
            let j = f.jacobian();
            Box::new(move |u, v| j.evaluate(&lift(u, v)).norm().ln())
        }
        Potential::Green => {
            let tol = tol(g, GREEN_TOL)?;
            r.set("tol", tol);
            let f = f.clone();
            Box::new(move |u, v| green_lift(&f, &lift(u, v), tol))
        }
        Potential::Curve => {
            let n = positive("n", g.n, CURVE_DEPTH)?;
            let phi = parse_curve(&a.curve)?;
            r.set("curve", &a.curve).set("n", n);
            let f = f.clone();
            Box::new(move |u, v| {
                let x = lift(u, v);
                let norm = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().ln();
                match ProjPoint::new(x) {
                    Ok(p) => curve_potential(&f, &phi, n, &p).map_or(f64::NEG_INFINITY, |v| v + norm),
                    Err(_) => f64::NEG_INFINITY,
                }
            })
        }
    })
}

fn chart_center(point: &str, chart: Option<usize>) -> Result<(usize, (Complex64, Complex64)), CliError> {
    let p = parse_point(point)?;
    let chart = chart.unwrap_or_else(|| p.chart());
    if chart > 2 {
        return Err(CliError::Usage("--chart is 0, 1 or 2".into()));
    }
    let c = p.affine(chart).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((chart, c))
}

pub fn lelong_cmd(f: &ProjMap, g: &Global, a: &PotentialArgs) -> Result<Output, CliError> {
    let mut r = Report::new("lelong");
    let (chart, c) = chart_center(&a.point, a.chart)?;
    let u = potential(f, g, a, chart, &mut r)?;
    let est = lelong_estimate(&u, c, &default_r_grid())?;
    r.set("map", map_summary(f)).set("chart", chart).set("estimate", est);
    Ok((r, None))
}

pub fn kiselman_cmd(
    f: &ProjMap,
    g: &Global,
    a: &PotentialArgs,
    weights: &str,
    scan: bool,
) -> Result<Output, CliError> {
    let mut r = Report::new("kiselman");
    let (chart, c) = chart_center(&a.point, a.chart)?;
    let u = potential(f, g, a, chart, &mut r)?;
    r.set("map", map_summary(f)).set("chart", chart);
    if scan {
        let alphas: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
        let rows = kiselman_decay_scan(&u, &[c], &alphas, &default_r_grid())?;
        let mut csv = Csv::new(&["alpha", "estimate"]);
        for row in &rows {
            csv.push(vec![num(row.alpha), num(row.sup_estimate)]);
        }
        r.set("scan", rows);
        Ok((r, Some(csv)))
    } else {
        let w = parse_weights(weights)?;
        r.set("estimate", kiselman_estimate(&u, c, w, &default_r_grid())?);
        Ok((r, None))
    }
}

pub fn volume_cmd(f: &ProjMap, g: &Global, point: &str, radius: f64, chart: Option<usize>) -> Result<Output, CliError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(CliError::Usage("--radius must be positive".into()));
    }
    let n = positive("n", g.n, VOLUME_N)?;
    let samples = positive("samples", g.samples, VOLUME_SAMPLES)?;
    let (chart, center) = chart_center(point, chart)?;
    let ball = ChartBall { chart, center, radius };
    let mut r = Report::new("volume");
    let mut csv = Csv::new(&["n", "jacobian_bound", "jacobian_stderr", "occupancy", "occupancy_stderr"]);
    let mut rows = Vec::new();
    for k in 1..=n {
        let v = volume_decay(f, &ball, k, samples, g.seed)?;
        csv.push(vec![
            k.to_string(),
            num(v.jacobian_bound),
            num(v.jacobian_stderr),
            num(v.occupancy),
            num(v.occupancy_stderr),
        ]);
        rows.push(v);
    }
    let vols: Vec<(usize, f64)> = rows.iter().map(|v| (v.n, v.occupancy)).collect();
    let rate = if n >= 2 {
        match inner_rate(&vols) {
            Ok(x) => Some(x),
            Err(_) => {
                r.flag("rate_fit_failed");
                None
            }
        }
    } else {
        None
    };
    r.set("map", map_summary(f))
        .set("ball", ball)
        .set("samples", samples)
        .set("seed", g.seed)
        .set("per_n", rows)
        .set("inner_rate", rate);
    Ok((r, Some(csv)))
}

/// Generated map files; the metadata records how to regenerate them.
pub fn gen_cmd(g: &Global, kind: GenKind) -> Result<MapFile, CliError> {
    let d = g.d.unwrap_or(2);
    let mut meta = BTreeMap::new();
    meta.insert("d".to_string(), json!(d));
    let f = match kind {
        GenKind::Table1 => {
            let id = g.row.as_deref().ok_or_else(|| CliError::Usage("gen table1 needs --row".into()))?;
            let row: Table1Row = id.parse().map_err(|e: greenp2_core::Error| CliError::Usage(e.to_string()))?;
            meta.insert("generator".into(), json!("table1"));
            meta.insert("row".into(), json!(row.id()));
            meta.insert("seed".into(), json!(g.seed));
            gen_table1(row, d, g.seed)?
        }
        GenKind::LattesUeda => {
            meta.insert("generator".into(), json!("lattes-ueda"));
            gen_lattes_ueda(d)?
        }
    };
    Ok(MapFile::from_map(&f, meta))
}
