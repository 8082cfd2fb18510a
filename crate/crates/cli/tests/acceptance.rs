//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::LN_2;
use std::process::Command;
use std::time::Instant;

use greenp2_core::invariants::{
    classify, exceptional_sets, gen_lattes_ueda, gen_table1, invariant_lines, invariant_points, transition_matrix,
    Table1Row,
};
use greenp2_core::multiplicity::{asymptotics, c_order, e_local, mu_order, sample_critical_points};
use greenp2_core::potentials::{
    default_r_grid, equidist_distance, green, green_lift, inner_rate, kiselman_decay_scan, kiselman_estimate,
    sublevel_volume, volume_decay, ChartBall, ChartBox,
};
use greenp2_core::{Complex64, HomogPoly3, ProjMap, ProjPoint};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn map(s: [&str; 3]) -> ProjMap {
    ProjMap::validate(s.map(|x| HomogPoly3::parse(x).unwrap())).unwrap()
}

fn power_map() -> ProjMap {
    map(["z^2", "w^2", "t^2"])
}

fn example_map() -> ProjMap {
    map(["2*z*t + w^2", "z^2", "t^2"])
}

fn pt(z: f64, w: f64, t: f64) -> ProjPoint {
    ProjPoint::real(z, w, t).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn green_closed_form() -> Outcome {
    let f = power_map();
    let g = green(&f, &pt(2.0, 1.0, 1.0), 1e-8).value;
    let exact = LN_2 - 0.5 * 6f64.ln();
    let err = (g - exact).abs();
    ensure(err <= 1e-6, || format!("G = {g}, expected {exact}"))?;
    Ok(format!("|G - (log 2 - log 6 / 2)| = {err:.1e}"))
}

fn green_invariance() -> Outcome {
    let mut worst = 0.0f64;
    for s in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let f = ProjMap::random(2, &mut rng).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let x = *ProjPoint::random(&mut rng).coords();
            let lhs = green_lift(&f, &f.lift(&x), 1e-8);
            let rhs = 2.0 * green_lift(&f, &x, 1e-8);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    ensure(worst <= 1e-5, || format!("max |G(F x) - 2 G(x)| = {worst:.2e}"))?;
    Ok(format!("max |G(F x) - 2 G(x)| = {worst:.1e} over 1000 points"))
}

fn multiplicity_inequalities() -> Outcome {
    let mut checked = 0;
    for i in 0..50u64 {
        let d = 2 + (i % 2) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
        let f = ProjMap::random(d, &mut rng).map_err(|e| e.to_string())?;
        for p in sample_critical_points(&f, 20, i).map_err(|e| e.to_string())? {
            let fail = |e: greenp2_core::Error| format!("map {i} at {:?}: {e}", p.coords());
            let mu = mu_order(&f, &p, 1).map_err(fail)?;
            let e = e_local(&f, &p, 1).map_err(fail)?;
            let cc = c_order(&f, &p, 1).map_err(fail)?;
            let ok = 2 * (cc - 1) <= mu
                && mu <= 2 * (e - 1)
                && cc * cc <= e
                && mu <= 3 * (d - 1)
                && e <= d * d
                && cc <= d;
            ensure(ok, || format!("map {i}: (mu, e, c) = ({mu}, {e}, {cc}) at {:?}", p.coords()))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} critical points, all inequalities hold"))
}

fn cocycle_corpus() -> Vec<(String, ProjMap, ProjPoint)> {
    let mut corpus = Vec::new();
    for row in Table1Row::ALL {
        let f = gen_table1(row, 2, 0).unwrap();
        let sets = exceptional_sets(&f, 3).unwrap();
        for p in sets.confirmed() {
            corpus.push((format!("row {row}"), f.clone(), p.point));
        }
    }
    for d in [2, 3] {
        let f = gen_table1(Table1Row::R33, d, 0).unwrap();
        for p in [pt(1.0, 0.0, 0.0), pt(0.0, 1.0, 0.0), pt(0.0, 0.0, 1.0)] {
            corpus.push((format!("power map d = {d}"), f.clone(), p));
        }
    }
    let f = example_map();
    for p in [pt(0.0, 0.0, 1.0), pt(1.0, 0.0, 0.0), pt(0.0, 1.0, 0.0)] {
        corpus.push(("example map".into(), f.clone(), p));
    }
    for i in 0..20u64 {
        let d = 2 + (i % 2) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(500 + i);
        let f = ProjMap::random(d, &mut rng).unwrap();
        for p in sample_critical_points(&f, 3, i).unwrap() {
            corpus.push((format!("random map {i}"), f.clone(), p));
        }
    }
    corpus
}

fn cocycle_laws() -> Outcome {
    let corpus = cocycle_corpus();
    for (name, f, p) in &corpus {
        let fail = |e: greenp2_core::Error| format!("{name} at {:?}: {e}", p.coords());
        let r = asymptotics(f, p, 4).map_err(fail)?;
        for law in ["mu_additive", "e_multiplicative", "c_supermultiplicative", "mu_hat_submultiplicative"] {
            ensure(r.inequality_verdicts[law], || format!("{law} fails for {name} at {:?}", p.coords()))?;
        }
        // additivity runs through the pullbacks J f^k o f^n, recomputed here
        for n in 1..4 {
            for k in 1..=4 - n {
                let pulled: usize = r.mu_steps[n..n + k].iter().sum();
                ensure(r.mu_series[n + k - 1] == r.mu_series[n - 1] + pulled, || {
                    format!("mu not additive at n = {n}, k = {k} for {name}")
                })?;
                let (m, m1, m2) = (r.mu_series[n + k - 1], r.mu_series[n - 1], r.mu_orbit[n - 1][k - 1]);
                ensure(3 + 2 * m <= (3 + 2 * m1) * (3 + 2 * m2), || format!("mu hat at n = {n}, k = {k}"))?;
                ensure(r.c_series[n + k - 1] >= r.c_series[n - 1] * r.c_orbit[n - 1][k - 1], || {
                    format!("c not supermultiplicative at n = {n}, k = {k} for {name}")
                })?;
            }
        }
        let e2 = e_local(f, p, 2).map_err(fail)?;
        let e_next = e_local(f, &f.apply(p), 1).map_err(fail)?;
        ensure(e2 == r.e_series[0] * e_next, || format!("e(p, f^2) = {e2} for {name} at {:?}", p.coords()))?;
    }
    Ok(format!("{} base points, n + k <= 4", corpus.len()))
}

fn example_map_truth() -> Outcome {
    let f = example_map();
    let p = pt(0.0, 0.0, 1.0);
    let e = e_local(&f, &p, 1).map_err(|e| e.to_string())?;
    let mu = mu_order(&f, &p, 1).map_err(|e| e.to_string())?;
    let cs: Vec<usize> = (1..=5).map(|n| c_order(&f, &p, n)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    ensure(e == 4 && mu == 2 && cs.iter().all(|&x| x == 1), || format!("e = {e}, mu = {mu}, c = {cs:?}"))?;
    let sets = exceptional_sets(&f, 5).map_err(|e| e.to_string())?;
    ensure(sets.e1_lines.len() == 1, || format!("{} lines in E1", sets.e1_lines.len()))?;
    let l = sets.e1_lines[0].coeffs();
    ensure(l[0].norm() < 1e-9 && l[1].norm() < 1e-9, || format!("E1 line {l:?} is not t = 0"))?;
    let confirmed: Vec<ProjPoint> = sets.confirmed().map(|x| x.point).collect();
    let want = [pt(1.0, 0.0, 0.0), pt(0.0, 1.0, 0.0)];
    ensure(
        confirmed.len() == 2 && want.iter().all(|q| confirmed.iter().any(|x| x.distance(q) < 1e-8)),
        || format!("E2 = {confirmed:?}"),
    )?;
    ensure(sets.e2_points.iter().all(|x| x.point.distance(&p) > 1e-6), || "[0:0:1] listed in E2".into())?;
    Ok("e = 4, mu = 2, c = 1 for n <= 5, E1 = {t = 0}, E2 = {[1:0:0], [0:1:0]}".into())
}

fn power_map_structure() -> Outcome {
    let f = power_map();
    let lines = invariant_lines(&f);
    let mut axes: Vec<usize> = lines
        .iter()
        .filter_map(|l| {
            let v = l.coeffs();
            (0..3).find(|&i| (v[i].norm() - 1.0).abs() < 1e-9 && (0..3).all(|j| j == i || v[j].norm() < 1e-9))
        })
        .collect();
    axes.sort();
    ensure(lines.len() == 3 && axes == [0, 1, 2], || format!("lines {lines:?}"))?;
    let points = invariant_points(&f).map_err(|e| e.to_string())?;
    let corners = [pt(1.0, 0.0, 0.0), pt(0.0, 1.0, 0.0), pt(0.0, 0.0, 1.0)];
    ensure(
        points.len() == 3 && corners.iter().all(|q| points.iter().any(|x| x.distance(q) < 1e-9)),
        || format!("points {points:?}"),
    )?;
    let tm = transition_matrix(&f, None).map_err(|e| e.to_string())?;
    let diag = tm.t.len() == 3 && (0..3).all(|i| (0..3).all(|j| tm.t[i][j] == if i == j { 2 } else { 0 }));
    ensure(diag, || format!("t = {:?}", tm.t))?;
    ensure((tm.rho - 2.0).abs() < 1e-9, || format!("rho = {}", tm.rho))?;
    ensure(tm.perron.iter().all(|a| (a - 1.0).abs() < 1e-9), || format!("perron = {:?}", tm.perron))?;
    let row = classify(&exceptional_sets(&f, 3).map_err(|e| e.to_string())?).row;
    ensure(row == Table1Row::R33, || format!("row {row}"))?;
    Ok("three lines, three corners, T = diag(2,2,2), rho = 2, row 3-3".into())
}

fn table_round_trip() -> Outcome {
    let mut total = 0;
    for row in Table1Row::ALL {
        for seed in 0..10 {
            let f = gen_table1(row, 2, seed).map_err(|e| format!("row {row} seed {seed}: {e}"))?;
            let sets = exceptional_sets(&f, 3).map_err(|e| format!("row {row} seed {seed}: {e}"))?;
            let got = classify(&sets).row;
            ensure(got == row, || format!("row {row} seed {seed} classified as {got}"))?;
            total += 1;
        }
    }
    Ok(format!("{total}/{total} maps"))
}

fn lattes_ueda() -> Outcome {
    let f = gen_lattes_ueda(2).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let q = ProjPoint::random(&mut rng);
        let fib = f.preimages(&q).map_err(|e| e.to_string())?;
        ensure(fib.total_multiplicity == 4 && fib.complete, || format!("fiber count {}", fib.total_multiplicity))?;
    }
    let sets = exceptional_sets(&f, 3).map_err(|e| e.to_string())?;
    ensure(sets.e1_lines.is_empty() && sets.e2_points.is_empty(), || format!("{sets:?}"))?;
    Ok("valid, fibers of 4, E1 and E2 empty".into())
}

fn equidistribution() -> Outcome {
    let f = power_map();
    let generic = equidist_distance(&f, &HomogPoly3::parse("z + w + 2*t").unwrap(), 8, 10_000, 0);
    let rows = &generic.per_n;
    let last = rows[8].l1_distance;
    ensure(last < 0.02, || format!("distance {last} at n = 8"))?;
    for w in rows.windows(2) {
        let slack = 2.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        ensure(w[1].l1_distance <= w[0].l1_distance + slack, || format!("increase at n = {}", w[1].n))?;
    }
    ensure(!generic.nonconvergence, || "generic curve flagged".into())?;
    let line = equidist_distance(&f, &HomogPoly3::parse("z").unwrap(), 8, 10_000, 0);
    let d0 = &line.per_n[0];
    for r in &line.per_n {
        let slack = 2.0 * (d0.stderr.powi(2) + r.stderr.powi(2)).sqrt();
        ensure(r.l1_distance >= 0.1 && (r.l1_distance - d0.l1_distance).abs() <= slack, || {
            format!("z: distance {} at n = {}", r.l1_distance, r.n)
        })?;
    }
    ensure(line.nonconvergence, || "invariant line not flagged".into())?;
    Ok(format!("generic {last:.4} at n = 8; line z constant at {:.4}", d0.l1_distance))
}

fn kiselman_suite() -> Outcome {
    let r = default_r_grid();
    let o = (c(0.0, 0.0), c(0.0, 0.0));
    let lz = |z: Complex64, _w: Complex64| z.norm().ln();
    let lw = |_z: Complex64, w: Complex64| w.norm().ln();
    let est = |u: &dyn Fn(Complex64, Complex64) -> f64, a: (f64, f64)| {
        kiselman_estimate(u, o, a, &r).map(|k| k.slope).map_err(|e| e.to_string())
    };
    let mut worst: f64 = 0.0;
    for k in 1..=10 {
        let alpha = k as f64 / 10.0;
        let nw = est(&lw, (alpha, 1.0))?;
        let nz = est(&lz, (alpha, 1.0))?;
        ensure((nw - alpha).abs() <= 0.05, || format!("log|w| at alpha {alpha}: {nw}"))?;
        ensure((nz - 1.0).abs() <= 0.05, || format!("log|z| at alpha {alpha}: {nz}"))?;
        worst = worst.max((nw - alpha).abs()).max((nz - 1.0).abs());
    }
    let mixed = |z: Complex64, w: Complex64| {
        let (a, b) = (z.norm().ln(), w.norm().ln());
        0.5 * a + 1.5 * b + a.max(b)
    };
    let potentials: [&dyn Fn(Complex64, Complex64) -> f64; 3] = [&lz, &lw, &mixed];
    for u in potentials {
        for a in [(1.0, 1.0), (0.3, 1.0), (1.0, 0.6)] {
            let base = est(u, a)?;
            for lambda in [0.5, 2.0] {
                let scaled = est(u, (lambda * a.0, lambda * a.1))?;
                ensure((scaled - lambda * base).abs() <= 0.05 * lambda * base, || {
                    format!("homogeneity: {scaled} vs {lambda} * {base}")
                })?;
            }
        }
    }
    let line = |z: Complex64, w: Complex64| (z + w).norm().ln();
    let points = [o, (c(1e-3, 0.0), c(-1e-3, 0.0)), (c(0.0, -2e-3), c(0.0, 2e-3))];
    let alphas: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let scan = kiselman_decay_scan(line, &points, &alphas, &r).map_err(|e| e.to_string())?;
    let ests: Vec<f64> = scan.iter().map(|d| d.sup_estimate).collect();
    ensure(ests.windows(2).all(|w| w[0] <= w[1] + 1e-9), || format!("scan not monotone: {ests:?}"))?;
    ensure(ests[0] <= 0.1 + 0.05, || format!("scan at alpha 0.1: {}", ests[0]))?;
    Ok(format!("max deviation {worst:.3}; scan {:.3} at alpha 0.1, {:.3} at 1", ests[0], ests[9]))
}

fn skoda_decay() -> Outcome {
    let mut rates = Vec::new();
    for cc in [0.5, 1.0, 2.0] {
        let u = move |z: Complex64, _w: Complex64| cc * z.norm().ln();
        let k = ChartBox { center: (c(0.0, 0.0), c(0.0, 0.0)), radii: (1.0, 1.0) };
        let t: Vec<f64> = (1..=6).map(|i| cc * 0.5 * i as f64).collect();
        let table = sublevel_volume(u, &k, &t, 100_000, 11);
        let rate = table.decay_rate(50).map_err(|e| e.to_string())?;
        ensure(rate >= 0.9 * 2.0 / cc, || format!("c = {cc}: rate {rate}, need {}", 0.9 * 2.0 / cc))?;
        rates.push(format!("c = {cc}: {rate:.3}"));
    }
    Ok(rates.join(", "))
}

fn jacobian_sublevels() -> Outcome {
    let mut out = Vec::new();
    for d in [2usize, 3] {
        let f = gen_table1(Table1Row::R10, d, 0).map_err(|e| e.to_string())?;
        let jac = f.jacobian();
        let at = |w: Complex64, t: Complex64| jac.evaluate(&[c(1.0, 0.0), w, t]).norm();
        // center on the invariant line t = 0 where the transverse factor is largest
        let h = 1e-3;
        let w0 = (0..16)
            .map(|k| Complex64::from_polar(0.5, std::f64::consts::TAU * k as f64 / 16.0))
            .max_by(|a, b| at(*a, c(h, 0.0)).total_cmp(&at(*b, c(h, 0.0))))
            .unwrap();
        let u = |w: Complex64, t: Complex64| at(w, t).ln();
        let k = ChartBox { center: (w0, c(0.0, 0.0)), radii: (0.02, 0.05) };
        let t: Vec<f64> = (0..10).map(|i| 3.0 + 0.5 * i as f64).collect();
        let rate = sublevel_volume(u, &k, &t, 100_000, 12).decay_rate(50).map_err(|e| e.to_string())?;
        let need = 2.0 / (d as f64 - 1.0) - 0.1;
        ensure(rate >= need, || format!("d = {d}: exponent {rate}, need {need}"))?;
        out.push(format!("d = {d}: {rate:.3} (>= {need:.1})"));
    }
    Ok(out.join(", "))
}

fn rate_of(f: &ProjMap, ball: &ChartBall) -> Result<f64, String> {
    let vols: Vec<(usize, f64)> = (1..=4)
        .map(|n| volume_decay(f, ball, n, 20_000, 13).map(|v| (n, v.occupancy)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    inner_rate(&vols).map_err(|e| e.to_string())
}

fn volume_regimes() -> Outcome {
    let corner = ChartBall { chart: 2, center: (c(0.0, 0.0), c(0.0, 0.0)), radius: 0.1 };
    let fast = rate_of(&power_map(), &corner)?;
    ensure((fast - LN_2).abs() <= 0.15 * LN_2, || format!("corner rate {fast}, expected log 2"))?;
    let lattes = gen_lattes_ueda(2).map_err(|e| e.to_string())?;
    let generic = ChartBall { chart: 0, center: (c(0.3, 0.2), c(-0.4, 0.1)), radius: 0.1 };
    let slow = rate_of(&lattes, &generic)?;
    ensure(slow < 0.85 * LN_2, || format!("generic rate {slow} not below the log 2 band"))?;
    Ok(format!("corner {fast:.3} (log 2 = {LN_2:.3}), generic ball {slow:.3}"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fixture = |n: &str| format!("{}/fixtures/{n}", env!("CARGO_MANIFEST_DIR"));
    let power = fixture("power2.json");
    let example = fixture("example.json");
    let runs: Vec<Vec<&str>> = vec![
        vec!["gen", "table1", "--row", "1-2", "--d", "2", "--seed", "5"],
        vec!["gen", "lattes-ueda", "--d", "2"],
        vec!["green", "--map", &example, "--samples", "50", "--seed", "3"],
        vec!["mult", "--map", &example, "--samples", "3", "--seed", "3"],
        vec!["invariants", "--map", &example],
        vec!["classify", "--map", &power],
        vec!["equidist", "--map", &power, "--n", "5", "--samples", "5000", "--seed", "3"],
        vec!["lelong", "--map", &example, "--point", "0,0,1"],
        vec!["kiselman", "--map", &example, "--point", "0,0,1", "--scan"],
        vec!["volume", "--map", &power, "--point", "0,0,1", "--n", "3", "--samples", "5000", "--seed", "3"],
    ];
    for args in &runs {
        let mut outputs = Vec::new();
        for (i, threads) in ["1", "4"].iter().enumerate() {
            let csv = dir.path().join(format!("run{i}.csv"));
            let mut full: Vec<&str> = args.clone();
            full.extend(["--threads", threads]);
            let has_csv = !matches!(args[0], "gen" | "invariants" | "classify" | "lelong");
            let csv_arg = csv.to_str().unwrap().to_string();
            if has_csv {
                full.extend(["--csv", &csv_arg]);
            }
            let out = Command::new(env!("CARGO_BIN_EXE_greenp2"))
                .args(&full)
                .env_remove("GREENP2_DEFAULT_SEED")
                .output()
                .map_err(|e| e.to_string())?;
            ensure(out.status.code() == Some(0), || {
                format!("{args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
            })?;
            let csv_bytes = if has_csv { std::fs::read(&csv).map_err(|e| e.to_string())? } else { Vec::new() };
            outputs.push((out.stdout, csv_bytes));
        }
        ensure(outputs[0] == outputs[1], || format!("{args:?} differs between runs"))?;
    }
    Ok(format!("{} commands repeated, outputs byte-identical", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("green closed form", green_closed_form),
        ("green invariance", green_invariance),
        ("multiplicity inequalities", multiplicity_inequalities),
        ("cocycle laws", cocycle_laws),
        ("example map ground truth", example_map_truth),
        ("power map structure", power_map_structure),
        ("configuration round trip", table_round_trip),
        ("Lattes-Ueda map", lattes_ueda),
        ("equidistribution", equidistribution),
        ("Kiselman numbers", kiselman_suite),
        ("sublevel decay of log poles", skoda_decay),
        ("Jacobian sublevel scaling", jacobian_sublevels),
        ("volume decay regimes", volume_regimes),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1} s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1} s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
