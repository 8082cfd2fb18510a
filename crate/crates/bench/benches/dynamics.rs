use criterion::{black_box, criterion_group, criterion_main, Criterion};

use greenp2_core::multiplicity::{mu_order, sample_critical_points};
use greenp2_core::potentials::{equidist_distance, green};
use greenp2_core::{HomogPoly3, ProjMap, ProjPoint};

fn map(s: [&str; 3]) -> ProjMap {
    ProjMap::validate(s.map(|x| HomogPoly3::parse(x).unwrap())).unwrap()
}

fn quadratic() -> ProjMap {
    map(["z^2 + 0.3*z*w - 0.2*t^2", "w^2 - 0.7*z*t + 0.1*z^2", "t^2 + 0.4*w*t"])
}

pub fn dynamics(c: &mut Criterion) {
    let f = quadratic();
    let x = ProjPoint::real(0.3, -1.2, 0.8).unwrap();
    c.bench_function("green tol 1e-8", |b| b.iter(|| green(black_box(&f), black_box(&x), 1e-8)));
    c.bench_function("preimages d=2", |b| b.iter(|| f.preimages(black_box(&x)).unwrap()));

    let p = sample_critical_points(&f, 1, 0).unwrap()[0];
    c.bench_function("mu_order n=3", |b| b.iter(|| mu_order(black_box(&f), black_box(&p), 3).unwrap()));

    let phi = HomogPoly3::parse("z + w + 2*t").unwrap();
    let mut g = c.benchmark_group("equidist");
    g.sample_size(10);
    g.bench_function("n=4 samples=2000", |b| b.iter(|| equidist_distance(&f, &phi, 4, 2000, 0)));
    g.finish();
}

criterion_group!(benches, dynamics);
criterion_main!(benches);
