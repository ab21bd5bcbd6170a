use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use latticelab::par::Exec;
use latticelab::sampling::{gen, sample_sphere, stream, SamplerConfig};
use latticelab::seminet::{
    greedy_net_with, induce_semimetrics_with, BilinearSystem, SemimetricSpace,
};
use latticelab::{Exponent, FiniteMeasureSpace};

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn system(side: usize) -> BilinearSystem {
    let mut rng = stream(1, 0);
    BilinearSystem::new(side, side, gen::table(&mut rng, side, side)).unwrap()
}

fn semimetrics(c: &mut Criterion) {
    let mut group = c.benchmark_group("induce_semimetrics");
    for side in [64, 256] {
        let s = system(side);
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, side), &s, |b, s| {
                b.iter(|| induce_semimetrics_with(black_box(s), exec).unwrap())
            });
        }
    }
    group.finish();
}

fn greedy(c: &mut Criterion) {
    let mut group = c.benchmark_group("greedy_net");
    for side in [128, 512] {
        let (da, _) = induce_semimetrics_with(&system(side), Exec::default()).unwrap();
        let eps = 0.25 * da.diameter();
        for (name, exec) in MODES {
            group.bench_with_input(
                BenchmarkId::new(name, side),
                &da,
                |b, d: &SemimetricSpace| {
                    b.iter(|| greedy_net_with(black_box(d), eps, exec).unwrap())
                },
            );
        }
    }
    group.finish();
}

fn sphere(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_sphere");
    let mut rng = stream(2, 0);
    let sp = std::sync::Arc::new(
        FiniteMeasureSpace::new(gen::positive(&mut rng, 16, 0.5, 2.0)).unwrap(),
    );
    let x = gen::weighted_lp(&mut rng, &sp, Exponent::new(3.0).unwrap());
    let cfg = SamplerConfig {
        count: 2000,
        seed: 3,
    };
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| sample_sphere(black_box(&x), cfg, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, semimetrics, greedy, sphere);
criterion_main!(benches);
