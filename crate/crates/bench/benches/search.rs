use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use torus_ksys::hyperbolic::geometric_horoball;
use torus_ksys::ksystem::{branch_profile, kappa, kappa_min, SearchOptions};
use torus_ksys::numtheory::gamma_graph_unchecked;
use torus_ksys::triangulation::{default_labelling, enumerate};
use torus_ksys_bench::sample;

fn search(c: &mut Criterion) {
    let mut group = c.benchmark_group("kappa_min");
    group.sample_size(10);
    for n in [10, 12, 13] {
        for symmetry in [true, false] {
            let opts = SearchOptions { max_n: n, symmetry };
            let id = BenchmarkId::new(if symmetry { "reduced" } else { "full" }, n);
            group.bench_with_input(id, &n, |b, &n| b.iter(|| kappa_min(n, &opts).unwrap()));
        }
    }
    group.finish();
}

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate");
    group.sample_size(10);
    for n in [10, 12] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| enumerate(n, false).unwrap().count())
        });
    }
    group.finish();
}

fn per_triangulation(c: &mut Criterion) {
    let corpus = sample(24, 32);
    c.bench_function("label_and_kappa/24", |b| {
        b.iter(|| {
            for t in &corpus {
                black_box(kappa(t));
            }
        })
    });
    c.bench_function("branch_profiles/24", |b| {
        b.iter(|| {
            for t in &corpus {
                for v in 0..t.n() {
                    black_box(branch_profile(t, v).unwrap());
                }
            }
        })
    });
    let labelled: Vec<_> = corpus.iter().map(|t| (t, default_labelling(t))).collect();
    c.bench_function("geometric_horoball/24", |b| {
        b.iter(|| {
            for (t, l) in &labelled {
                black_box(geometric_horoball(t, l).unwrap());
            }
        })
    });
}

fn gamma(c: &mut Criterion) {
    let g = gamma_graph_unchecked(500).unwrap();
    c.bench_function("gamma_weight_sum/500", |b| b.iter(|| g.weight_sum()));
}

criterion_group!(benches, search, enumeration, per_triangulation, gamma);
criterion_main!(benches);
