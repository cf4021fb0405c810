use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use evsched_bench::{instance, points};
use evsched_core::{build, solve_lp, solve_milp, Series, SolveConfig, Variant};

fn build_models(c: &mut Criterion) {
    let mut group = c.benchmark_group("build");
    for series in Series::ALL {
        let inst = instance(series, true, 1);
        let cfg = points(series, true);
        for variant in Variant::BOTH {
            group.bench_with_input(
                BenchmarkId::new(variant.as_str(), series.name()),
                &inst,
                |b, inst| b.iter(|| build(black_box(inst), cfg, variant)),
            );
        }
    }
    group.finish();
}

fn root_relaxation(c: &mut Criterion) {
    let mut group = c.benchmark_group("root_lp");
    let inst = instance(Series::S1, true, 1);
    let cfg = points(Series::S1, true);
    for variant in Variant::BOTH {
        let model = build(&inst, cfg, variant).model;
        group.bench_function(variant.as_str(), |b| b.iter(|| solve_lp(black_box(&model))));
    }
    group.finish();
}

fn branch_and_bound(c: &mut Criterion) {
    let mut group = c.benchmark_group("milp");
    group.sample_size(10);
    let solve = SolveConfig::default();
    for series in [Series::S1, Series::S2] {
        let inst = instance(series, false, 4);
        let cfg = points(series, false);
        for variant in Variant::BOTH {
            let model = build(&inst, cfg, variant).model;
            group.bench_function(BenchmarkId::new(variant.as_str(), series.name()), |b| {
                b.iter(|| solve_milp(black_box(&model), &solve).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, build_models, root_relaxation, branch_and_bound);
criterion_main!(benches);
