use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use qsynth::solvers::{accepting_targets, symbolic_vi_weighted};
use qsynth::symgame::TrKind;
use qsynth_bench::{bench_task, encode};

fn encoding(c: &mut Criterion) {
    let task = bench_task(6, 3, 0);
    c.bench_function("encode/l6-o3", |b| b.iter(|| encode(&task, None)));
    c.bench_function("encode/l6-o3-budget20", |b| b.iter(|| encode(&task, Some(20))));
}

fn value_iteration(c: &mut Criterion) {
    let task = bench_task(6, 3, 0);
    let mut g = c.benchmark_group("vi/l6-o3");
    g.sample_size(10);
    for kind in [TrKind::Monolithic, TrKind::Partitioned] {
        g.bench_function(format!("{kind:?}"), |b| {
            b.iter_batched(
                || {
                    let mut sg = encode(&task, None);
                    let t = accepting_targets(&mut sg).unwrap();
                    (sg, t)
                },
                |(mut sg, t)| symbolic_vi_weighted(&mut sg, kind, t).unwrap().iterations,
                BatchSize::LargeInput,
            )
        });
    }
    g.finish();
}

criterion_group!(benches, encoding, value_iteration);
criterion_main!(benches);
