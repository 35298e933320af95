use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use liftquad::lift::{assemble_b, lift, BConstruction, LiftConfig};
use liftquad_bench::{bench_params, bench_state};
use std::hint::black_box;

fn bench_lift(c: &mut Criterion) {
    let x = bench_state();
    let mut group = c.benchmark_group("lift");
    for n in [15usize, 25] {
        let cfg = LiftConfig::normalized_for_envelope(n, n, 0.5, 0.6);
        group.bench_with_input(BenchmarkId::from_parameter(n), &cfg, |b, cfg| {
            b.iter(|| lift(black_box(&x), cfg))
        });
    }
    group.finish();
}

fn bench_assemble_b(c: &mut Criterion) {
    let x = bench_state();
    let params = bench_params();
    let mut group = c.benchmark_group("assemble_b");
    for n in [15usize, 25] {
        for (label, mode) in [
            ("columnwise", BConstruction::Columnwise),
            ("closed-form", BConstruction::ClosedForm),
        ] {
            let cfg = LiftConfig {
                b_construction: mode,
                ..LiftConfig::normalized_for_envelope(n, n, 0.5, 0.6)
            };
            group.bench_function(BenchmarkId::new(label, n), |b| {
                b.iter(|| assemble_b(black_box(&x), &params, &cfg))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_lift, bench_assemble_b);
criterion_main!(benches);
