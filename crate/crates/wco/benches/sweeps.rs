//! Compares the rayon-parallel corpus sweeps against the sequential
//! fallback on the workloads the acceptance suite runs at larger scale.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use wco::corpus::{composition_exhaustive_sweep, corpus_cross_check, two_expansive_audit_sweep, Exec};

fn bench_cross_check(c: &mut Criterion) {
    let mut group = c.benchmark_group("corpus_cross_check");
    group.sample_size(10);
    for (label, exec) in [("parallel", Exec::Auto), ("sequential", Exec::Sequential)] {
        group.bench_function(label, |b| {
            b.iter(|| {
                let report = corpus_cross_check(2024, 60, 6, 4, 5, 10, exec);
                assert!(report.all_clear());
                black_box(report)
            })
        });
    }
    group.finish();
}

fn bench_two_expansive_audit(c: &mut Criterion) {
    let mut group = c.benchmark_group("two_expansive_audit");
    group.sample_size(10);
    for (label, exec) in [("parallel", Exec::Auto), ("sequential", Exec::Sequential)] {
        group.bench_function(label, |b| {
            b.iter(|| {
                let report = two_expansive_audit_sweep(7, 2_000, 5, exec);
                assert!(report.all_clear());
                black_box(report)
            })
        });
    }
    group.finish();
}

fn bench_exhaustive_composition(c: &mut Criterion) {
    let mut group = c.benchmark_group("composition_exhaustive");
    group.sample_size(10);
    for (label, exec) in [("parallel", Exec::Auto), ("sequential", Exec::Sequential)] {
        group.bench_function(label, |b| {
            b.iter(|| {
                let report = composition_exhaustive_sweep(11, 20, 4, exec);
                assert!(report.violations.is_empty());
                black_box(report)
            })
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_cross_check,
    bench_two_expansive_audit,
    bench_exhaustive_composition
);
criterion_main!(benches);
