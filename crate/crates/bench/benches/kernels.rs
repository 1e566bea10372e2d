use std::hint::black_box;

use blowuplab_bench::{damping_catalog, exhibit, scan_radii};
use blowuplab_core::functional::scan_condition;
use blowuplab_core::simulator::run;
use blowuplab_core::{AuxOptions, AuxTable, ProblemSpec, ScanOptions};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn aux_table(c: &mut Criterion) {
    let mut group = c.benchmark_group("aux_table");
    for (name, model) in damping_catalog() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &model, |b, &m| {
            b.iter(|| AuxTable::build(m, black_box(1e4), AuxOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn scan(c: &mut Criterion) {
    let radii = scan_radii();
    let mut group = c.benchmark_group("scan");
    for p in [2.0, 3.0, 4.0] {
        let spec = ProblemSpec::unit(1, p);
        group.bench_with_input(BenchmarkId::from_parameter(p), &spec, |b, s| {
            b.iter(|| scan_condition(s, black_box(&radii), &ScanOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn simulator(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    let spec = exhibit(2.0, 50.0);
    group.bench_function("blowup_p2", |b| b.iter(|| run(black_box(&spec)).unwrap()));
    let mut linear = exhibit(2.0, 20.0);
    linear.nonlinear = false;
    group.bench_function("linear_t20", |b| b.iter(|| run(black_box(&linear)).unwrap()));
    group.finish();
}

criterion_group!(benches, aux_table, scan, simulator);
criterion_main!(benches);
