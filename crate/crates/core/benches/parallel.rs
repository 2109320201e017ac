//! Sequential against rayon execution for the two embarrassingly parallel
//! workloads: density reconstruction over many sample times, and a small
//! parameter scan.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use elapsed_neurons::analysis::{scan_parameter, ClassifyParams, ScanParam, ScanSettings};
use elapsed_neurons::analytic::{build_class_flat, verify};
use elapsed_neurons::{Execution, InitialDensity, ModelConfig, ThresholdSpec};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn reconstruction(c: &mut Criterion) {
    let profile = build_class_flat(3.0, 0.75).unwrap().profile;
    let spec = ThresholdSpec::paper(3.0).unwrap();
    let mut group = c.benchmark_group("verify_64_samples");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| verify(&profile, &spec, 64, exec))
        });
    }
    group.finish();
}

fn scan(c: &mut Criterion) {
    let base = ModelConfig::new(
        ThresholdSpec::paper(1.0).unwrap(),
        InitialDensity::UnitBlock,
    )
    .with_ds(2e-3)
    .with_t_max(30.0);
    let values = [0.05, 0.5, 1.0, 2.0];
    let mut group = c.benchmark_group("scan_4_runs");
    group.sample_size(10);
    for (name, exec) in MODES {
        let mut settings = ScanSettings::new(ClassifyParams::new(10.0, 1e-3));
        settings.exec = exec;
        settings.width = f64::INFINITY;
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| scan_parameter(&base, ScanParam::Connectivity, &values, &settings).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, reconstruction, scan);
criterion_main!(benches);
