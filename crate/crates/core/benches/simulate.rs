use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mzi_core::config::RunConfig;
use mzi_core::detector::qcd_difference;
use mzi_core::dynamics::TimeSeriesConfig;
use mzi_core::interferometer::{compose_field, MirrorDeflections};
use mzi_core::Execution;

fn policies() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn simulate_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate_run");
    group.sample_size(10);
    for preset in ["constructive", "destructive"] {
        let mut cfg = RunConfig::preset(preset).unwrap();
        cfg.time_series = TimeSeriesConfig { n_samples: 1024, record_length: 1.0 };
        for (name, exec) in policies() {
            group.bench_with_input(BenchmarkId::new(name, preset), &cfg, |b, cfg| b.iter(|| cfg.simulate(exec).unwrap()));
        }
    }
    group.finish();
}

fn rect_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate_run_rectangular");
    group.sample_size(10);
    let mut cfg = RunConfig::preset("destructive").unwrap();
    cfg.profile = mzi_core::BeamProfile::rectangular(1.0, 1.0).unwrap();
    cfg.time_series = TimeSeriesConfig { n_samples: 1024, record_length: 1.0 };
    for (name, exec) in policies() {
        group.bench_function(name, |b| b.iter(|| cfg.simulate(exec).unwrap()));
    }
    group.finish();
}

fn single_sample(c: &mut Criterion) {
    let cfg = RunConfig::preset("destructive").unwrap();
    let d = MirrorDeflections { c: 1e-3, e: -5e-4, a: 7e-4, b: 2e-4, f: -1e-3 };
    c.bench_function("compose_and_detect", |b| {
        b.iter(|| qcd_difference(&compose_field(&cfg.profile, &cfg.grid, &d, &cfg.scenario).unwrap()))
    });
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("amplitude_sweep");
    group.sample_size(10);
    let mut cfg = RunConfig::preset("constructive").unwrap();
    cfg.time_series = TimeSeriesConfig { n_samples: 256, record_length: 1.0 };
    let values = [0.5, 1.0, 2.0, 4.0];
    for (name, exec) in policies() {
        group.bench_function(name, |b| {
            b.iter(|| mzi_core::config::sweep(&cfg, mzi_core::config::SweepParameter::AmplitudeScale, &values, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, simulate_run, rect_run, single_sample, sweep);
criterion_main!(benches);
