use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use bathsim::device::{default_bell_scenario, default_bell_single_channel_scenario};
use bathsim::parallel::Execution;
use bathsim::scenarios::spectroscopy::{run_spectroscopy, SpectroscopySettings};
use bathsim::scenarios::sweep::{run_sweep, SweepAxis};

fn modes() -> [(&'static str, Execution); 2] {
    [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)]
}

fn spectroscopy(c: &mut Criterion) {
    let cfg = default_bell_scenario();
    let freqs: Vec<f64> = (0..24).map(|i| 4190.0 + i as f64 * 1.0).collect();
    let settings = SpectroscopySettings { duration_us: 2.0, samples: 50, ..Default::default() };
    let mut group = c.benchmark_group("spectroscopy_24");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_spectroscopy(black_box(&cfg), &freqs, &settings, exec).unwrap())
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let cfg = default_bell_single_channel_scenario();
    let values = [0.2, 0.4, 0.6, 0.8];
    let mut group = c.benchmark_group("sweep_nbar_4");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_sweep(black_box(&cfg), SweepAxis::NBar, &values, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, spectroscopy, sweep);
criterion_main!(benches);
