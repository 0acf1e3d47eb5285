//! Sequential and rayon execution of the batch entry points.
//!
//! Without the `parallel` feature both variants run on one thread.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qrf_core::catalysis::{pairwise_fixture, run_suite};
use qrf_core::par::Exec;
use qrf_core::refframe::{degradation_sweep, FrameConfig};
use qrf_core::words::{wiegmann_equivalent, UnitarySearchConfig, WiegmannConfig};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn catalysis_suite(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_suite_24");
    let cfg = UnitarySearchConfig::default();
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| run_suite(black_box(24), 0, &cfg, e))
        });
    }
    g.finish();
}

fn word_search(c: &mut Criterion) {
    let mut g = c.benchmark_group("wiegmann_equivalent_pair");
    let f = pairwise_fixture();
    let (a, b) = ([f.a[0].clone(), f.a[2].clone()], [f.b[0].clone(), f.b[2].clone()]);
    // an equivalent pair forces the full enumeration
    let cfg = WiegmannConfig { num_random_words: 200, ..WiegmannConfig::default() };
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |bench, &e| {
            bench.iter(|| wiegmann_equivalent(black_box(&a), black_box(&b), &cfg, e).unwrap())
        });
    }
    g.finish();
}

fn frame_sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("degradation_sweep_2_4_8");
    g.sample_size(10);
    let cfg = FrameConfig { pure_samples: 16, mixed_samples: 8, seed: 0 };
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| {
            b.iter(|| degradation_sweep(black_box(&[2, 4, 8]), std::f64::consts::FRAC_PI_2, &cfg, e).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, catalysis_suite, word_search, frame_sweep);
criterion_main!(benches);
