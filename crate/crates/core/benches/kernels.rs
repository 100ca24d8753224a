//! Hot kernels on a single-thread pool against the default pool. Build with
//! `--no-default-features` to time the sequential fallback instead.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ilscond::cond::{kappa_mixed, CondParams};
use ilscond::experiments::{gen_example2, gen_example3, run_experiment, ExperimentConfig};
use ilscond::structured::kappa_2ils_structured;

fn variants() -> Vec<(&'static str, Option<usize>)> {
    if ilscond::par::is_parallel() {
        vec![("one_thread", Some(1)), ("all_threads", None)]
    } else {
        vec![("sequential", None)]
    }
}

fn with_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(t) = threads {
        return rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap().install(f);
    }
    let _ = threads;
    f()
}

fn bench_kernels(c: &mut Criterion) {
    let mixed = gen_example2(200, 60, 120, 1e6, 1.0, 1).unwrap().problem;
    let (toep, sp) = gen_example3(60, 1.0, 2).unwrap();
    let mut table = ExperimentConfig::table3(false);
    table.trials = 20;
    table.rho_grid = vec![1.0];

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for (name, threads) in variants() {
        group.bench_function(BenchmarkId::new("mixed_numerator_200x60", name), |b| {
            b.iter(|| with_pool(threads, || kappa_mixed(black_box(&mixed), &CondParams::default()).unwrap()))
        });
        group.bench_function(BenchmarkId::new("structured_projection_n60", name), |b| {
            b.iter(|| with_pool(threads, || kappa_2ils_structured(black_box(&toep.problem), &CondParams::default(), &sp).unwrap()))
        });
        group.bench_function(BenchmarkId::new("table3_20_trials", name), |b| {
            b.iter(|| with_pool(threads, || run_experiment(black_box(&table)).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_kernels);
criterion_main!(benches);
