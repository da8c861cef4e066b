use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mesojj::bvp::SolverOptions;
use mesojj::model::{build_grid, Geometry};
use mesojj::par::Execution;
use mesojj::sweep::{run_sweep, separation_values, SweepOptions};

fn cold_sweep(c: &mut Criterion) {
    let grid = build_grid(100.0, 0.25).unwrap();
    let template = Geometry::semi_infinite(0.0).unwrap();
    let l = separation_values(0.0, 40.0, 21).unwrap();
    let opts = SolverOptions::default();
    let threads = std::thread::available_parallelism().map_or(2, |n| n.get().max(2));

    let mut group = c.benchmark_group("cold_sweep_21");
    group.sample_size(10);
    for (label, execution) in [
        ("serial", Execution::Sequential),
        ("parallel", Execution::from_threads(threads)),
    ] {
        let sweep = SweepOptions {
            warm_start: false,
            execution,
        };
        group.bench_with_input(BenchmarkId::from_parameter(label), &sweep, |b, sweep| {
            b.iter(|| run_sweep(&l, &template, &grid, &opts, sweep).unwrap())
        });
    }
    group.bench_function("warm_serial", |b| {
        b.iter(|| run_sweep(&l, &template, &grid, &opts, &SweepOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, cold_sweep);
criterion_main!(benches);
