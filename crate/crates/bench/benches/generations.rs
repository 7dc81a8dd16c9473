use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion, Throughput};
use deepgrid_bench::{variants, warmed_state};
use deepgrid_core::metrics::measure;
use deepgrid_core::{
    run_generation, AlgorithmSpec, CorrectCounting, NoiseSpec, PlanarArm, PolarGeometry, Problem, Rastrigin,
    StreamRng, Task,
};
use rand::{Rng, SeedableRng};

fn generation(c: &mut Criterion) {
    let rastrigin = Rastrigin::new();
    let arm = PlanarArm::new();
    let tasks: [(&str, &dyn Task); 2] = [("rastrigin", &rastrigin), ("arm", &arm)];
    let mut group = c.benchmark_group("generation");
    group.throughput(Throughput::Elements(AlgorithmSpec::DEFAULT_BATCH_SIZE as u64));
    for (name, task) in tasks {
        let problem = Problem::new(task, NoiseSpec::default());
        for variant in variants() {
            let spec = AlgorithmSpec::new(variant);
            let warm = warmed_state(&problem, &spec, 500);
            group.bench_function(BenchmarkId::new(name, variant), |b| {
                b.iter_batched(
                    || warm.clone(),
                    |mut state| run_generation(&mut state, &problem, &spec),
                    BatchSize::LargeInput,
                )
            });
        }
    }
    group.finish();
}

fn locate(c: &mut Criterion) {
    let polar = deepgrid_core::GridGeometry::Polar(PolarGeometry::equal_area(1.0, PolarGeometry::DEFAULT_RINGS).unwrap());
    let cartesian = Rastrigin::new().default_geometry();
    let mut rng = StreamRng::seed_from_u64(0);
    let points: Vec<[f64; 2]> = (0..1024).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
    let mut group = c.benchmark_group("locate");
    group.throughput(Throughput::Elements(points.len() as u64));
    for (name, geometry) in [("cartesian", &cartesian), ("polar", &polar)] {
        group.bench_function(name, |b| {
            b.iter(|| points.iter().map(|p| geometry.locate(black_box(p)).0).sum::<usize>())
        });
    }
    group.finish();
}

fn metrics(c: &mut Criterion) {
    let task = Rastrigin::new();
    let problem = Problem::new(&task, NoiseSpec::default());
    let mut group = c.benchmark_group("corrected_container");
    group.sample_size(10);
    for variant in variants() {
        let spec = AlgorithmSpec::new(variant);
        let state = warmed_state(&problem, &spec, 500);
        group.bench_function(BenchmarkId::from_parameter(variant), |b| {
            let mut rng = StreamRng::seed_from_u64(1);
            b.iter(|| measure(state.grid(), &spec.selector, &problem, 50, CorrectCounting::default(), 0, &mut rng).0)
        });
    }
    group.finish();
}

criterion_group!(benches, generation, locate, metrics);
criterion_main!(benches);
