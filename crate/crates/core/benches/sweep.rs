use aebsim::evaluation::sweep;
use aebsim::parallel::Parallelism;
use aebsim::scenario::sweep::DEFAULT_RUN_CAP;
use aebsim::scenario::{ParameterRange, SweepPlan, SweepStrategy};
use aebsim::{ScenarioSpec, SimConfig};
use criterion::{criterion_group, criterion_main, Criterion};

fn plan() -> SweepPlan {
    SweepPlan {
        base: ScenarioSpec::ccrs("bench", 50.0 / 3.6),
        ranges: vec![ParameterRange::samples("target.lateral_offset", -0.5, 0.5, 64)],
        strategy: SweepStrategy::MonteCarlo,
        seed: 1,
    }
}

fn bench(c: &mut Criterion) {
    let plan = plan();
    let cfg = SimConfig::default();
    let mut group = c.benchmark_group("monte_carlo_64");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| sweep(&plan, &cfg, Parallelism::Sequential, DEFAULT_RUN_CAP).unwrap())
    });
    // falls back to sequential when built without the `parallel` feature
    group.bench_function("parallel", |b| b.iter(|| sweep(&plan, &cfg, Parallelism::Auto, DEFAULT_RUN_CAP).unwrap()));
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
