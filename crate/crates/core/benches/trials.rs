use criterion::{criterion_group, criterion_main, Criterion};

use layercast::harness::{run_trials, run_trials_sequential, Scheme, Topology, TrialConfig};
use layercast::{Criterion as PushCriterion, FieldSpec, GenParams, Schedule};

fn config(trials: usize) -> TrialConfig {
    TrialConfig {
        topology: Topology::Generated(GenParams::new(25, 5, 2)),
        scheme: Scheme::Pushback,
        criterion: PushCriterion::MinCut,
        schedule: Schedule::Sequential,
        field: FieldSpec::Binary(10),
        trials,
        base_seed: 2024,
    }
}

fn bench_trials(c: &mut Criterion) {
    let cfg = config(200);
    let mut group = c.benchmark_group("pushback_trials_200");
    group.bench_function("parallel", |b| b.iter(|| run_trials(&cfg).unwrap()));
    group.bench_function("sequential", |b| {
        b.iter(|| run_trials_sequential(&cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_trials);
criterion_main!(benches);
