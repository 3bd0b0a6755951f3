//! Sequential vs rayon scheduling for the likelihood and the sampler.
//! Without the `parallel` feature both variants run sequentially.

use std::hint::black_box;

use composite_severity::composite::TailShape;
use composite_severity::parallel::Execution;
use composite_severity::regression::{neg_log_likelihood_with, ModelParams};
use composite_severity::simulation::{
    mtpl_portfolio, sample_responses, sample_with, SimulationPlan,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn plan(n: usize) -> SimulationPlan {
    SimulationPlan {
        params: ModelParams {
            sigma: 0.9,
            shape: TailShape::Burr {
                alpha: 2.5,
                delta: 0.8,
            },
            gamma: vec![-1.0, -0.3, -0.5, -0.6, 0.2, 0.4, 0.01, -0.02],
        },
        covariates: mtpl_portfolio(),
        n,
        seed: 1,
    }
}

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn likelihood(c: &mut Criterion) {
    let mut group = c.benchmark_group("neg_log_likelihood");
    for n in [7_263, 100_000] {
        let plan = plan(n);
        let (data, design) = sample_with(&plan, Execution::Parallel).unwrap();
        group.throughput(Throughput::Elements(n as u64));
        for (name, execution) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| {
                    neg_log_likelihood_with(
                        black_box(&plan.params),
                        data.responses(),
                        &design,
                        execution,
                    )
                    .unwrap()
                })
            });
        }
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_responses");
    let n = 100_000;
    let plan = plan(n);
    let (_, design) = sample_with(&plan, Execution::Parallel).unwrap();
    group.throughput(Throughput::Elements(n as u64));
    for (name, execution) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| sample_responses(&plan.params, &design, black_box(7), execution).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, likelihood, sampling);
criterion_main!(benches);
