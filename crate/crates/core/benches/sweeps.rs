use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ultrastab::exec::Execution;
use ultrastab::harness::{verify, verify_chain, HarnessConfig, Setup};
use ultrastab::reynolds::RepTag;

fn setup(rep: RepTag) -> Setup {
    Setup::new(&HarnessConfig {
        p: 3,
        rep,
        samples: 200,
        ..HarnessConfig::default()
    })
    .expect("setup")
}

fn bound_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("bound_sweep");
    group.sample_size(10);
    for rep in [RepTag::Standard, RepTag::Adjoint] {
        let s = setup(rep);
        for exec in [Execution::Sequential, Execution::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), rep), &exec, |b, &exec| {
                b.iter(|| black_box(verify(&s, exec).expect("verify")))
            });
        }
    }
    group.finish();
}

fn chain_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("chain_sweep");
    group.sample_size(10);
    let s = setup(RepTag::Adjoint);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_function(format!("{exec:?}"), |b| {
            b.iter(|| black_box(verify_chain(&s, 20, exec).expect("chain")))
        });
    }
    group.finish();
}

criterion_group!(benches, bound_sweep, chain_sweep);
criterion_main!(benches);
