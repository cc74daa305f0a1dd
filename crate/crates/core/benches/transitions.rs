use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use metachain::sde::{run_batch, SimParams};
use metachain::{ChainConfig, CouplingParams, Execution};

fn bench_transitions(c: &mut Criterion) {
    let mut group = c.benchmark_group("transitions");
    group.sample_size(10);
    let coupling = CouplingParams::from_gamma_tilde(4, 1.2).unwrap();
    let p = SimParams::with_defaults(coupling, 0.8, 0).unwrap();
    let (start, target) = (ChainConfig::i_minus(4), ChainConfig::i_plus(4));
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), "N=4 σ=0.8 x32"), &exec, |b, &e| {
            b.iter(|| run_batch(&start, &target, &p, 32, 7, None, e).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_transitions);
criterion_main!(benches);
