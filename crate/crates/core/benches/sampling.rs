use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use resolvent_order::certify::{certify_sampled, resolvent_leq, Property};
use resolvent_order::linops::{OperatorExpr, Vector};
use resolvent_order::prox_catalog::ConvexAtom;
use resolvent_order::resolvent_calculus::random_psd;
use resolvent_order::sampling::{Execution, SamplerConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn cfg(execution: Execution, n_pairs: usize) -> SamplerConfig {
    SamplerConfig {
        execution,
        n_pairs,
        ..SamplerConfig::default()
    }
}

fn sampled_fne(c: &mut Criterion) {
    let mut group = c.benchmark_group("sampled_fne_soc16");
    let op = OperatorExpr::prox(ConvexAtom::indicator_soc(16).unwrap());
    for pairs in [1_000, 20_000] {
        for (name, execution) in MODES {
            group.bench_with_input(BenchmarkId::new(name, pairs), &pairs, |b, &pairs| {
                b.iter(|| certify_sampled(Property::FirmlyNonexpansive, &op, &cfg(execution, pairs)))
            });
        }
    }
    group.finish();
}

fn ball_chain_order(c: &mut Criterion) {
    let mut group = c.benchmark_group("ball_chain_order");
    let ball = ConvexAtom::indicator_ball(Vector::zeros(2), 1.0).unwrap();
    let t = OperatorExpr::prox(ball).complement();
    let (t4, t5) = (t.power(4), t.power(5));
    for (name, execution) in MODES {
        group.bench_function(name, |b| b.iter(|| resolvent_leq(&t5, &t4, &cfg(execution, 10_000)).unwrap()));
    }
    group.finish();
}

fn resolvent_composite(c: &mut Criterion) {
    let mut group = c.benchmark_group("resolvent_plus_prox_dim32");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let j = OperatorExpr::resolvent_of(random_psd(&mut rng, 32, 32)).unwrap();
    let p = OperatorExpr::prox(ConvexAtom::l1_norm(32, 0.5).unwrap());
    let op = OperatorExpr::scale(0.5, OperatorExpr::sum(vec![j, p]).unwrap()).unwrap();
    for (name, execution) in MODES {
        group.bench_function(name, |b| b.iter(|| certify_sampled(Property::FirmlyNonexpansive, &op, &cfg(execution, 5_000))));
    }
    group.finish();
}

criterion_group!(benches, sampled_fne, ball_chain_order, resolvent_composite);
criterion_main!(benches);
