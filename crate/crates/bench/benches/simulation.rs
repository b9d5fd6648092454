use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use evadesim::experiments::{exp_tau_sweep, parse_tau_grid, SweepSpec, Topology};
use evadesim::network::{DecisionRule, NetworkConfig, NetworkSim};
use evadesim::stochastic::{bernoulli_stream, Purpose, StreamKey};
use evadesim::taxpayer::run_single;
use evadesim::{Graph, TaxpayerParams};

fn params() -> TaxpayerParams {
    TaxpayerParams::new(0.3, 0.4, 0.01, 1.5, 1.0).unwrap()
}

fn single(c: &mut Criterion) {
    let p = TaxpayerParams::reference(0.3);
    c.bench_function("single_run_2000", |b| {
        b.iter(|| {
            let audits = bernoulli_stream(StreamKey::new(1, 0, 0, Purpose::Audit), p.p).unwrap();
            black_box(run_single(&p, 2000, audits).unwrap())
        })
    });
}

fn network_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("torus_step");
    for side in [10usize, 50, 100] {
        let g = Graph::torus(side, side).unwrap();
        for (name, rule) in [
            ("sign", DecisionRule::Deterministic),
            ("beta", DecisionRule::Probabilistic { beta: 10.0 }),
        ] {
            let cfg = NetworkConfig::homogeneous(params().with_tau(0.45)).with_rule(rule);
            let mut sim = NetworkSim::new(cfg, &g, 1, 0).unwrap();
            group.bench_with_input(BenchmarkId::new(name, side * side), &side, |b, _| {
                b.iter(|| black_box(sim.step().len()))
            });
        }
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let spec = SweepSpec {
        tau_grid: parse_tau_grid("0.02:0.48:0.02").unwrap(),
        topology: Topology::Star(10),
        replicates: 1,
        horizon: 1000,
        base: NetworkConfig::homogeneous(params()),
    };
    c.bench_function("star_sweep", |b| {
        b.iter(|| black_box(exp_tau_sweep(&spec, 1).unwrap()))
    });
}

criterion_group!(benches, single, network_step, sweep);
criterion_main!(benches);
