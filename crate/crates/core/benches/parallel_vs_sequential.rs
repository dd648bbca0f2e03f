use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use npcfid::analysis::{gen_random_circuit, random_layouts, route, synthetic_calibration};
use npcfid::circuit::CompiledCircuit;
use npcfid::npc::{self, EvalOptions};
use npcfid::oracle::{haar_average, simulate_noisy, trace_inner, OracleConfig};
use npcfid::parallel::{self, ExecMode};

const MODES: [(&str, ExecMode); 2] = [
    ("sequential", ExecMode::Sequential),
    ("parallel", ExecMode::Parallel),
];

fn routed_batch(count: usize, qubits: usize, depth: usize) -> Vec<CompiledCircuit> {
    let cal = synthetic_calibration(0);
    (0..count as u64)
        .map(|s| {
            let logical = gen_random_circuit(qubits, depth, s).unwrap();
            route(&logical, &cal, &random_layouts(qubits, 8, 1, s)[0]).unwrap()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Proxy evaluation over a batch of circuits
// ---------------------------------------------------------------------------

fn proxy_batch(c: &mut Criterion) {
    let cal = synthetic_calibration(0);
    let options = EvalOptions::default();
    let batch = routed_batch(256, 8, 40);
    let mut group = c.benchmark_group("proxy_batch_256");
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                parallel::map(mode, &batch, |circ| {
                    npc::evaluate(circ, &cal, &options).unwrap().circuit
                })
            })
        });
    }
    group.finish();
}

// ---------------------------------------------------------------------------
// Oracle simulation over a batch of circuits
// ---------------------------------------------------------------------------

fn oracle_batch(c: &mut Criterion) {
    let cal = synthetic_calibration(0);
    let cfg = OracleConfig::default();
    let batch = routed_batch(16, 5, 6);
    let mut group = c.benchmark_group("oracle_batch_16");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                parallel::map(mode, &batch, |circ| {
                    simulate_noisy(circ, &cal, &cfg).unwrap().state.purity()
                })
            })
        });
    }
    group.finish();
}

// ---------------------------------------------------------------------------
// Haar-averaged channel fidelity
// ---------------------------------------------------------------------------

fn haar(c: &mut Criterion) {
    let mut group = c.benchmark_group("haar_average_20k");
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                haar_average(1, black_box(20_000), 7, mode, |rho| {
                    let out = rho.apply_thermal(0, 2e-5, 1e-4, 8e-5).unwrap();
                    trace_inner(rho, &out).unwrap()
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, proxy_batch, oracle_batch, haar);
criterion_main!(benches);
