//! Acceptance suite. Runs every criterion at its stated tolerance, prints
//! one PASS/FAIL line per criterion and exits non-zero if any fails.
//!
//! Runs without the libtest harness so the summary lines are always shown
//! and the timing criteria do not compete with parallel unit tests.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use npcfid::analysis::experiments::{
    accuracy_stats, bv_accuracy, check_sweep, fig5_all, random_accuracy, ranking_experiment,
    ExperimentConfig,
};
use npcfid::analysis::{
    gen_bv_circuit, gen_random_circuit, linear_fit, random_layouts, rank_layouts, route,
    spearman_rho, synthetic_calibration, Reference,
};
use npcfid::calibration::{depolarizing_param, load_calibration};
use npcfid::circuit::{
    depth, gate_count, parse_json_ir, parse_qasm, serialize_json_ir, CompiledCircuit, GateOp,
};
use npcfid::metrics::{esp, score_all, MetricId, OracleResults};
use npcfid::npc::{
    self, qubit_proxy_fidelity, step_depolarizing, step_thermal, EvalOptions, EventSource,
    NoiseChannel, NoiseEvent, QubitTrajectory,
};
use npcfid::oracle::{
    negativity, random_density_matrix, random_pure_state, sample_rng, simulate_ideal,
    simulate_noisy, trace_inner, DensityMatrix, OracleConfig,
};
use npcfid::parallel::{self, ExecMode};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------------------
// 1. Closed form against stepping
// ---------------------------------------------------------------------------

/// Independent closed form: `(1/2 + 1/2·Π λ_i)·Π(1 − e)`.
fn closed_form(events: &[NoiseChannel]) -> f64 {
    let mut lambda = 1.0;
    let mut readout = 1.0;
    for ev in events {
        match *ev {
            NoiseChannel::Depolarizing { p } => lambda *= 1.0 - p,
            NoiseChannel::Thermal { t, t1, t2 } => {
                lambda *= 2.0 / 3.0 * (-t / t2).exp() + 1.0 / 3.0 * (-t / t1).exp()
            }
            NoiseChannel::Readout { e } => readout *= 1.0 - e,
            NoiseChannel::SwapMerge { .. } => unreachable!(),
        }
    }
    (0.5 + 0.5 * lambda) * readout
}

fn random_trajectory(rng: &mut ChaCha8Rng) -> QubitTrajectory {
    let t1 = rng.random_range(10e-6..=300e-6);
    let t2 = rng.random_range(10e-6..=300e-6);
    let len = rng.random_range(1..=100);
    let mut traj = QubitTrajectory::new(0);
    for k in 0..len {
        let last = k + 1 == len;
        let channel = if last && rng.random_bool(0.5) {
            NoiseChannel::Readout {
                e: rng.random_range(0.0..=0.1),
            }
        } else if rng.random_bool(0.5) {
            NoiseChannel::Depolarizing {
                p: rng.random_range(0.0..=0.1),
            }
        } else {
            NoiseChannel::Thermal {
                t: rng.random_range(0.0..=t2),
                t1,
                t2,
            }
        };
        let source = match channel {
            NoiseChannel::Readout { .. } => EventSource::Measure,
            _ => EventSource::Op(k),
        };
        traj.events.push(NoiseEvent { channel, source });
        traj.residences.push(0);
    }
    traj
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let trajs: Vec<QubitTrajectory> = (0..10_000).map(|_| random_trajectory(&mut rng)).collect();
    let start = Instant::now();
    let stepped: Vec<f64> = trajs
        .iter()
        .map(|t| qubit_proxy_fidelity(t).expect("valid trajectory").0)
        .collect();
    let elapsed = start.elapsed();
    let max_err = trajs
        .iter()
        .zip(&stepped)
        .map(|(t, &f)| {
            let channels: Vec<NoiseChannel> = t.events.iter().map(|e| e.channel.clone()).collect();
            (f - closed_form(&channels)).abs()
        })
        .fold(0.0f64, f64::max);
    outcome(
        max_err <= 1e-12 && elapsed < Duration::from_secs(1),
        format!("10^4 trajectories, max |step - closed form| = {max_err:.2e}, stepping took {elapsed:.2?}"),
    )
}

// ---------------------------------------------------------------------------
// 2. Depolarizing exactness on pure states
// ---------------------------------------------------------------------------

fn criterion_2() -> Outcome {
    let ps: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();
    let errs = parallel::map_range(ExecMode::Parallel, 1000, |i| {
        let mut rng = sample_rng(2, i as u64);
        let rho = DensityMatrix::from_pure(&random_pure_state(1, &mut rng)).unwrap();
        ps.iter()
            .map(|&p| {
                let out = rho.apply_depolarizing(&[0], p).unwrap();
                (trace_inner(&rho, &out).unwrap() - step_depolarizing(1.0, p).unwrap()).abs()
            })
            .fold(0.0f64, f64::max)
    });
    let max_err = errs.into_iter().fold(0.0f64, f64::max);
    outcome(
        max_err <= 1e-12,
        format!("10^3 Haar states x 21 p values, max error {max_err:.2e}"),
    )
}

// ---------------------------------------------------------------------------
// 3. Thermal isotropic average
// ---------------------------------------------------------------------------

fn criterion_3() -> Outcome {
    // (t, T1, T2) in seconds; the first point has the value 0.5 + 0.5/e
    let grid = [
        (100e-6, 100e-6, 100e-6),
        (10e-6, 100e-6, 80e-6),
        (50e-6, 60e-6, 120e-6),
        (200e-6, 300e-6, 50e-6),
        (1e-6, 20e-6, 40e-6),
    ];
    let n = 100_000;
    let mut worst_z = 0.0f64;
    let mut ok = true;
    for (g, &(t, t1, t2)) in grid.iter().enumerate() {
        let values = parallel::map_range(ExecMode::Parallel, n, |i| {
            let mut rng = sample_rng(300 + g as u64, i as u64);
            let rho = DensityMatrix::from_pure(&random_pure_state(1, &mut rng)).unwrap();
            trace_inner(&rho, &rho.apply_thermal(0, t, t1, t2).unwrap()).unwrap()
        });
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        let expected = step_thermal(1.0, t, t1, t2).unwrap();
        let z = (mean - expected).abs() / se;
        worst_z = worst_z.max(z);
        ok &= z <= 3.0;
        if g == 0 {
            ok &= (expected - (0.5 + 0.5 * (-1.0f64).exp())).abs() < 1e-15;
        }
    }
    outcome(
        ok,
        format!("10^5 samples at 5 grid points, worst deviation {worst_z:.2} standard errors"),
    )
}

// ---------------------------------------------------------------------------
// 4. Two-qubit depolarizing reduces to single-qubit depolarizing
// ---------------------------------------------------------------------------

fn criterion_4() -> Outcome {
    let errs = parallel::map_range(ExecMode::Parallel, 1000, |i| {
        let mut rng = sample_rng(4, i as u64);
        let rho = random_density_matrix(2, &mut rng);
        let mut worst = 0.0f64;
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            let joint = rho.apply_depolarizing(&[0, 1], p).unwrap();
            for keep in [0usize, 1] {
                let lhs = joint.partial_trace(&[keep]).unwrap();
                let rhs = rho
                    .partial_trace(&[keep])
                    .unwrap()
                    .apply_depolarizing(&[0], p)
                    .unwrap();
                for (a, b) in lhs.data().iter().zip(rhs.data()) {
                    worst = worst.max((a - b).norm());
                }
            }
        }
        worst
    });
    let max_err = errs.into_iter().fold(0.0f64, f64::max);
    outcome(
        max_err <= 1e-12,
        format!("10^3 mixed states x 11 p values, both marginals, max error {max_err:.2e}"),
    )
}

// ---------------------------------------------------------------------------
// 5. Negativity sweeps
// ---------------------------------------------------------------------------

fn criterion_5() -> Outcome {
    let sweeps = fig5_all(101).unwrap();
    let targets = [(FRAC_PI_8, 0.19), (FRAC_PI_4, 0.35), (FRAC_PI_2, 0.50)];
    let mut ok = true;
    let mut min_rho = f64::INFINITY;
    for (channel, rows) in &sweeps {
        ok &= rows.len() == 101;
        let check = check_sweep(channel.name(), rows);
        let target = targets
            .iter()
            .find(|(th, _)| (th - check.theta).abs() < 1e-12)
            .unwrap()
            .1;
        ok &= (check.initial_negativity - target).abs() <= 0.005;
        ok &= check.negativity_non_increasing && check.proxy_strictly_decreasing;
        let rho = check.rho_entangled.unwrap_or(f64::NEG_INFINITY);
        min_rho = min_rho.min(rho);
        ok &= rho >= 0.99;
    }
    let initial: Vec<String> = sweeps[..3]
        .iter()
        .map(|(_, rows)| format!("{:.4}", rows[0].negativity))
        .collect();
    outcome(
        ok,
        format!(
            "6 sweeps of 101 points, initial negativities {}, min Spearman on entangled region {min_rho:.4}",
            initial.join("/")
        ),
    )
}

// ---------------------------------------------------------------------------
// 6–8. Oracle-scored experiments
// ---------------------------------------------------------------------------

fn criterion_6(cfg: &ExperimentConfig) -> Outcome {
    let start = Instant::now();
    let rows = random_accuracy(cfg, &cfg.calibration()).unwrap();
    let elapsed = start.elapsed();
    let stats = accuracy_stats(&rows).unwrap();
    let r2 = stats.r2.unwrap_or(f64::NEG_INFINITY);
    outcome(
        rows.len() >= 60 && stats.aad <= 0.05 && r2 >= 0.90 && elapsed < Duration::from_secs(300),
        format!(
            "{} random circuits, AAD {:.4}, R^2 {:.4}, {elapsed:.1?}",
            rows.len(),
            stats.aad,
            r2
        ),
    )
}

fn criterion_7(cfg: &ExperimentConfig) -> Outcome {
    let rows = bv_accuracy(cfg, &cfg.calibration()).unwrap();
    let stats = accuracy_stats(&rows).unwrap();
    let sizes_ok = rows.iter().all(|r| (4..=8).contains(&r.qubits));
    outcome(
        rows.len() >= 30 && sizes_ok && stats.aad <= 0.07,
        format!("{} BV circuits, AAD {:.4}", rows.len(), stats.aad),
    )
}

fn criterion_8(cfg: &ExperimentConfig) -> Outcome {
    let summary = ranking_experiment(cfg, &cfg.calibration()).unwrap();
    let proxy = summary.mean_rho[&MetricId::ProxyFidelity];
    let esp_rho = summary.mean_rho[&MetricId::Esp];
    let depth_rho = summary.mean_rho[&MetricId::Depth];
    outcome(
        proxy >= esp_rho && proxy >= depth_rho && summary.wins >= 8,
        format!(
            "mean rho proxy {proxy:.3}, esp {esp_rho:.3}, depth {depth_rho:.3}; proxy wins or ties {}/{} repetitions",
            summary.wins,
            summary.repetitions.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// 9. Linear complexity
// ---------------------------------------------------------------------------

fn long_circuit(ops: usize, seed: u64) -> CompiledCircuit {
    let cal = synthetic_calibration(0);
    let pairs = cal.coupled_pairs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = CompiledCircuit::with_identity_layout(8);
    while c.ops.len() < ops {
        match rng.random_range(0..10) {
            0..=5 => {
                let name = ["x", "sx", "h", "rz"][rng.random_range(0..4)];
                let q = rng.random_range(0..8);
                let op = if name == "rz" {
                    GateOp::with_params(name, &[q], &[rng.random_range(0.0..6.28)])
                } else {
                    GateOp::new(name, &[q])
                };
                c.push(op);
            }
            6..=8 => {
                let (a, b) = pairs[rng.random_range(0..pairs.len())];
                c.push(GateOp::new("cz", &[a, b]));
            }
            _ => {
                let (a, b) = pairs[rng.random_range(0..pairs.len())];
                c.push_swap(a, b);
            }
        }
    }
    for l in 0..8 {
        c.measured.insert(l, l);
    }
    c
}

fn median_time(c: &CompiledCircuit, reps: usize) -> f64 {
    let cal = synthetic_calibration(0);
    let options = EvalOptions::default();
    let mut times: Vec<f64> = (0..reps)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(npc::evaluate(c, &cal, &options).unwrap());
            start.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times[reps / 2]
}

fn criterion_9() -> Outcome {
    let sizes = [100usize, 1_000, 10_000];
    let circuits: Vec<CompiledCircuit> = sizes.iter().map(|&n| long_circuit(n, 9)).collect();
    // warm-up
    for c in &circuits {
        median_time(c, 3);
    }
    let x: Vec<f64> = circuits.iter().map(|c| c.ops.len() as f64).collect();
    let y: Vec<f64> = circuits.iter().map(|c| median_time(c, 21)).collect();
    let (_, slope, r2) = linear_fit(&x, &y).unwrap();
    let t_max = y[2];
    outcome(
        r2 >= 0.98 && t_max < 0.1,
        format!(
            "median times {:.3}/{:.3}/{:.3} ms, slope {:.2} us/op, R^2 {r2:.4}",
            y[0] * 1e3,
            y[1] * 1e3,
            y[2] * 1e3,
            slope * 1e6
        ),
    )
}

// ---------------------------------------------------------------------------
// 10. Property suite and parser fuzzing
// ---------------------------------------------------------------------------

type Check = (&'static str, fn() -> bool);

fn prop_layout_bijective() -> bool {
    let cal = synthetic_calibration(10);
    (0..20).all(|s| {
        let logical = gen_random_circuit(5, 6, s).unwrap();
        let routed = route(&logical, &cal, &random_layouts(5, 8, 1, s)[0]).unwrap();
        routed.final_layout().unwrap().is_consistent()
    })
}

fn prop_depth_le_gate_count() -> bool {
    let single = {
        let mut c = CompiledCircuit::with_identity_layout(3);
        for _ in 0..7 {
            c.push(GateOp::new("x", &[1]));
        }
        depth(&c) == gate_count(&c)
    };
    single
        && (0..50).all(|s| {
            let c = gen_random_circuit(4, 1 + (s as usize % 9), s).unwrap();
            depth(&c) <= gate_count(&c)
        })
}

fn prop_depolarizing_param() -> bool {
    [2usize, 4].iter().all(|&d| {
        let top = (d - 1) as f64 / d as f64;
        let grid: Vec<f64> = (0..=100).map(|k| top * k as f64 / 100.0).collect();
        depolarizing_param(0.0, d).unwrap() == 0.0
            && depolarizing_param(top, d).unwrap() == 1.0
            && grid.windows(2).all(|w| {
                depolarizing_param(w[0], d).unwrap() <= depolarizing_param(w[1], d).unwrap()
            })
    })
}

fn prop_calibration_round_trip() -> bool {
    (0..20).all(|s| {
        let (first, _) = load_calibration(&synthetic_calibration(s).to_json()).unwrap();
        let (again, _) = load_calibration(&first.to_json()).unwrap();
        again == first
    })
}

fn prop_fixed_point_and_range() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    (0..1000).all(|_| {
        let p = rng.random_range(0.0..=1.0);
        let (t, t1, t2) = (
            rng.random_range(0.0..1e-3),
            rng.random_range(1e-6..1e-3),
            rng.random_range(1e-6..1e-3),
        );
        let f = rng.random_range(0.5..=1.0);
        let d = step_depolarizing(f, p).unwrap();
        let th = step_thermal(f, t, t1, t2).unwrap();
        step_depolarizing(0.5, p).unwrap() == 0.5
            && step_thermal(0.5, t, t1, t2).unwrap() == 0.5
            && (0.5..=1.0).contains(&d)
            && (0.5..=1.0).contains(&th)
    })
}

fn prop_contraction_ordering() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    (0..1000).all(|_| {
        let f = rng.random_range(0.5..=1.0);
        let (a, b) = (rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (t1, t2) = (rng.random_range(1e-6..1e-3), rng.random_range(1e-6..1e-3));
        step_depolarizing(f, lo).unwrap() >= step_depolarizing(f, hi).unwrap()
            && step_thermal(f, lo * 1e-4, t1, t2).unwrap()
                >= step_thermal(f, hi * 1e-4, t1, t2).unwrap()
    })
}

fn prop_event_permutation() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    (0..200).all(|_| {
        let traj = random_trajectory(&mut rng);
        let (f, _) = qubit_proxy_fidelity(&traj).unwrap();
        let mut shuffled = traj.clone();
        let body = if matches!(
            shuffled.events.last().map(|e| &e.channel),
            Some(NoiseChannel::Readout { .. })
        ) {
            shuffled.events.len() - 1
        } else {
            shuffled.events.len()
        };
        shuffled.events[..body].reverse();
        let (g, _) = qubit_proxy_fidelity(&shuffled).unwrap();
        (f - g).abs() <= 1e-12
    })
}

fn prop_channels_keep_states_valid() -> bool {
    (0..200).all(|i| {
        let mut rng = sample_rng(15, i);
        let rho = random_density_matrix(2, &mut rng);
        let p = rng.random_range(0.0..=1.0);
        let t = rng.random_range(0.0..2e-4);
        let a = rho.apply_depolarizing(&[0, 1], p).unwrap();
        let b = rho.apply_thermal(1, t, 1e-4, 1.5e-4).unwrap();
        a.is_valid(1e-9) && b.is_valid(1e-9)
    })
}

fn prop_bloch_maps() -> bool {
    (0..200).all(|i| {
        let mut rng = sample_rng(16, i);
        let rho = random_density_matrix(1, &mut rng);
        let r = rho.bloch_vector().unwrap();
        let (p, t, t1, t2) = (0.3, 2e-5, 1e-4, 7e-5);
        let d = rho
            .apply_depolarizing(&[0], p)
            .unwrap()
            .bloch_vector()
            .unwrap();
        let th = rho
            .apply_thermal(0, t, t1, t2)
            .unwrap()
            .bloch_vector()
            .unwrap();
        let (e1, e2) = ((-t / t1).exp(), (-t / t2).exp());
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
        close(d.x, (1.0 - p) * r.x)
            && close(d.y, (1.0 - p) * r.y)
            && close(d.z, (1.0 - p) * r.z)
            && close(th.x, e2 * r.x)
            && close(th.y, e2 * r.y)
            && close(th.z, e1 * r.z + 1.0 - e1)
    })
}

fn prop_negativity_symmetric() -> bool {
    (0..200).all(|i| {
        let mut rng = sample_rng(17, i);
        let rho = random_density_matrix(2, &mut rng);
        (negativity(&rho, &[0]).unwrap() - negativity(&rho, &[1]).unwrap()).abs() <= 1e-10
    })
}

fn prop_esp() -> bool {
    let cal = synthetic_calibration(18);
    (0..30).all(|s| {
        let logical = gen_random_circuit(4, 5, s).unwrap();
        let c = route(&logical, &cal, &random_layouts(4, 8, 1, s)[0]).unwrap();
        // shuffle the ordinary ops among their own slots; swap markers stay put
        let slots: Vec<usize> = (0..c.ops.len())
            .filter(|&i| c.ops[i].segment().is_none())
            .collect();
        let mut order = slots.clone();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(s));
        let mut permuted = c.clone();
        for (&to, &from) in slots.iter().zip(&order) {
            permuted.ops[to] = c.ops[from].clone();
        }
        let (a, b) = (esp(&c, &cal).unwrap(), esp(&permuted, &cal).unwrap());
        a <= 1.0 && (a - b).abs() <= 1e-12
    })
}

fn prop_fidelity_bounds_success() -> bool {
    let cal = synthetic_calibration(19);
    let cfg = OracleConfig::default();
    ["1011", "0110", "11111", "100"].iter().all(|secret| {
        let logical = gen_bv_circuit(secret).unwrap();
        let identity: Vec<usize> = (0..logical.num_logical).collect();
        let c = route(&logical, &cal, &identity).unwrap();
        let oracle = OracleResults::from_runs(
            &simulate_noisy(&c, &cal, &cfg).unwrap(),
            &simulate_ideal(&c, &cfg).unwrap(),
        )
        .unwrap();
        let scores = score_all(&c, &cal, Some(&oracle), &EvalOptions::default());
        let f = scores.get(MetricId::StateFidelity).unwrap().value;
        let s = scores.get(MetricId::SuccessProb).unwrap().value;
        f >= s - 1e-10
    })
}

fn prop_spearman() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    (0..200).all(|_| {
        let a: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cubed: Vec<f64> = a.iter().map(|v| v.powi(3) + 2.0).collect();
        let r = spearman_rho(&a, &b).unwrap();
        (r - spearman_rho(&b, &a).unwrap()).abs() <= 1e-12
            && (r - spearman_rho(&cubed, &b).unwrap()).abs() <= 1e-12
    })
}

fn prop_sweep_theta_independence() -> bool {
    let sweeps = fig5_all(101).unwrap();
    let dep: Vec<_> = sweeps
        .iter()
        .filter(|(c, _)| c.name() == "depolarizing")
        .collect();
    dep.windows(2).all(|w| {
        w[0].1
            .iter()
            .zip(&w[1].1)
            .all(|(a, b)| a.proxy_fidelity == b.proxy_fidelity)
    })
}

fn prop_ranking_deterministic() -> bool {
    let cal = synthetic_calibration(21);
    let logical = gen_random_circuit(4, 4, 21).unwrap();
    let impls: Vec<_> = random_layouts(4, 8, 6, 21)
        .iter()
        .map(|l| route(&logical, &cal, l).unwrap())
        .collect();
    let run = |mode| {
        rank_layouts(
            &impls,
            None,
            &cal,
            &Reference::Oracle(OracleConfig::default()),
            &EvalOptions::default(),
            mode,
        )
        .unwrap()
    };
    let a = run(ExecMode::Parallel);
    a == run(ExecMode::Sequential) && a == run(ExecMode::Parallel)
}

const QASM_SEEDS: [&str; 4] = [
    "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\ncreg c[2];\nh q[0];\ncx q[0],q[1];\nswap q[1],q[2];\nmeasure q[0] -> c[0];\nmeasure q[2] -> c[1];\n",
    "// @layout 2,0\nqreg q[3];\ncreg c[2];\nrz(-pi/2) q[2];\nsx q[0];\ncz q[2],q[0];\nbarrier q[0],q[2];\nmeasure q[2] -> c[0];\n",
    "qreg q[1]; rx(2*pi/3, 0.5e-1) q[0]; u3(0.1,0.2,0.3) q[0];",
    "OPENQASM 2.0;\nqreg q[2];\ncreg c[2];\nif(c==1) x q[0];\n",
];

const ALPHABET: &[u8] =
    b"qregcmasuxhzOPENQASM2.0;[](),->{}=+-*/ \n\t0123456789pi@layout\"'\\\x00\xff";

fn mutate(seed: &[u8], rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut bytes = seed.to_vec();
    for _ in 0..rng.random_range(1..=6) {
        if bytes.is_empty() {
            bytes.push(ALPHABET[rng.random_range(0..ALPHABET.len())]);
            continue;
        }
        let at = rng.random_range(0..bytes.len());
        match rng.random_range(0..5) {
            0 => {
                bytes.remove(at);
            }
            1 => bytes.insert(at, ALPHABET[rng.random_range(0..ALPHABET.len())]),
            2 => bytes[at] = rng.random(),
            3 => bytes.truncate(at),
            _ => {
                let end = (at + rng.random_range(1..20)).min(bytes.len());
                let chunk = bytes[at..end].to_vec();
                let to = rng.random_range(0..=bytes.len());
                bytes.splice(to..to, chunk);
            }
        }
    }
    bytes
}

fn fuzz_parsers() -> (usize, usize) {
    let cal = synthetic_calibration(22);
    let json_seeds: Vec<String> = (0..4)
        .map(|s| serialize_json_ir(&gen_random_circuit(3, 3, s).unwrap()))
        .collect();
    let cal_seed = cal.to_json();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut panics = 0;
    let total = 10_000;
    for i in 0..total {
        let input = match i % 4 {
            0 | 1 => mutate(
                QASM_SEEDS[rng.random_range(0..QASM_SEEDS.len())].as_bytes(),
                &mut rng,
            ),
            2 => mutate(
                json_seeds[rng.random_range(0..json_seeds.len())].as_bytes(),
                &mut rng,
            ),
            _ => {
                if rng.random_bool(0.5) {
                    mutate(cal_seed.as_bytes(), &mut rng)
                } else {
                    (0..rng.random_range(0..200))
                        .map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())])
                        .collect()
                }
            }
        };
        let text = String::from_utf8_lossy(&input).into_owned();
        let result = catch_unwind(AssertUnwindSafe(|| {
            let _ = parse_qasm(&text);
            let _ = parse_json_ir(&text);
            let _ = load_calibration(&text);
        }));
        if result.is_err() {
            panics += 1;
        }
    }
    (total, panics)
}

fn criterion_10() -> Outcome {
    let checks: [Check; 16] = [
        ("layout bijectivity after swaps", prop_layout_bijective),
        ("depth <= gate count", prop_depth_le_gate_count),
        ("depolarizing parameter conversion", prop_depolarizing_param),
        ("calibration round trip", prop_calibration_round_trip),
        ("fixed point and range", prop_fixed_point_and_range),
        ("contraction ordering", prop_contraction_ordering),
        ("event permutation", prop_event_permutation),
        (
            "channels keep states valid",
            prop_channels_keep_states_valid,
        ),
        ("exact Bloch maps", prop_bloch_maps),
        ("negativity partition symmetry", prop_negativity_symmetric),
        ("ESP order invariance and bound", prop_esp),
        (
            "fidelity bounds success probability",
            prop_fidelity_bounds_success,
        ),
        ("Spearman symmetry and monotone invariance", prop_spearman),
        (
            "sweep proxy column independent of theta",
            prop_sweep_theta_independence,
        ),
        ("ranking determinism", prop_ranking_deterministic),
        ("parsers accept their seed corpus", || {
            parse_qasm(QASM_SEEDS[0]).is_ok() && parse_qasm(QASM_SEEDS[3]).is_err()
        }),
    ];
    let failed: Vec<&str> = checks
        .iter()
        .filter(|(_, f)| !catch_unwind(*f).unwrap_or(false))
        .map(|(name, _)| *name)
        .collect();
    let (total, panics) = fuzz_parsers();
    let mut detail = format!(
        "{}/{} invariant checks hold, {total} fuzzed parser inputs, {panics} panics",
        checks.len() - failed.len(),
        checks.len()
    );
    if !failed.is_empty() {
        detail.push_str(&format!(" (failed: {})", failed.join(", ")));
    }
    outcome(failed.is_empty() && panics == 0, detail)
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

fn main() {
    // keep fuzzed panics from flooding the output; failures are counted
    let default_hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let cfg = ExperimentConfig::default();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("closed-form equivalence", Box::new(criterion_1)),
        ("depolarizing oracle exactness", Box::new(criterion_2)),
        ("thermal isotropic average", Box::new(criterion_3)),
        ("two-qubit depolarizing marginals", Box::new(criterion_4)),
        ("negativity sweeps", Box::new(criterion_5)),
        ("random-circuit accuracy", Box::new(|| criterion_6(&cfg))),
        ("BV accuracy", Box::new(|| criterion_7(&cfg))),
        ("ranking consistency", Box::new(|| criterion_8(&cfg))),
        ("linear complexity", Box::new(criterion_9)),
        ("property suite and parser fuzzing", Box::new(criterion_10)),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| outcome(false, "panicked"));
        if !result.pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {:<36} {}  {}",
            i + 1,
            name,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    std::panic::set_hook(default_hook);
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
