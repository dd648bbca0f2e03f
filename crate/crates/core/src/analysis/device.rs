//! A synthetic 8-qubit device, layout sampling and a greedy SWAP router.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calibration::{Calibration, GateCal, QubitCal};
use crate::circuit::{CompiledCircuit, GateOp, LayoutState};

use super::AnalysisError;

pub const DEVICE_QUBITS: usize = 8;

/// Ring `0-1-…-7-0` plus chords `0-4` and `2-6`.
pub fn device_edges() -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (0..DEVICE_QUBITS)
        .map(|q| (q, (q + 1) % DEVICE_QUBITS))
        .collect();
    edges.push((0, 4));
    edges.push((2, 6));
    edges
}

/// Calibration with superconducting-like spreads: T1 80–300 µs, T2 up to
/// `min(2·T1, 250 µs)`, readout 0.5–4 %, single-qubit error 2e-4–1e-3 at
/// 35 ns, two-qubit error 0.5–2 % at 300–660 ns. `rz` is virtual.
pub fn synthetic_calibration(seed: u64) -> Calibration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qubits: Vec<QubitCal> = (0..DEVICE_QUBITS)
        .map(|_| {
            let t1 = rng.random_range(80.0..300.0);
            let t2 = rng.random_range(50.0..(2.0f64 * t1).min(250.0));
            QubitCal {
                t1: t1 * 1e-6,
                t2: t2 * 1e-6,
                readout_error: rng.random_range(0.005..0.04),
            }
        })
        .collect();
    let mut cal =
        Calibration::new(format!("synthetic-{seed}"), qubits).expect("valid synthetic qubits");
    for q in 0..DEVICE_QUBITS {
        let r = rng.random_range(2e-4..1e-3);
        for name in ["id", "x", "sx", "h", "rx", "ry"] {
            cal.insert_gate(GateCal {
                name: name.into(),
                qubits: vec![q],
                error_rate: r,
                duration: 35.5e-9,
            })
            .expect("valid gate");
        }
        cal.insert_gate(GateCal {
            name: "rz".into(),
            qubits: vec![q],
            error_rate: 0.0,
            duration: 0.0,
        })
        .expect("valid gate");
    }
    for (a, b) in device_edges() {
        let r = rng.random_range(5e-3..2e-2);
        let duration = rng.random_range(300e-9..660e-9);
        for name in ["cx", "cz"] {
            cal.insert_gate(GateCal {
                name: name.into(),
                qubits: vec![a, b],
                error_rate: r,
                duration,
            })
            .expect("valid gate");
        }
    }
    cal
}

/// Noise-free calibration on the same coupling map.
pub fn noiseless_calibration() -> Calibration {
    let qubits = vec![
        QubitCal {
            t1: 1.0,
            t2: 1.0,
            readout_error: 0.0
        };
        DEVICE_QUBITS
    ];
    let mut cal = Calibration::new("noiseless", qubits).expect("valid");
    for q in 0..DEVICE_QUBITS {
        for name in ["id", "x", "sx", "h", "rx", "ry", "rz"] {
            cal.insert_gate(GateCal {
                name: name.into(),
                qubits: vec![q],
                error_rate: 0.0,
                duration: 0.0,
            })
            .expect("valid gate");
        }
    }
    for (a, b) in device_edges() {
        for name in ["cx", "cz"] {
            cal.insert_gate(GateCal {
                name: name.into(),
                qubits: vec![a, b],
                error_rate: 0.0,
                duration: 0.0,
            })
            .expect("valid gate");
        }
    }
    cal
}

/// `count` distinct-where-possible injective placements of `n_logical`
/// qubits onto `n_physical`, drawn with a seeded shuffle.
pub fn random_layouts(
    n_logical: usize,
    n_physical: usize,
    count: usize,
    seed: u64,
) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        let mut phys: Vec<usize> = (0..n_physical).collect();
        phys.shuffle(&mut rng);
        phys.truncate(n_logical);
        attempts += 1;
        if seen.insert(phys.clone()) || attempts > 100 * count {
            out.push(phys);
        }
    }
    out
}

fn adjacency(cal: &Calibration) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); cal.num_qubits()];
    for (a, b) in cal.coupled_pairs() {
        adj[a].push(b);
        adj[b].push(a);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

fn shortest_path(adj: &[Vec<usize>], from: usize, to: usize) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::from([from]);
    prev[from] = from;
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = vec![to];
            let mut v = to;
            while v != from {
                v = prev[v];
                path.push(v);
            }
            path.reverse();
            return Some(path);
        }
        for &v in &adj[u] {
            if prev[v] == usize::MAX {
                prev[v] = u;
                queue.push_back(v);
            }
        }
    }
    None
}

/// Places `logical` (identity-layout circuit) at `layout` on the device of
/// `cal` and inserts routing SWAP markers so every two-qubit op acts on a
/// coupled pair. The first operand walks toward the second along a
/// shortest path.
pub fn route(
    logical: &CompiledCircuit,
    cal: &Calibration,
    layout: &[usize],
) -> Result<CompiledCircuit, AnalysisError> {
    let n_phys = cal.num_qubits();
    if layout.len() != logical.num_logical {
        return Err(AnalysisError::Domain(
            "layout length differs from logical qubit count".into(),
        ));
    }
    let adj = adjacency(cal);
    let mut out = CompiledCircuit {
        num_physical: n_phys,
        num_logical: logical.num_logical,
        initial_layout: layout.to_vec(),
        ops: Vec::new(),
        measured: logical.measured.clone(),
    };
    out.check()?;
    let mut state = LayoutState::new(layout, n_phys);
    for op in &logical.ops {
        let phys: Vec<usize> = op.qubits.iter().map(|&l| state.physical(l)).collect();
        if let [a, b] = phys[..] {
            let path = shortest_path(&adj, a, b).ok_or_else(|| {
                AnalysisError::Domain(format!("qubits {a} and {b} are not connected"))
            })?;
            // move the first operand next to the second
            for w in path.windows(2).take(path.len().saturating_sub(2)) {
                out.push_swap(w[0], w[1]);
                state.swap_physical(w[0], w[1]);
            }
        }
        let qubits: Vec<usize> = op.qubits.iter().map(|&l| state.physical(l)).collect();
        out.push(GateOp {
            name: op.name.clone(),
            qubits,
            params: op.params.clone(),
            tag: None,
        });
    }
    Ok(out)
}
