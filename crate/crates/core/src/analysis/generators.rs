//! Seeded benchmark circuit generators. Circuits are logical: qubit `i` sits
//! on physical qubit `i` until routed.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{CompiledCircuit, GateOp};

use super::AnalysisError;

const ROTATIONS: [&str; 3] = ["rx", "ry", "rz"];

/// Two-qubit share of random circuits.
pub const TWO_QUBIT_FRACTION: f64 = 0.3;

fn random_1q(rng: &mut ChaCha8Rng, q: usize) -> GateOp {
    const NAMES: [&str; 6] = ["h", "x", "sx", "rx", "ry", "rz"];
    let name = NAMES[rng.random_range(0..NAMES.len())];
    if ROTATIONS.contains(&name) {
        GateOp::with_params(name, &[q], &[rng.random_range(-PI..PI)])
    } else {
        GateOp::new(name, &[q])
    }
}

/// `depth` layers; in each layer every qubit gets one op, joining a
/// two-qubit `cx`/`cz` with probability [`TWO_QUBIT_FRACTION`] when a partner
/// is free. Nothing is measured.
pub fn gen_random_circuit(
    n_qubits: usize,
    depth: usize,
    seed: u64,
) -> Result<CompiledCircuit, AnalysisError> {
    if n_qubits == 0 {
        return Err(AnalysisError::Domain(
            "random circuit needs at least one qubit".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = CompiledCircuit::with_identity_layout(n_qubits);
    for _ in 0..depth {
        let mut order: Vec<usize> = (0..n_qubits).collect();
        order.shuffle(&mut rng);
        let mut i = 0;
        while i < order.len() {
            if i + 1 < order.len() && rng.random_bool(TWO_QUBIT_FRACTION) {
                let name = if rng.random_bool(0.5) { "cx" } else { "cz" };
                c.push(GateOp::new(name, &[order[i], order[i + 1]]));
                i += 2;
            } else {
                c.push(random_1q(&mut rng, order[i]));
                i += 1;
            }
        }
    }
    Ok(c)
}

/// Bernstein–Vazirani for `secret` (most significant character = highest
/// data qubit). Data qubits `0..k` are measured into classical bits `0..k`;
/// the ancilla is qubit `k` and is not measured.
pub fn gen_bv_circuit(secret: &str) -> Result<CompiledCircuit, AnalysisError> {
    if secret.is_empty() || !secret.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(AnalysisError::Domain(format!(
            "secret {secret:?} is not a nonempty bitstring"
        )));
    }
    let k = secret.len();
    let bits: Vec<bool> = secret.bytes().rev().map(|b| b == b'1').collect();
    let mut c = CompiledCircuit::with_identity_layout(k + 1);
    c.push(GateOp::new("x", &[k]));
    for q in 0..=k {
        c.push(GateOp::new("h", &[q]));
    }
    for (q, &bit) in bits.iter().enumerate() {
        if bit {
            c.push(GateOp::new("cx", &[q, k]));
        }
    }
    for q in 0..k {
        c.push(GateOp::new("h", &[q]));
    }
    c.measured = (0..k).map(|q| (q, q)).collect();
    Ok(c)
}

/// `h` then a `cx` chain; all qubits measured.
pub fn gen_ghz_circuit(n: usize) -> Result<CompiledCircuit, AnalysisError> {
    if n < 2 {
        return Err(AnalysisError::Domain(
            "GHZ needs at least two qubits".into(),
        ));
    }
    let mut c = CompiledCircuit::with_identity_layout(n);
    c.push(GateOp::new("h", &[0]));
    for q in 0..n - 1 {
        c.push(GateOp::new("cx", &[q, q + 1]));
    }
    c.measured = (0..n).map(|q| (q, q)).collect();
    Ok(c)
}

fn inverse_1q(op: &GateOp) -> GateOp {
    match op.name.as_str() {
        "rx" | "ry" | "rz" => GateOp::with_params(op.name.clone(), &op.qubits, &[-op.params[0]]),
        _ => op.clone(),
    }
}

/// Identity circuit: every layer is random single-qubit gates, a `cx` pair
/// applied twice, then the inverses of the single-qubit gates. All qubits
/// measured.
pub fn gen_id_circuit(
    n: usize,
    layers: usize,
    seed: u64,
) -> Result<CompiledCircuit, AnalysisError> {
    if n < 2 {
        return Err(AnalysisError::Domain(
            "identity circuits need at least two qubits".into(),
        ));
    }
    const NAMES: [&str; 5] = ["rx", "ry", "rz", "x", "h"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = CompiledCircuit::with_identity_layout(n);
    for _ in 0..layers {
        let forward: Vec<GateOp> = (0..n)
            .map(|q| {
                let name = NAMES[rng.random_range(0..NAMES.len())];
                if ROTATIONS.contains(&name) {
                    GateOp::with_params(name, &[q], &[rng.random_range(-PI..PI)])
                } else {
                    GateOp::new(name, &[q])
                }
            })
            .collect();
        let a = rng.random_range(0..n - 1);
        for op in &forward {
            c.push(op.clone());
        }
        c.push(GateOp::new("cx", &[a, a + 1]));
        c.push(GateOp::new("cx", &[a, a + 1]));
        for op in forward.iter().rev() {
            c.push(inverse_1q(op));
        }
    }
    c.measured = (0..n).map(|q| (q, q)).collect();
    Ok(c)
}

/// Secret strings for `count` BV circuits with `4..=8` total qubits, cycling
/// through sizes.
pub fn bv_secrets(count: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let len = 3 + i % 5;
            // at least one 1 so the oracle does something
            loop {
                let s: String = (0..len)
                    .map(|_| if rng.random_bool(0.5) { '1' } else { '0' })
                    .collect();
                if s.contains('1') {
                    break s;
                }
            }
        })
        .collect()
}
