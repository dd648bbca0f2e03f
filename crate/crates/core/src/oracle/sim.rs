use std::collections::BTreeMap;

use num_complex::Complex64;

use super::density::{fidelity_with_pure, qubit_state_fidelity, state_fidelity, DensityMatrix};
use super::distribution::Distribution;
use super::gates;
use super::OracleError;
use crate::calibration::Calibration;
use crate::circuit::{Block, CompiledCircuit, GateOp, LayoutState, SwapTemplate};

pub const DEFAULT_CAP: usize = 8;

#[derive(Debug, Clone)]
pub struct OracleConfig {
    /// Maximum number of active physical qubits.
    pub cap: usize,
    pub template: SwapTemplate,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            cap: DEFAULT_CAP,
            template: SwapTemplate::default(),
        }
    }
}

impl OracleConfig {
    /// Default configuration with the cap taken from `NPCFID_ORACLE_CAP`
    /// when it is set to a positive integer.
    pub fn from_env() -> Self {
        let cap = std::env::var("NPCFID_ORACLE_CAP")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&c| c > 0)
            .unwrap_or(DEFAULT_CAP);
        Self {
            cap,
            ..Self::default()
        }
    }

    pub fn with_cap(cap: usize) -> Self {
        Self {
            cap,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct NoisyRun {
    /// Physical qubits simulated; entry `i` is qubit `i` of `state`.
    pub active: Vec<usize>,
    pub state: DensityMatrix,
    /// `None` when nothing is measured.
    pub distribution: Option<Distribution>,
    pub final_layout: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct IdealRun {
    pub active: Vec<usize>,
    pub state: Vec<Complex64>,
    pub distribution: Option<Distribution>,
    pub final_layout: Vec<usize>,
}

// ---------------------------------------------------------------------------
// Lowering: segments expanded, barriers dropped
// ---------------------------------------------------------------------------

struct Program {
    ops: Vec<GateOp>,
    active: Vec<usize>,
    final_layout: Vec<usize>,
}

fn lower(circuit: &CompiledCircuit, cfg: &OracleConfig) -> Result<Program, OracleError> {
    circuit.check()?;
    let mut ops = Vec::with_capacity(circuit.ops.len());
    let mut layout = LayoutState::new(&circuit.initial_layout, circuit.num_physical);
    for block in circuit.blocks()? {
        match block {
            Block::Op(i) => {
                if circuit.ops[i].name != "barrier" {
                    ops.push(circuit.ops[i].clone());
                }
            }
            Block::Segment(span) => {
                if span.is_marker(circuit) {
                    ops.extend(cfg.template.expand(span.pair.0, span.pair.1));
                } else {
                    ops.extend(circuit.ops[span.start..span.end].iter().cloned());
                }
                layout.swap_physical(span.pair.0, span.pair.1);
            }
        }
    }
    let mut active: Vec<usize> = circuit.initial_layout.clone();
    active.extend(ops.iter().flat_map(|op| op.qubits.iter().copied()));
    active.sort_unstable();
    active.dedup();
    if active.len() > cfg.cap {
        return Err(OracleError::TooLarge {
            qubits: active.len(),
            cap: cfg.cap,
        });
    }
    Ok(Program {
        ops,
        active,
        final_layout: layout.l2p().to_vec(),
    })
}

fn compact(active: &[usize], physical: usize) -> usize {
    active
        .binary_search(&physical)
        .expect("physical qubit is active")
}

fn op_unitary(op: &GateOp) -> Result<Vec<Complex64>, OracleError> {
    match gates::unitary(&op.name, &op.params) {
        Some(u) if u.len() == 1 << (2 * op.qubits.len()) => Ok(u),
        _ => Err(OracleError::UnknownUnitary(op.name.clone())),
    }
}

/// Diagonal probabilities of the active register, marginalized onto the
/// classical bits. Returns `None` when nothing is measured.
fn measure(
    probs: &[f64],
    circuit: &CompiledCircuit,
    active: &[usize],
    final_layout: &[usize],
) -> Option<Distribution> {
    let width = circuit.measured.values().max()? + 1;
    let routes: Vec<(usize, usize)> = circuit
        .measured
        .iter()
        .map(|(&l, &clbit)| (compact(active, final_layout[l]), clbit))
        .collect();
    let mut out = vec![0.0; 1 << width];
    for (k, &p) in probs.iter().enumerate() {
        let outcome = routes
            .iter()
            .fold(0usize, |acc, &(q, clbit)| acc | (((k >> q) & 1) << clbit));
        out[outcome] += p.max(0.0);
    }
    Some(Distribution::new(width, out).expect("width matches"))
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

pub fn simulate_noisy(
    circuit: &CompiledCircuit,
    cal: &Calibration,
    cfg: &OracleConfig,
) -> Result<NoisyRun, OracleError> {
    let program = lower(circuit, cfg)?;
    let active = &program.active;
    let mut rho = DensityMatrix::zero_state(active.len());
    for op in &program.ops {
        let u = op_unitary(op)?;
        let noise = cal.lookup_gate(&op.name, &op.qubits)?;
        let local: Vec<usize> = op.qubits.iter().map(|&q| compact(active, q)).collect();
        rho = rho.apply_unitary(&u, &local)?;
        rho = rho.apply_depolarizing(&local, noise.p)?;
        if noise.duration > 0.0 {
            for (&q, qc) in local.iter().zip(&noise.qubits) {
                rho = rho.apply_thermal(q, noise.duration, qc.t1, qc.oracle_t2())?;
            }
        }
    }

    let mut distribution = measure(&rho.diagonal(), circuit, active, &program.final_layout);
    if let Some(dist) = distribution.as_mut() {
        for (&l, &clbit) in &circuit.measured {
            let physical = program.final_layout[l];
            let qc = cal
                .qubit(physical)
                .ok_or(OracleError::MissingReadoutCal(physical))?;
            *dist = dist.apply_readout_flip(clbit, qc.readout_error)?;
        }
    }
    Ok(NoisyRun {
        active: program.active,
        state: rho,
        distribution,
        final_layout: program.final_layout,
    })
}

fn apply_to_statevector(psi: &mut [Complex64], u: &[Complex64], qubits: &[usize]) {
    let k = qubits.len();
    let local = 1usize << k;
    let mask: usize = qubits.iter().map(|q| 1usize << q).sum();
    let mut idx = vec![0usize; local];
    let mut buf = vec![Complex64::new(0.0, 0.0); local];
    for base in (0..psi.len()).filter(|i| i & mask == 0) {
        for (m, slot) in idx.iter_mut().enumerate() {
            *slot = qubits.iter().enumerate().fold(base, |acc, (j, &q)| {
                if (m >> (k - 1 - j)) & 1 == 1 {
                    acc | (1 << q)
                } else {
                    acc
                }
            });
        }
        for a in 0..local {
            buf[a] = (0..local).map(|b| u[a * local + b] * psi[idx[b]]).sum();
        }
        for (a, &i) in idx.iter().enumerate() {
            psi[i] = buf[a];
        }
    }
}

/// Noise-free statevector run over the same active register as
/// [`simulate_noisy`].
pub fn simulate_ideal(
    circuit: &CompiledCircuit,
    cfg: &OracleConfig,
) -> Result<IdealRun, OracleError> {
    let program = lower(circuit, cfg)?;
    let active = &program.active;
    let mut psi = vec![Complex64::new(0.0, 0.0); 1 << active.len()];
    psi[0] = Complex64::new(1.0, 0.0);
    for op in &program.ops {
        let u = op_unitary(op)?;
        let local: Vec<usize> = op.qubits.iter().map(|&q| compact(active, q)).collect();
        apply_to_statevector(&mut psi, &u, &local);
    }
    let probs: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
    let distribution = measure(&probs, circuit, active, &program.final_layout);
    Ok(IdealRun {
        active: program.active,
        state: psi,
        distribution,
        final_layout: program.final_layout,
    })
}

// ---------------------------------------------------------------------------
// Per-qubit comparisons
// ---------------------------------------------------------------------------

/// Fidelity of the logical register: both runs reduced to the physical
/// qubits that hold logical qubits at the end, in logical order. Equals the
/// full-register fidelity when no unoccupied qubit was touched.
pub fn logical_state_fidelity(noisy: &NoisyRun, ideal: &IdealRun) -> Result<f64, OracleError> {
    if noisy.active != ideal.active {
        return Err(OracleError::DimensionMismatch(
            "runs cover different registers".into(),
        ));
    }
    if noisy.final_layout.len() == noisy.active.len() {
        return fidelity_with_pure(&noisy.state, &ideal.state);
    }
    let keep: Vec<usize> = noisy
        .final_layout
        .iter()
        .map(|&p| compact(&noisy.active, p))
        .collect();
    let a = noisy.state.partial_trace(&keep)?;
    let b = DensityMatrix::from_pure(&ideal.state)?.partial_trace(&keep)?;
    state_fidelity(&a, &b)
}

/// Fidelity of each logical qubit's reduced noisy state against its reduced
/// ideal state, read on the qubit's final physical location.
pub fn per_qubit_state_fidelity(
    noisy: &NoisyRun,
    ideal: &IdealRun,
) -> Result<Vec<f64>, OracleError> {
    if noisy.active != ideal.active {
        return Err(OracleError::DimensionMismatch(
            "runs cover different registers".into(),
        ));
    }
    let ideal_rho = DensityMatrix::from_pure(&ideal.state)?;
    noisy
        .final_layout
        .iter()
        .map(|&physical| {
            let q = compact(&noisy.active, physical);
            let a = noisy.state.partial_trace(&[q])?;
            let b = ideal_rho.partial_trace(&[q])?;
            qubit_state_fidelity(&a, &b)
        })
        .collect()
}

/// Classical fidelity `(Σ_v √(p_v q_v))²` of each measured bit's marginal,
/// keyed by logical qubit.
pub fn per_bit_fidelity(
    circuit: &CompiledCircuit,
    noisy: &Distribution,
    ideal: &Distribution,
) -> Result<BTreeMap<usize, f64>, OracleError> {
    if noisy.width() != ideal.width() {
        return Err(OracleError::DimensionMismatch(
            "distribution widths differ".into(),
        ));
    }
    Ok(circuit
        .measured
        .iter()
        .map(|(&l, &clbit)| {
            let bc: f64 = [false, true]
                .iter()
                .map(|&v| (noisy.bit_marginal(clbit, v) * ideal.bit_marginal(clbit, v)).sqrt())
                .sum();
            (l, bc * bc)
        })
        .collect())
}
