//! Noise Proxy Circuit construction and Proxy Fidelity evaluation.
//!
//! The NPC strips every logical operation from a compiled circuit and keeps,
//! per logical qubit, the ordered list of noise channels that qubit passes
//! through. Proxy fidelity starts at 1 and is updated channel by channel:
//!
//! * depolarizing `D(p)`:      `f ← 1/2 + (f − 1/2)(1 − p)`
//! * thermal `T(t; T1, T2)`:   `f ← 1/2 + (f − 1/2)(⅔e^{−t/T2} + ⅓e^{−t/T1})`
//! * readout bit flip `R(e)`:  `f ← f(1 − e)`
//!
//! Two-qubit gates contribute the same depolarizing probability to both
//! participants plus each participant's own thermal channel. A routing SWAP is
//! one block: the resident's fidelity is evolved through the channel sequence
//! of each of the two physical qubits and the two branch values are averaged.
//! Circuit proxy fidelity is the product over the selected logical qubits.

mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::{Calibration, CalibrationError};
use crate::circuit::{Block, CircuitError, CompiledCircuit, GateOp, LayoutState, SwapTemplate};

pub use report::{trace_csv, ProxyFidelityReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NpcError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    InvalidCircuit(#[from] CircuitError),
    #[error("no calibration for gate {name} on qubits {qubits:?}")]
    MissingGateCal { name: String, qubits: Vec<usize> },
    #[error("no readout calibration for physical qubit {0}")]
    MissingReadoutCal(usize),
}

impl From<CalibrationError> for NpcError {
    fn from(err: CalibrationError) -> Self {
        match err {
            CalibrationError::MissingGateCal { name, qubits } => {
                Self::MissingGateCal { name, qubits }
            }
            other => Self::Domain(other.to_string()),
        }
    }
}

// ---------------------------------------------------------------------------
// Channels and update rules
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseChannel {
    Depolarizing {
        p: f64,
    },
    /// Duration and coherence times in seconds.
    Thermal {
        t: f64,
        t1: f64,
        t2: f64,
    },
    Readout {
        e: f64,
    },
    /// SWAP block. `branches[0]` is the channel sequence on the physical
    /// qubit the logical qubit starts on, `branches[1]` the one on its partner.
    SwapMerge {
        branches: [Vec<NoiseChannel>; 2],
    },
}

impl NoiseChannel {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Depolarizing { .. } => "depolarizing",
            Self::Thermal { .. } => "thermal",
            Self::Readout { .. } => "readout",
            Self::SwapMerge { .. } => "swap",
        }
    }

    pub fn apply(&self, f: f64) -> Result<f64, NpcError> {
        match self {
            Self::Depolarizing { p } => step_depolarizing(f, *p),
            Self::Thermal { t, t1, t2 } => step_thermal(f, *t, *t1, *t2),
            Self::Readout { e } => step_readout(f, *e),
            Self::SwapMerge { branches } => {
                let mut ends = [f, f];
                for (end, branch) in ends.iter_mut().zip(branches) {
                    for ch in branch {
                        *end = ch.apply(*end)?;
                    }
                }
                Ok(0.5 * (ends[0] + ends[1]))
            }
        }
    }
}

fn check_unit(name: &str, v: f64) -> Result<(), NpcError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(NpcError::Domain(format!("{name} = {v} outside [0, 1]")))
    }
}

pub fn step_depolarizing(f: f64, p: f64) -> Result<f64, NpcError> {
    check_unit("fidelity", f)?;
    check_unit("p", p)?;
    Ok(0.5 + (f - 0.5) * (1.0 - p))
}

/// Isotropically averaged thermal-relaxation update.
pub fn step_thermal(f: f64, t: f64, t1: f64, t2: f64) -> Result<f64, NpcError> {
    check_unit("fidelity", f)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(NpcError::Domain(format!(
            "duration {t} must be finite and non-negative"
        )));
    }
    if !(t1 > 0.0 && t2 > 0.0 && t1.is_finite() && t2.is_finite()) {
        return Err(NpcError::Domain(format!(
            "t1 = {t1}, t2 = {t2} must be finite and positive"
        )));
    }
    let contraction = (2.0 / 3.0) * (-t / t2).exp() + (1.0 / 3.0) * (-t / t1).exp();
    Ok(0.5 + (f - 0.5) * contraction)
}

pub fn step_readout(f: f64, e: f64) -> Result<f64, NpcError> {
    check_unit("fidelity", f)?;
    check_unit("e", e)?;
    Ok(f * (1.0 - e))
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventSource {
    Op(usize),
    Measure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEvent {
    pub channel: NoiseChannel,
    pub source: EventSource,
}

/// Ordered noise channels seen by one logical qubit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QubitTrajectory {
    pub logical: usize,
    pub events: Vec<NoiseEvent>,
    /// Physical qubit the logical qubit occupied when each event began.
    pub residences: Vec<usize>,
}

impl QubitTrajectory {
    pub fn new(logical: usize) -> Self {
        Self {
            logical,
            ..Self::default()
        }
    }

    fn push(&mut self, channel: NoiseChannel, source: EventSource, physical: usize) {
        self.events.push(NoiseEvent { channel, source });
        self.residences.push(physical);
    }

    /// At most one readout event, and only in last position.
    pub fn is_well_formed(&self) -> bool {
        let readouts = self
            .events
            .iter()
            .filter(|e| matches!(e.channel, NoiseChannel::Readout { .. }))
            .count();
        self.events.len() == self.residences.len()
            && (readouts == 0
                || (readouts == 1
                    && matches!(
                        self.events.last().map(|e| &e.channel),
                        Some(NoiseChannel::Readout { .. })
                    )))
    }
}

/// Steps `f_0 = 1` through every event, returning the final value and the
/// `(event index, fidelity after)` trace.
pub fn qubit_proxy_fidelity(traj: &QubitTrajectory) -> Result<(f64, Vec<(usize, f64)>), NpcError> {
    if !traj.is_well_formed() {
        return Err(NpcError::Domain(format!(
            "trajectory of logical qubit {} is malformed",
            traj.logical
        )));
    }
    let mut f = 1.0;
    let mut trace = Vec::with_capacity(traj.events.len());
    for (i, event) in traj.events.iter().enumerate() {
        f = event.channel.apply(f)?;
        trace.push((i, f));
    }
    Ok((f, trace))
}

pub fn circuit_proxy_fidelity(per_qubit: &[f64]) -> f64 {
    per_qubit.iter().product()
}

// ---------------------------------------------------------------------------
// NPC construction
// ---------------------------------------------------------------------------

/// Per-physical-qubit channel sequences of a SWAP segment's native ops,
/// `[sequence on a, sequence on b]`.
pub fn swap_branches(
    pair: (usize, usize),
    ops: &[GateOp],
    cal: &Calibration,
) -> Result<[Vec<NoiseChannel>; 2], NpcError> {
    let mut branches: [Vec<NoiseChannel>; 2] = [Vec::new(), Vec::new()];
    for op in ops {
        let noise = cal.lookup_gate(&op.name, &op.qubits)?;
        for (q, qc) in op.qubits.iter().zip(&noise.qubits) {
            let slot = if *q == pair.0 {
                0
            } else if *q == pair.1 {
                1
            } else {
                return Err(NpcError::Domain(format!(
                    "segment op {} acts outside the pair {pair:?}",
                    op.name
                )));
            };
            branches[slot].push(NoiseChannel::Depolarizing { p: noise.p });
            branches[slot].push(NoiseChannel::Thermal {
                t: noise.duration,
                t1: qc.t1,
                t2: qc.t2,
            });
        }
    }
    Ok(branches)
}

/// Applies a SWAP block directly to per-logical fidelities and exchanges
/// the layout entries of the pair.
pub fn apply_swap_segment(
    fidelities: &mut [f64],
    layout: &mut LayoutState,
    pair: (usize, usize),
    segment_ops: &[GateOp],
    cal: &Calibration,
) -> Result<(), NpcError> {
    let [on_a, on_b] = swap_branches(pair, segment_ops, cal)?;
    let merge = NoiseChannel::SwapMerge {
        branches: [on_a, on_b],
    };
    for physical in [pair.0, pair.1] {
        if let Some(l) = layout.logical(physical) {
            fidelities[l] = merge.apply(fidelities[l])?;
        }
    }
    layout.swap_physical(pair.0, pair.1);
    Ok(())
}

pub fn build_npc(
    circuit: &CompiledCircuit,
    cal: &Calibration,
) -> Result<Vec<QubitTrajectory>, NpcError> {
    build_npc_with(circuit, cal, &SwapTemplate::default())
}

pub fn build_npc_with(
    circuit: &CompiledCircuit,
    cal: &Calibration,
    template: &SwapTemplate,
) -> Result<Vec<QubitTrajectory>, NpcError> {
    circuit.check()?;
    let mut layout = LayoutState::new(&circuit.initial_layout, circuit.num_physical);
    let mut trajectories: Vec<QubitTrajectory> =
        (0..circuit.num_logical).map(QubitTrajectory::new).collect();

    for block in circuit.blocks()? {
        match block {
            Block::Op(i) => {
                let op = &circuit.ops[i];
                if op.name == "barrier" {
                    continue;
                }
                let noise = cal.lookup_gate(&op.name, &op.qubits)?;
                for (&physical, qc) in op.qubits.iter().zip(&noise.qubits) {
                    let Some(l) = layout.logical(physical) else {
                        continue;
                    };
                    let traj = &mut trajectories[l];
                    traj.push(
                        NoiseChannel::Depolarizing { p: noise.p },
                        EventSource::Op(i),
                        physical,
                    );
                    traj.push(
                        NoiseChannel::Thermal {
                            t: noise.duration,
                            t1: qc.t1,
                            t2: qc.t2,
                        },
                        EventSource::Op(i),
                        physical,
                    );
                }
            }
            Block::Segment(span) => {
                let (a, b) = span.pair;
                let expanded;
                let ops = if span.is_marker(circuit) {
                    expanded = template.expand(a, b);
                    &expanded[..]
                } else {
                    &circuit.ops[span.start..span.end]
                };
                let [on_a, on_b] = swap_branches(span.pair, ops, cal)?;
                for (physical, branches) in [(a, [&on_a, &on_b]), (b, [&on_b, &on_a])] {
                    if let Some(l) = layout.logical(physical) {
                        trajectories[l].push(
                            NoiseChannel::SwapMerge {
                                branches: [branches[0].clone(), branches[1].clone()],
                            },
                            EventSource::Op(span.start),
                            physical,
                        );
                    }
                }
                layout.swap_physical(a, b);
            }
        }
    }

    for &l in circuit.measured.keys() {
        let physical = layout.physical(l);
        let qc = cal
            .qubit(physical)
            .ok_or(NpcError::MissingReadoutCal(physical))?;
        trajectories[l].push(
            NoiseChannel::Readout {
                e: qc.readout_error,
            },
            EventSource::Measure,
            physical,
        );
    }
    Ok(trajectories)
}

// ---------------------------------------------------------------------------
// End-to-end evaluation
// ---------------------------------------------------------------------------

/// Which logical qubits enter the circuit-level product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QubitScope {
    #[default]
    All,
    Measured,
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub scope: QubitScope,
    pub template: SwapTemplate,
}

impl EvalOptions {
    pub fn with_scope(scope: QubitScope) -> Self {
        Self {
            scope,
            ..Self::default()
        }
    }
}

pub fn evaluate(
    circuit: &CompiledCircuit,
    cal: &Calibration,
    options: &EvalOptions,
) -> Result<ProxyFidelityReport, NpcError> {
    evaluate_detailed(circuit, cal, options).map(|(_, report)| report)
}

/// Like [`evaluate`], also returning the trajectories behind the report.
pub fn evaluate_detailed(
    circuit: &CompiledCircuit,
    cal: &Calibration,
    options: &EvalOptions,
) -> Result<(Vec<QubitTrajectory>, ProxyFidelityReport), NpcError> {
    let trajectories = build_npc_with(circuit, cal, &options.template)?;
    let mut per_qubit = Vec::with_capacity(trajectories.len());
    let mut traces = Vec::with_capacity(trajectories.len());
    for traj in &trajectories {
        let (f, trace) = qubit_proxy_fidelity(traj)?;
        per_qubit.push(f);
        traces.push(trace);
    }
    let circuit_f = match options.scope {
        QubitScope::All => circuit_proxy_fidelity(&per_qubit),
        QubitScope::Measured => circuit.measured.keys().map(|&l| per_qubit[l]).product(),
    };
    Ok((
        trajectories,
        ProxyFidelityReport {
            per_qubit,
            circuit: circuit_f,
            traces,
        },
    ))
}
