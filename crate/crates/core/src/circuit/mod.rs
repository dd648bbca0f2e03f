//! Compiled-circuit data model.
//!
//! A [`CompiledCircuit`] is an ordered list of native gate operations on
//! physical qubits together with the initial logical→physical layout and the
//! terminal measurement map. Routing SWAPs are kept as tagged segments so the
//! noise model can treat each one as a single block.

mod json;
mod qasm;
mod template;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::Calibration;

pub use json::{parse_json_ir, serialize_json_ir, SchemaError};
pub use qasm::{parse_qasm, QasmError};
pub use template::{SwapTemplate, TemplateError, TemplateStep, TemplateTarget};

/// Gate name used by the marker ops that stand for an undecomposed SWAP.
pub const SWAP_MARKER: &str = "swap";

/// Routing annotation on a [`GateOp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpTag {
    SwapSegment { segment: usize, partner: usize },
}

/// One native operation on physical qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    pub name: String,
    pub qubits: Vec<usize>,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default)]
    pub tag: Option<OpTag>,
}

impl GateOp {
    pub fn new(name: impl Into<String>, qubits: &[usize]) -> Self {
        Self {
            name: name.into(),
            qubits: qubits.to_vec(),
            params: Vec::new(),
            tag: None,
        }
    }

    pub fn with_params(name: impl Into<String>, qubits: &[usize], params: &[f64]) -> Self {
        Self {
            params: params.to_vec(),
            ..Self::new(name, qubits)
        }
    }

    pub fn segment(&self) -> Option<usize> {
        match self.tag {
            Some(OpTag::SwapSegment { segment, .. }) => Some(segment),
            None => None,
        }
    }

    pub fn is_swap_marker(&self) -> bool {
        self.segment().is_some() && self.name == SWAP_MARKER
    }

    fn is_barrier(&self) -> bool {
        self.name == "barrier"
    }
}

/// Structural problems with a circuit value.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("num_logical ({logical}) exceeds num_physical ({physical})")]
    TooManyLogical { logical: usize, physical: usize },
    #[error("initial_layout has {len} entries but num_logical is {logical}")]
    LayoutLength { len: usize, logical: usize },
    #[error("initial_layout is not injective (physical qubit {0} used twice)")]
    LayoutNotInjective(usize),
    #[error("physical qubit {qubit} out of range (num_physical = {num_physical})")]
    QubitOutOfRange { qubit: usize, num_physical: usize },
    #[error("op {op}: {reason}")]
    BadOp { op: usize, reason: String },
    #[error("measured logical qubit {0} out of range")]
    MeasuredOutOfRange(usize),
    #[error("classical bit {0} assigned to more than one logical qubit")]
    DuplicateClbit(usize),
    #[error("swap segment {segment}: {reason}")]
    BadSegment { segment: usize, reason: String },
}

/// Ordered native-gate operations plus layout and measurement information.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompiledCircuit {
    pub num_physical: usize,
    pub num_logical: usize,
    /// `initial_layout[logical] = physical`.
    pub initial_layout: Vec<usize>,
    pub ops: Vec<GateOp>,
    /// Logical qubit → classical bit. Measurements are terminal.
    pub measured: BTreeMap<usize, usize>,
}

/// A contiguous run of ops sharing one swap-segment id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentSpan {
    pub segment: usize,
    pub start: usize,
    pub end: usize,
    /// The two physical qubits the segment exchanges, in first-seen order.
    pub pair: (usize, usize),
}

impl SegmentSpan {
    /// True when the segment is an undecomposed SWAP (marker ops only).
    pub fn is_marker(&self, circuit: &CompiledCircuit) -> bool {
        circuit.ops[self.start..self.end]
            .iter()
            .all(GateOp::is_swap_marker)
    }
}

/// One unit of work when walking a circuit: a plain op or a whole SWAP segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Op(usize),
    Segment(SegmentSpan),
}

impl CompiledCircuit {
    /// Circuit with `n` qubits, identity layout and no ops.
    pub fn with_identity_layout(n: usize) -> Self {
        Self {
            num_physical: n,
            num_logical: n,
            initial_layout: (0..n).collect(),
            ops: Vec::new(),
            measured: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, op: GateOp) -> &mut Self {
        self.ops.push(op);
        self
    }

    /// Appends an undecomposed SWAP as a matched pair of marker ops.
    pub fn push_swap(&mut self, a: usize, b: usize) -> &mut Self {
        let segment = self.next_segment_id();
        for (q, partner) in [(a, b), (b, a)] {
            self.ops.push(GateOp {
                name: SWAP_MARKER.to_string(),
                qubits: vec![q],
                params: Vec::new(),
                tag: Some(OpTag::SwapSegment { segment, partner }),
            });
        }
        self
    }

    pub fn next_segment_id(&self) -> usize {
        self.ops
            .iter()
            .filter_map(GateOp::segment)
            .max()
            .map_or(0, |s| s + 1)
    }

    /// Checks every structural invariant of the IR.
    pub fn check(&self) -> Result<(), CircuitError> {
        if self.num_logical > self.num_physical {
            return Err(CircuitError::TooManyLogical {
                logical: self.num_logical,
                physical: self.num_physical,
            });
        }
        if self.initial_layout.len() != self.num_logical {
            return Err(CircuitError::LayoutLength {
                len: self.initial_layout.len(),
                logical: self.num_logical,
            });
        }
        let mut seen = BTreeSet::new();
        for &p in &self.initial_layout {
            if p >= self.num_physical {
                return Err(CircuitError::QubitOutOfRange {
                    qubit: p,
                    num_physical: self.num_physical,
                });
            }
            if !seen.insert(p) {
                return Err(CircuitError::LayoutNotInjective(p));
            }
        }
        for (i, op) in self.ops.iter().enumerate() {
            let bad = |reason: &str| CircuitError::BadOp {
                op: i,
                reason: reason.to_string(),
            };
            if op.qubits.is_empty() || op.qubits.len() > 2 {
                return Err(bad("ops act on one or two qubits"));
            }
            if op.qubits.len() == 2 && op.qubits[0] == op.qubits[1] {
                return Err(bad("qubit indices must be distinct"));
            }
            if let Some(&q) = op.qubits.iter().find(|&&q| q >= self.num_physical) {
                return Err(CircuitError::QubitOutOfRange {
                    qubit: q,
                    num_physical: self.num_physical,
                });
            }
            if op.params.iter().any(|x| !x.is_finite()) {
                return Err(bad("params must be finite"));
            }
            if op.name == SWAP_MARKER && op.tag.is_none() {
                return Err(bad("bare `swap` op must carry a swap-segment tag"));
            }
        }
        let mut clbits = BTreeSet::new();
        for (&l, &c) in &self.measured {
            if l >= self.num_logical {
                return Err(CircuitError::MeasuredOutOfRange(l));
            }
            if !clbits.insert(c) {
                return Err(CircuitError::DuplicateClbit(c));
            }
        }
        self.segments().map(|_| ())
    }

    /// Locates every swap segment, checking contiguity and pairing.
    pub fn segments(&self) -> Result<Vec<SegmentSpan>, CircuitError> {
        let mut spans = Vec::new();
        let mut finished = BTreeSet::new();
        let mut i = 0;
        while i < self.ops.len() {
            let Some(segment) = self.ops[i].segment() else {
                i += 1;
                continue;
            };
            let bad = |reason: String| CircuitError::BadSegment { segment, reason };
            if !finished.insert(segment) {
                return Err(bad("segment ops are not contiguous".into()));
            }
            let start = i;
            while i < self.ops.len() && self.ops[i].segment() == Some(segment) {
                i += 1;
            }
            let ops = &self.ops[start..i];
            let mut qubits: Vec<usize> = Vec::new();
            for op in ops {
                for &q in &op.qubits {
                    if !qubits.contains(&q) {
                        qubits.push(q);
                    }
                }
            }
            if qubits.len() != 2 {
                return Err(bad(format!(
                    "must cover exactly two physical qubits, covers {}",
                    qubits.len()
                )));
            }
            for op in ops {
                let Some(OpTag::SwapSegment { partner, .. }) = op.tag else {
                    unreachable!()
                };
                if !qubits.contains(&partner) || (op.qubits.len() == 1 && op.qubits[0] == partner) {
                    return Err(bad(format!(
                        "op on {:?} has inconsistent partner {partner}",
                        op.qubits
                    )));
                }
            }
            let markers = ops.iter().filter(|op| op.is_swap_marker()).count();
            if markers > 0 {
                let marker_qubits: BTreeSet<usize> = ops
                    .iter()
                    .filter(|op| op.is_swap_marker())
                    .map(|op| op.qubits[0])
                    .collect();
                if markers != ops.len() || markers != 2 || marker_qubits.len() != 2 {
                    return Err(bad("swap markers must come as one matched pair".into()));
                }
            }
            spans.push(SegmentSpan {
                segment,
                start,
                end: i,
                pair: (qubits[0], qubits[1]),
            });
        }
        Ok(spans)
    }

    /// Walks the circuit as plain ops and whole SWAP segments.
    pub fn blocks(&self) -> Result<Vec<Block>, CircuitError> {
        let spans = self.segments()?;
        let mut blocks = Vec::with_capacity(self.ops.len());
        let mut next = spans.iter().peekable();
        let mut i = 0;
        while i < self.ops.len() {
            match next.peek() {
                Some(span) if span.start == i => {
                    blocks.push(Block::Segment(**span));
                    i = span.end;
                    next.next();
                }
                _ => {
                    blocks.push(Block::Op(i));
                    i += 1;
                }
            }
        }
        Ok(blocks)
    }

    /// Layout after every SWAP segment has been applied.
    pub fn final_layout(&self) -> Result<LayoutState, CircuitError> {
        let mut layout = LayoutState::new(&self.initial_layout, self.num_physical);
        for span in self.segments()? {
            layout.swap_physical(span.pair.0, span.pair.1);
        }
        Ok(layout)
    }

    /// Physical qubit each measured logical qubit is read out from.
    pub fn measured_physical(&self) -> Result<BTreeMap<usize, usize>, CircuitError> {
        let layout = self.final_layout()?;
        Ok(self
            .measured
            .keys()
            .map(|&l| (l, layout.physical(l)))
            .collect())
    }
}

/// Logical/physical residence relation, updated as SWAPs execute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutState {
    l2p: Vec<usize>,
    p2l: Vec<Option<usize>>,
}

impl LayoutState {
    pub fn new(initial: &[usize], num_physical: usize) -> Self {
        let mut p2l = vec![None; num_physical];
        for (l, &p) in initial.iter().enumerate() {
            p2l[p] = Some(l);
        }
        Self {
            l2p: initial.to_vec(),
            p2l,
        }
    }

    pub fn physical(&self, logical: usize) -> usize {
        self.l2p[logical]
    }

    pub fn logical(&self, physical: usize) -> Option<usize> {
        self.p2l.get(physical).copied().flatten()
    }

    pub fn l2p(&self) -> &[usize] {
        &self.l2p
    }

    /// Exchanges whatever logical qubits reside on `a` and `b`.
    pub fn swap_physical(&mut self, a: usize, b: usize) {
        let (la, lb) = (self.p2l[a], self.p2l[b]);
        self.p2l[a] = lb;
        self.p2l[b] = la;
        if let Some(l) = la {
            self.l2p[l] = b;
        }
        if let Some(l) = lb {
            self.l2p[l] = a;
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.l2p
            .iter()
            .enumerate()
            .all(|(l, &p)| self.p2l.get(p).copied().flatten() == Some(l))
            && self
                .p2l
                .iter()
                .enumerate()
                .all(|(p, l)| l.is_none_or(|l| self.l2p.get(l) == Some(&p)))
    }
}

// ---------------------------------------------------------------------------
// Structural metrics
// ---------------------------------------------------------------------------

/// Groups ops into gate units: a marker SWAP pair is one two-qubit gate,
/// barriers are dropped.
fn gate_units(circuit: &CompiledCircuit) -> Vec<Vec<usize>> {
    let mut units = Vec::with_capacity(circuit.ops.len());
    let mut i = 0;
    while i < circuit.ops.len() {
        let op = &circuit.ops[i];
        if op.is_swap_marker() {
            let seg = op.segment();
            let mut qubits = op.qubits.clone();
            i += 1;
            while i < circuit.ops.len() && circuit.ops[i].segment() == seg {
                qubits.extend(&circuit.ops[i].qubits);
                i += 1;
            }
            qubits.sort_unstable();
            qubits.dedup();
            units.push(qubits);
            continue;
        }
        if !op.is_barrier() {
            units.push(op.qubits.clone());
        }
        i += 1;
    }
    units
}

pub fn gate_count(circuit: &CompiledCircuit) -> usize {
    gate_units(circuit).len()
}

/// Longest chain of gates under the order induced by shared physical qubits.
pub fn depth(circuit: &CompiledCircuit) -> usize {
    let mut level = vec![0usize; circuit.num_physical];
    let mut depth = 0;
    for qubits in gate_units(circuit) {
        let next = qubits
            .iter()
            .map(|&q| level.get(q).copied().unwrap_or(0))
            .max()
            .unwrap_or(0)
            + 1;
        for &q in &qubits {
            if let Some(slot) = level.get_mut(q) {
                *slot = next;
            }
        }
        depth = depth.max(next);
    }
    depth
}

// ---------------------------------------------------------------------------
// Validation against calibration
// ---------------------------------------------------------------------------

/// Missing calibration data that blocks noise modeling.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ValidationIssue {
    MissingGateCal(String, Vec<usize>),
    MissingReadoutCal(usize),
    MissingQubitCal(usize),
    Structure(String),
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::MissingGateCal(name, qubits) => write!(f, "MissingGateCal({name:?}, {qubits:?})"),
            Self::MissingReadoutCal(q) => write!(f, "MissingReadoutCal({q})"),
            Self::MissingQubitCal(q) => write!(f, "MissingQubitCal({q})"),
            Self::Structure(msg) => write!(f, "Structure({msg})"),
        }
    }
}

/// Lists everything the calibration cannot parameterize, using the default
/// SWAP template.
pub fn validate_against(circuit: &CompiledCircuit, cal: &Calibration) -> Vec<ValidationIssue> {
    validate_with_template(circuit, cal, &SwapTemplate::default())
}

pub fn validate_with_template(
    circuit: &CompiledCircuit,
    cal: &Calibration,
    template: &SwapTemplate,
) -> Vec<ValidationIssue> {
    let mut issues = BTreeSet::new();
    let blocks = match circuit.check().and_then(|_| circuit.blocks()) {
        Ok(blocks) => blocks,
        Err(e) => return vec![ValidationIssue::Structure(e.to_string())],
    };
    let mut check_op = |name: &str, qubits: &[usize]| {
        if cal.gate(name, qubits).is_none() {
            issues.insert(ValidationIssue::MissingGateCal(
                name.to_string(),
                qubits.to_vec(),
            ));
        }
        for &q in qubits {
            if cal.qubit(q).is_none() {
                issues.insert(ValidationIssue::MissingQubitCal(q));
            }
        }
    };
    for block in blocks {
        match block {
            Block::Op(i) => {
                let op = &circuit.ops[i];
                if !op.is_barrier() {
                    check_op(&op.name, &op.qubits);
                }
            }
            Block::Segment(span) if span.is_marker(circuit) => {
                for op in template.expand(span.pair.0, span.pair.1) {
                    check_op(&op.name, &op.qubits);
                }
            }
            Block::Segment(span) => {
                for op in &circuit.ops[span.start..span.end] {
                    check_op(&op.name, &op.qubits);
                }
            }
        }
    }
    if let Ok(measured) = circuit.measured_physical() {
        for p in measured.values() {
            if cal.qubit(*p).is_none() {
                issues.insert(ValidationIssue::MissingReadoutCal(*p));
            }
        }
    }
    issues.into_iter().collect()
}
