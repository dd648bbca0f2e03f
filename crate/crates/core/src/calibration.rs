//! Hardware calibration snapshots and conversion of reported error rates
//! into channel parameters.
//!
//! Times are held in seconds. The JSON form uses explicit unit keys:
//! `t1_us`/`t2_us` in microseconds and `duration_ns` in nanoseconds.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::SchemaError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("invalid value for {field}: {reason}")]
    Value { field: String, reason: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no calibration for gate {name} on qubits {qubits:?}")]
    MissingGateCal { name: String, qubits: Vec<usize> },
}

/// Per-qubit coherence and readout data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitCal {
    /// Amplitude-damping time, seconds.
    pub t1: f64,
    /// Dephasing time, seconds. May exceed `2 * t1` in raw data.
    pub t2: f64,
    pub readout_error: f64,
}

impl QubitCal {
    /// T2 clamped to the physical bound `2 * t1`, as needed by Kraus channels.
    pub fn oracle_t2(&self) -> f64 {
        self.t2.min(2.0 * self.t1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateCal {
    pub name: String,
    pub qubits: Vec<usize>,
    pub error_rate: f64,
    /// Seconds.
    pub duration: f64,
}

/// Channel parameters for one gate application.
#[derive(Debug, Clone, PartialEq)]
pub struct GateNoise {
    pub p: f64,
    pub duration: f64,
    /// Calibration of each acted-on qubit, in gate operand order.
    pub qubits: Vec<QubitCal>,
}

/// Notes produced while loading, e.g. T2 clamping.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadReport {
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub snapshot_id: String,
    qubits: Vec<QubitCal>,
    gates: HashMap<String, HashMap<Vec<usize>, GateCal>>,
}

/// Converts a reported average gate error rate into the depolarizing
/// probability of a `dim`-dimensional channel: `p = r * d / (d - 1)`.
pub fn depolarizing_param(error_rate: f64, dim: usize) -> Result<f64, CalibrationError> {
    if dim < 2 {
        return Err(CalibrationError::Domain(format!("dimension {dim} < 2")));
    }
    let d = dim as f64;
    let max = (d - 1.0) / d;
    if !(0.0..=max).contains(&error_rate) {
        return Err(CalibrationError::Domain(format!(
            "error rate {error_rate} outside [0, {max}] for dimension {dim}"
        )));
    }
    Ok((error_rate * d / (d - 1.0)).min(1.0))
}

fn check_probability(field: &str, value: f64) -> Result<(), CalibrationError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(CalibrationError::Value {
            field: field.to_string(),
            reason: format!("{value} is not a probability"),
        });
    }
    Ok(())
}

fn check_positive(field: &str, value: f64) -> Result<(), CalibrationError> {
    if !(value.is_finite() && value > 0.0) {
        return Err(CalibrationError::Value {
            field: field.to_string(),
            reason: format!("{value} must be finite and positive"),
        });
    }
    Ok(())
}

impl Calibration {
    /// Empty gate table over the given qubits. Qubit values are validated.
    pub fn new(
        snapshot_id: impl Into<String>,
        qubits: Vec<QubitCal>,
    ) -> Result<Self, CalibrationError> {
        for (i, q) in qubits.iter().enumerate() {
            check_positive(&format!("qubits[{i}].t1"), q.t1)?;
            check_positive(&format!("qubits[{i}].t2"), q.t2)?;
            check_probability(&format!("qubits[{i}].readout_error"), q.readout_error)?;
        }
        Ok(Self {
            snapshot_id: snapshot_id.into(),
            qubits,
            gates: HashMap::new(),
        })
    }

    pub fn insert_gate(&mut self, gate: GateCal) -> Result<(), CalibrationError> {
        let field = format!("gates[{}{:?}]", gate.name, gate.qubits);
        if gate.qubits.is_empty() || gate.qubits.len() > 2 {
            return Err(CalibrationError::Value {
                field,
                reason: "gates act on one or two qubits".into(),
            });
        }
        if gate.qubits.len() == 2 && gate.qubits[0] == gate.qubits[1] {
            return Err(CalibrationError::Value {
                field,
                reason: "qubits must be distinct".into(),
            });
        }
        let dim = 1usize << gate.qubits.len();
        depolarizing_param(gate.error_rate, dim).map_err(|_| CalibrationError::Value {
            field: format!("{field}.error_rate"),
            reason: format!(
                "{} outside [0, {}] for a {}-qubit gate",
                gate.error_rate,
                (dim as f64 - 1.0) / dim as f64,
                gate.qubits.len()
            ),
        })?;
        if !(gate.duration.is_finite() && gate.duration >= 0.0) {
            return Err(CalibrationError::Value {
                field: format!("{field}.duration"),
                reason: format!("{} must be finite and non-negative", gate.duration),
            });
        }
        self.gates
            .entry(gate.name.clone())
            .or_default()
            .insert(gate.qubits.clone(), gate);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[QubitCal] {
        &self.qubits
    }

    pub fn qubit(&self, q: usize) -> Option<&QubitCal> {
        self.qubits.get(q)
    }

    /// Gate entry, falling back to the reversed tuple for two-qubit gates.
    pub fn gate(&self, name: &str, qubits: &[usize]) -> Option<&GateCal> {
        let table = self.gates.get(name)?;
        table.get(qubits).or_else(|| match qubits {
            [a, b] => table.get([*b, *a].as_slice()),
            _ => None,
        })
    }

    /// All gate entries sorted by name then qubits.
    pub fn gates(&self) -> Vec<&GateCal> {
        let mut all: Vec<&GateCal> = self.gates.values().flat_map(|t| t.values()).collect();
        all.sort_by(|a, b| (&a.name, &a.qubits).cmp(&(&b.name, &b.qubits)));
        all
    }

    /// Undirected qubit pairs that have any calibrated two-qubit gate.
    pub fn coupled_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = self
            .gates
            .values()
            .flat_map(|t| t.keys())
            .filter(|q| q.len() == 2)
            .map(|q| (q[0].min(q[1]), q[0].max(q[1])))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    /// Depolarizing probability, duration and per-qubit coherence for a gate.
    pub fn lookup_gate(&self, name: &str, qubits: &[usize]) -> Result<GateNoise, CalibrationError> {
        let missing = || CalibrationError::MissingGateCal {
            name: name.to_string(),
            qubits: qubits.to_vec(),
        };
        let gate = self.gate(name, qubits).ok_or_else(missing)?;
        let p = depolarizing_param(gate.error_rate, 1 << qubits.len())?;
        let qubits = qubits
            .iter()
            .map(|&q| self.qubit(q).copied().ok_or_else(missing))
            .collect::<Result<_, _>>()?;
        Ok(GateNoise {
            p,
            duration: gate.duration,
            qubits,
        })
    }

    pub fn to_json(&self) -> String {
        let raw = RawCalibration {
            snapshot_id: self.snapshot_id.clone(),
            qubits: self
                .qubits
                .iter()
                .map(|q| RawQubit {
                    t1_us: to_file_units(q.t1, 1e6),
                    t2_us: to_file_units(q.t2, 1e6),
                    readout_error: q.readout_error,
                })
                .collect(),
            gates: self
                .gates()
                .into_iter()
                .map(|g| RawGate {
                    name: g.name.clone(),
                    qubits: g.qubits.clone(),
                    error_rate: g.error_rate,
                    duration_ns: to_file_units(g.duration, 1e9),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("calibration serializes")
    }
}

/// `si · scale`, nudged by a few ulps where needed so that dividing by
/// `scale` on load gives back exactly `si`.
fn to_file_units(si: f64, scale: f64) -> f64 {
    let guess = si * scale;
    let (mut up, mut down) = (guess, guess);
    for _ in 0..4 {
        if up / scale == si {
            return up;
        }
        if down / scale == si {
            return down;
        }
        up = up.next_up();
        down = down.next_down();
    }
    guess
}

// ---------------------------------------------------------------------------
// JSON loading
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQubit {
    t1_us: f64,
    t2_us: f64,
    readout_error: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGate {
    name: String,
    qubits: Vec<usize>,
    error_rate: f64,
    duration_ns: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCalibration {
    snapshot_id: String,
    qubits: Vec<RawQubit>,
    gates: Vec<RawGate>,
}

pub fn load_calibration(json: &str) -> Result<(Calibration, LoadReport), CalibrationError> {
    let value: serde_json::Value =
        serde_json::from_str(json).map_err(|e| SchemaError::new("$", e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| SchemaError::new("$", "expected an object"))?;
    for key in ["snapshot_id", "qubits", "gates"] {
        if !obj.contains_key(key) {
            return Err(SchemaError::new(key, "missing").into());
        }
    }
    let raw: RawCalibration =
        serde_json::from_value(value).map_err(|e| SchemaError::new("$", e.to_string()))?;

    let mut report = LoadReport::default();
    let mut qubits = Vec::with_capacity(raw.qubits.len());
    for (i, q) in raw.qubits.iter().enumerate() {
        check_positive(&format!("qubits[{i}].t1_us"), q.t1_us)?;
        check_positive(&format!("qubits[{i}].t2_us"), q.t2_us)?;
        if q.t2_us > 2.0 * q.t1_us {
            report.warnings.push(format!(
                "qubit {i}: t2 = {} us exceeds 2*t1 = {} us; oracle channels use 2*t1",
                q.t2_us,
                2.0 * q.t1_us
            ));
        }
        qubits.push(QubitCal {
            t1: q.t1_us / 1e6,
            t2: q.t2_us / 1e6,
            readout_error: q.readout_error,
        });
    }
    let mut cal = Calibration::new(raw.snapshot_id, qubits)?;
    for (i, g) in raw.gates.into_iter().enumerate() {
        if let Some(&q) = g.qubits.iter().find(|&&q| q >= cal.num_qubits()) {
            return Err(CalibrationError::Value {
                field: format!("gates[{i}].qubits"),
                reason: format!("qubit {q} has no qubit calibration"),
            });
        }
        if !(g.duration_ns.is_finite() && g.duration_ns >= 0.0) {
            return Err(CalibrationError::Value {
                field: format!("gates[{i}].duration_ns"),
                reason: format!("{} must be finite and non-negative", g.duration_ns),
            });
        }
        cal.insert_gate(GateCal {
            name: g.name,
            qubits: g.qubits,
            error_rate: g.error_rate,
            duration: g.duration_ns / 1e9,
        })?;
    }
    Ok((cal, report))
}
