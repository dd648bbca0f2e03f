//! Canonical JSON form of [`CompiledCircuit`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::{CircuitError, CompiledCircuit, GateOp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("schema error at {path}: {reason}")]
pub struct SchemaError {
    pub path: String,
    pub reason: String,
}

impl SchemaError {
    pub fn new(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircuit {
    num_physical: usize,
    num_logical: usize,
    initial_layout: Vec<usize>,
    ops: Vec<GateOp>,
    measured: BTreeMap<String, usize>,
}

const REQUIRED: [&str; 5] = [
    "num_physical",
    "num_logical",
    "initial_layout",
    "ops",
    "measured",
];

pub fn parse_json_ir(text: &str) -> Result<CompiledCircuit, SchemaError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| SchemaError::new("$", e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| SchemaError::new("$", "expected an object"))?;
    for key in REQUIRED {
        if !obj.contains_key(key) {
            return Err(SchemaError::new(key, "missing"));
        }
    }
    if let Some(ops) = obj["ops"].as_array() {
        for (i, op) in ops.iter().enumerate() {
            serde_json::from_value::<GateOp>(op.clone())
                .map_err(|e| SchemaError::new(format!("ops[{i}]"), e.to_string()))?;
        }
    }
    let raw: RawCircuit =
        serde_json::from_value(value).map_err(|e| SchemaError::new("$", e.to_string()))?;

    let mut measured = BTreeMap::new();
    for (key, clbit) in raw.measured {
        let logical = key.parse::<usize>().map_err(|_| {
            SchemaError::new(format!("measured.{key}"), "key is not a logical index")
        })?;
        measured.insert(logical, clbit);
    }
    let circuit = CompiledCircuit {
        num_physical: raw.num_physical,
        num_logical: raw.num_logical,
        initial_layout: raw.initial_layout,
        ops: raw.ops,
        measured,
    };
    circuit.check().map_err(schema_from_circuit)?;
    Ok(circuit)
}

fn schema_from_circuit(err: CircuitError) -> SchemaError {
    let path = match &err {
        CircuitError::TooManyLogical { .. } => "num_logical".to_string(),
        CircuitError::LayoutLength { .. } => "initial_layout".to_string(),
        CircuitError::LayoutNotInjective(_) => {
            return SchemaError::new("initial_layout", "not injective")
        }
        CircuitError::QubitOutOfRange { .. } => "$".to_string(),
        CircuitError::BadOp { op, .. } => format!("ops[{op}]"),
        CircuitError::MeasuredOutOfRange(_) | CircuitError::DuplicateClbit(_) => {
            "measured".to_string()
        }
        CircuitError::BadSegment { .. } => "ops".to_string(),
    };
    SchemaError::new(path, err.to_string())
}

pub fn serialize_json_ir(circuit: &CompiledCircuit) -> String {
    let raw = RawCircuit {
        num_physical: circuit.num_physical,
        num_logical: circuit.num_logical,
        initial_layout: circuit.initial_layout.clone(),
        ops: circuit.ops.clone(),
        measured: circuit
            .measured
            .iter()
            .map(|(l, c)| (l.to_string(), *c))
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("circuit serializes")
}
