use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::GateOp;

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("invalid swap template: {0}")]
    Json(#[from] serde_json::Error),
    #[error("swap template must contain at least one two-qubit step")]
    NoTwoQubitStep,
}

/// Which physical qubit(s) of the exchanged pair a template step acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemplateTarget {
    A,
    B,
    Ab,
    Ba,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateStep {
    pub name: String,
    pub on: TemplateTarget,
    #[serde(default)]
    pub params: Vec<f64>,
}

/// Native-gate realization of a SWAP between physical qubits `a` and `b`.
///
/// The default is three CNOTs (a→b, b→a, a→b), each realized with a CZ
/// conjugated by `rz(π/2) sx rz(π/2)` on its target, which equals a Hadamard
/// up to global phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapTemplate {
    pub steps: Vec<TemplateStep>,
}

impl Default for SwapTemplate {
    fn default() -> Self {
        use TemplateTarget::*;
        let mut steps = Vec::with_capacity(21);
        // (CNOT target, CZ pair) for CNOT(a,b) CNOT(b,a) CNOT(a,b)
        for (target, pair) in [(B, Ab), (A, Ba), (B, Ab)] {
            let hadamard = |steps: &mut Vec<TemplateStep>| {
                for name in ["rz", "sx", "rz"] {
                    steps.push(TemplateStep {
                        name: name.to_string(),
                        on: target,
                        params: if name == "rz" {
                            vec![FRAC_PI_2]
                        } else {
                            Vec::new()
                        },
                    });
                }
            };
            hadamard(&mut steps);
            steps.push(TemplateStep {
                name: "cz".to_string(),
                on: pair,
                params: Vec::new(),
            });
            hadamard(&mut steps);
        }
        Self { steps }
    }
}

impl SwapTemplate {
    pub fn from_json(text: &str) -> Result<Self, TemplateError> {
        let template: Self = serde_json::from_str(text)?;
        if !template
            .steps
            .iter()
            .any(|s| matches!(s.on, TemplateTarget::Ab | TemplateTarget::Ba))
        {
            return Err(TemplateError::NoTwoQubitStep);
        }
        Ok(template)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("template serializes")
    }

    /// Concrete ops for a SWAP of physical qubits `a` and `b`.
    pub fn expand(&self, a: usize, b: usize) -> Vec<GateOp> {
        self.steps
            .iter()
            .map(|step| {
                let qubits = match step.on {
                    TemplateTarget::A => vec![a],
                    TemplateTarget::B => vec![b],
                    TemplateTarget::Ab => vec![a, b],
                    TemplateTarget::Ba => vec![b, a],
                };
                GateOp {
                    name: step.name.clone(),
                    qubits,
                    params: step.params.clone(),
                    tag: None,
                }
            })
            .collect()
    }
}
