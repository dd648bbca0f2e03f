//! Baseline reliability metrics and the common metric vector used for
//! ranking.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::calibration::{Calibration, CalibrationError};
use crate::circuit::{self, Block, CompiledCircuit, SwapTemplate};
use crate::npc::{self, EvalOptions};
use crate::oracle::{self, Distribution, IdealRun, NoisyRun, OracleError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricId {
    ProxyFidelity,
    Esp,
    GateCount,
    Depth,
    SuccessProb,
    DistSimilarity,
    StateFidelity,
    /// Reserved for a learned evaluator; never produced by this crate.
    MlEstimate,
}

impl MetricId {
    pub const COMPUTED: [MetricId; 7] = [
        MetricId::ProxyFidelity,
        MetricId::Esp,
        MetricId::GateCount,
        MetricId::Depth,
        MetricId::SuccessProb,
        MetricId::DistSimilarity,
        MetricId::StateFidelity,
    ];

    pub fn higher_is_better(self) -> bool {
        !matches!(self, MetricId::GateCount | MetricId::Depth)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MetricId::ProxyFidelity => "proxy_fidelity",
            MetricId::Esp => "esp",
            MetricId::GateCount => "gate_count",
            MetricId::Depth => "depth",
            MetricId::SuccessProb => "success_prob",
            MetricId::DistSimilarity => "dist_similarity",
            MetricId::StateFidelity => "state_fidelity",
            MetricId::MlEstimate => "ml_estimate",
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub metric: MetricId,
    pub value: f64,
    pub higher_is_better: bool,
}

impl MetricValue {
    pub fn new(metric: MetricId, value: f64) -> Self {
        Self {
            metric,
            value,
            higher_is_better: metric.higher_is_better(),
        }
    }

    /// Value oriented so that larger always means more reliable.
    pub fn oriented(&self) -> f64 {
        if self.higher_is_better {
            self.value
        } else {
            -self.value
        }
    }
}

// ---------------------------------------------------------------------------
// Individual metrics
// ---------------------------------------------------------------------------

/// `∏(1 − r_op) · ∏_measured(1 − e)` with raw error rates. Routing SWAPs
/// are expanded through `template`.
pub fn esp_with(
    circuit: &CompiledCircuit,
    cal: &Calibration,
    template: &SwapTemplate,
) -> Result<f64, CalibrationError> {
    let missing = |name: &str, qubits: &[usize]| CalibrationError::MissingGateCal {
        name: name.to_string(),
        qubits: qubits.to_vec(),
    };
    let blocks = circuit
        .blocks()
        .map_err(|e| CalibrationError::Domain(e.to_string()))?;
    let mut factors = Vec::with_capacity(circuit.ops.len());
    for block in blocks {
        match block {
            Block::Op(i) => {
                let op = &circuit.ops[i];
                if op.name == "barrier" {
                    continue;
                }
                let g = cal
                    .gate(&op.name, &op.qubits)
                    .ok_or_else(|| missing(&op.name, &op.qubits))?;
                factors.push(1.0 - g.error_rate);
            }
            Block::Segment(span) => {
                let ops = if span.is_marker(circuit) {
                    template.expand(span.pair.0, span.pair.1)
                } else {
                    circuit.ops[span.start..span.end].to_vec()
                };
                for op in &ops {
                    let g = cal
                        .gate(&op.name, &op.qubits)
                        .ok_or_else(|| missing(&op.name, &op.qubits))?;
                    factors.push(1.0 - g.error_rate);
                }
            }
        }
    }
    let measured = circuit
        .measured_physical()
        .map_err(|e| CalibrationError::Domain(e.to_string()))?;
    for &physical in measured.values() {
        let qc = cal.qubit(physical).ok_or_else(|| {
            CalibrationError::Domain(format!("no readout calibration for qubit {physical}"))
        })?;
        factors.push(1.0 - qc.readout_error);
    }
    Ok(esp_product(&factors))
}

pub fn esp(circuit: &CompiledCircuit, cal: &Calibration) -> Result<f64, CalibrationError> {
    esp_with(circuit, cal, &SwapTemplate::default())
}

/// Product of success factors; an exact zero short-circuits.
pub fn esp_product(factors: &[f64]) -> f64 {
    if factors.contains(&0.0) {
        0.0
    } else {
        factors.iter().product()
    }
}

/// `1 − hellinger(P, Q)`.
pub fn dist_similarity(p: &Distribution, q: &Distribution) -> Result<f64, OracleError> {
    Ok(1.0 - oracle::hellinger(p, q)?)
}

/// Oracle outputs needed by the execution-based metrics.
#[derive(Debug, Clone)]
pub struct OracleResults {
    pub state_fidelity: f64,
    pub noisy: Option<Distribution>,
    pub ideal: Option<Distribution>,
}

impl OracleResults {
    pub fn from_runs(noisy: &NoisyRun, ideal: &IdealRun) -> Result<Self, OracleError> {
        Ok(Self {
            state_fidelity: oracle::logical_state_fidelity(noisy, ideal)?,
            noisy: noisy.distribution.clone(),
            ideal: ideal.distribution.clone(),
        })
    }

    /// Target outcomes: the ideal support, when the ideal distribution is
    /// uniform on it (basis-state, GHZ-like outputs). `None` otherwise.
    pub fn targets(&self) -> Option<Vec<usize>> {
        let ideal = self.ideal.as_ref()?;
        let support = ideal.support(1e-9);
        let first = ideal.prob(*support.first()?);
        support
            .iter()
            .all(|&s| (ideal.prob(s) - first).abs() < 1e-9)
            .then_some(support)
    }
}

// ---------------------------------------------------------------------------
// Metric vector
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricScores {
    pub values: Vec<MetricValue>,
    /// Metrics that could not be computed, with the reason.
    pub skipped: Vec<(MetricId, String)>,
}

impl MetricScores {
    pub fn get(&self, metric: MetricId) -> Option<&MetricValue> {
        self.values.iter().find(|v| v.metric == metric)
    }
}

/// Every metric computable from the given inputs. Failures are recorded in
/// `skipped` rather than returned.
pub fn score_all(
    circuit: &CompiledCircuit,
    cal: &Calibration,
    oracle_results: Option<&OracleResults>,
    options: &EvalOptions,
) -> MetricScores {
    let mut values = Vec::new();
    let mut skipped = Vec::new();

    match npc::evaluate(circuit, cal, options) {
        Ok(report) => values.push(MetricValue::new(MetricId::ProxyFidelity, report.circuit)),
        Err(e) => skipped.push((MetricId::ProxyFidelity, e.to_string())),
    }
    match esp_with(circuit, cal, &options.template) {
        Ok(v) => values.push(MetricValue::new(MetricId::Esp, v)),
        Err(e) => skipped.push((MetricId::Esp, e.to_string())),
    }
    values.push(MetricValue::new(
        MetricId::GateCount,
        circuit::gate_count(circuit) as f64,
    ));
    values.push(MetricValue::new(
        MetricId::Depth,
        circuit::depth(circuit) as f64,
    ));

    const NO_ORACLE: &str = "no oracle results";
    let Some(oracle_results) = oracle_results else {
        for m in [
            MetricId::SuccessProb,
            MetricId::DistSimilarity,
            MetricId::StateFidelity,
        ] {
            skipped.push((m, NO_ORACLE.to_string()));
        }
        return MetricScores { values, skipped };
    };

    match (&oracle_results.noisy, oracle_results.targets()) {
        (Some(noisy), Some(targets)) => match oracle::success_probability(noisy, &targets) {
            Ok(v) => values.push(MetricValue::new(MetricId::SuccessProb, v)),
            Err(e) => skipped.push((MetricId::SuccessProb, e.to_string())),
        },
        (None, _) => skipped.push((MetricId::SuccessProb, "nothing measured".to_string())),
        (_, None) => skipped.push((
            MetricId::SuccessProb,
            "ideal output has no uniform target set".to_string(),
        )),
    }
    match (&oracle_results.noisy, &oracle_results.ideal) {
        (Some(noisy), Some(ideal)) => match dist_similarity(noisy, ideal) {
            Ok(v) => values.push(MetricValue::new(MetricId::DistSimilarity, v)),
            Err(e) => skipped.push((MetricId::DistSimilarity, e.to_string())),
        },
        _ => skipped.push((MetricId::DistSimilarity, "nothing measured".to_string())),
    }
    values.push(MetricValue::new(
        MetricId::StateFidelity,
        oracle_results.state_fidelity,
    ));
    MetricScores { values, skipped }
}

/// CSV rows `circuit_id,metric,value,higher_is_better`.
pub fn metrics_csv<'a>(rows: impl IntoIterator<Item = (&'a str, &'a MetricScores)>) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["circuit_id", "metric", "value", "higher_is_better"])
        .expect("in-memory write");
    for (id, scores) in rows {
        for v in &scores.values {
            wtr.write_record([
                id,
                v.metric.as_str(),
                &format!("{:.12}", v.value),
                &v.higher_is_better.to_string(),
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(wtr.into_inner().expect("flush")).expect("utf8")
}
