use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::calibration::Calibration;
use crate::circuit::CompiledCircuit;
use crate::metrics::{score_all, MetricId, MetricScores, OracleResults};
use crate::npc::EvalOptions;
use crate::oracle::{simulate_ideal, simulate_noisy, OracleConfig};
use crate::parallel::{self, ExecMode};

use super::stats::{ordinal_ranks_desc, spearman_rho};
use super::AnalysisError;

/// Ground truth used to judge the metric rankings.
#[derive(Debug, Clone, Default)]
pub enum Reference {
    #[default]
    None,
    Oracle(OracleConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingResult {
    pub circuit_ids: Vec<String>,
    /// Raw metric values per circuit, for metrics available on every circuit.
    pub values: BTreeMap<MetricId, Vec<f64>>,
    /// 1 = most reliable by that metric; ties go to the lower index.
    pub ranks: BTreeMap<MetricId, Vec<usize>>,
    /// Spearman ρ of each metric against the state-fidelity ranking; `None`
    /// where undefined (a single circuit or a constant column).
    pub rho_vs_reference: BTreeMap<MetricId, Option<f64>>,
}

impl RankingResult {
    /// ρ for `metric`, counting an undefined coefficient as 0.
    pub fn rho_or_zero(&self, metric: MetricId) -> f64 {
        self.rho_vs_reference
            .get(&metric)
            .copied()
            .flatten()
            .unwrap_or(0.0)
    }

    /// Rows `circuit_id,metric,value,rank`.
    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["circuit_id", "metric", "value", "rank"])
            .expect("in-memory write");
        for (metric, values) in &self.values {
            for (i, v) in values.iter().enumerate() {
                wtr.write_record([
                    self.circuit_ids[i].as_str(),
                    metric.as_str(),
                    &format!("{v:.12}"),
                    &self.ranks[metric][i].to_string(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(wtr.into_inner().expect("flush")).expect("utf8")
    }
}

fn oriented(metric: MetricId, v: f64) -> f64 {
    if metric.higher_is_better() {
        v
    } else {
        -v
    }
}

/// Ranks logically equivalent implementations by every available metric.
pub fn rank_layouts(
    implementations: &[CompiledCircuit],
    circuit_ids: Option<&[String]>,
    cal: &Calibration,
    reference: &Reference,
    options: &EvalOptions,
    mode: ExecMode,
) -> Result<RankingResult, AnalysisError> {
    let ids: Vec<String> = match circuit_ids {
        Some(ids) if ids.len() == implementations.len() => ids.to_vec(),
        Some(_) => {
            return Err(AnalysisError::Domain(
                "one id per implementation required".into(),
            ))
        }
        None => (0..implementations.len())
            .map(|i| format!("impl{i}"))
            .collect(),
    };
    let scores: Vec<MetricScores> = parallel::try_map(mode, implementations, |c| {
        let oracle_results = match reference {
            Reference::None => None,
            Reference::Oracle(cfg) => {
                let noisy = simulate_noisy(c, cal, cfg)?;
                let ideal = simulate_ideal(c, cfg)?;
                Some(OracleResults::from_runs(&noisy, &ideal)?)
            }
        };
        Ok::<_, AnalysisError>(score_all(c, cal, oracle_results.as_ref(), options))
    })?;

    let mut values = BTreeMap::new();
    for metric in MetricId::COMPUTED {
        let column: Option<Vec<f64>> = scores
            .iter()
            .map(|s| s.get(metric).map(|v| v.value))
            .collect();
        if let Some(column) = column {
            if !column.is_empty() {
                values.insert(metric, column);
            }
        }
    }
    let ranks = values
        .iter()
        .map(|(&m, col)| {
            let oriented_col: Vec<f64> = col.iter().map(|&v| oriented(m, v)).collect();
            (m, ordinal_ranks_desc(&oriented_col))
        })
        .collect();

    let mut rho_vs_reference = BTreeMap::new();
    if let Some(truth) = values.get(&MetricId::StateFidelity) {
        for (&m, col) in &values {
            if m == MetricId::StateFidelity {
                continue;
            }
            let oriented_col: Vec<f64> = col.iter().map(|&v| oriented(m, v)).collect();
            rho_vs_reference.insert(m, spearman_rho(&oriented_col, truth).ok());
        }
    }
    Ok(RankingResult {
        circuit_ids: ids,
        values,
        ranks,
        rho_vs_reference,
    })
}
