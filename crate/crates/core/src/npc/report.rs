use serde::{Deserialize, Serialize};

use super::{EventSource, NoiseChannel, QubitTrajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyFidelityReport {
    pub per_qubit: Vec<f64>,
    pub circuit: f64,
    /// Per logical qubit, `(event index, fidelity after the event)`.
    pub traces: Vec<Vec<(usize, f64)>>,
}

impl ProxyFidelityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// One CSV row per event: `logical,event,source,channel,physical,fidelity`.
pub fn trace_csv(trajectories: &[QubitTrajectory], report: &ProxyFidelityReport) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "logical", "event", "source", "channel", "physical", "fidelity",
    ])
    .expect("in-memory write");
    for (traj, trace) in trajectories.iter().zip(&report.traces) {
        for ((event, physical), (idx, f)) in traj.events.iter().zip(&traj.residences).zip(trace) {
            let source = match event.source {
                EventSource::Op(i) => i.to_string(),
                EventSource::Measure => "measure".to_string(),
            };
            wtr.write_record([
                traj.logical.to_string(),
                idx.to_string(),
                source,
                describe(&event.channel),
                physical.to_string(),
                format!("{f:.12}"),
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(wtr.into_inner().expect("flush")).expect("utf8")
}

fn describe(ch: &NoiseChannel) -> String {
    match ch {
        NoiseChannel::Depolarizing { p } => format!("depolarizing(p={p:e})"),
        NoiseChannel::Thermal { t, t1, t2 } => format!("thermal(t={t:e};t1={t1:e};t2={t2:e})"),
        NoiseChannel::Readout { e } => format!("readout(e={e:e})"),
        NoiseChannel::SwapMerge { branches } => {
            format!(
                "swap(branch_a={};branch_b={})",
                branches[0].len(),
                branches[1].len()
            )
        }
    }
}
