//! Entanglement-versus-proxy sweeps on the `Ry(θ)` + CNOT state.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::npc::{step_depolarizing, step_thermal};
use crate::oracle::gates::unitary;
use crate::oracle::{negativity, DensityMatrix};

use super::AnalysisError;

/// Default coherence times of the thermal sweep, seconds.
pub const SWEEP_T1: f64 = 100e-6;
pub const SWEEP_T2: f64 = 100e-6;

/// Channel applied to the rotated (control) qubit. The sweep parameter is
/// `p` for depolarizing and `t / T2` for thermal relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepChannel {
    Depolarizing,
    Thermal { t1: f64, t2: f64 },
}

impl SweepChannel {
    pub fn thermal_default() -> Self {
        Self::Thermal {
            t1: SWEEP_T1,
            t2: SWEEP_T2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Depolarizing => "depolarizing",
            Self::Thermal { .. } => "thermal",
        }
    }
}

impl fmt::Display for SweepChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepChannel {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "depolarizing" => Ok(Self::Depolarizing),
            "thermal" => Ok(Self::thermal_default()),
            other => Err(AnalysisError::Domain(format!("unknown channel {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    pub param: f64,
    pub negativity: f64,
    pub proxy_fidelity: f64,
}

/// `Ry(θ)` on qubit 0 followed by CNOT(0 → 1), from `|00⟩`.
pub fn entangled_state(theta: f64) -> DensityMatrix {
    let ry = unitary("ry", &[theta]).expect("ry in table");
    let cx = unitary("cx", &[]).expect("cx in table");
    DensityMatrix::zero_state(2)
        .apply_unitary(&ry, &[0])
        .and_then(|s| s.apply_unitary(&cx, &[0, 1]))
        .expect("two-qubit state")
}

/// `steps` evenly spaced parameters over `[0, 1]`.
pub fn fig5_sweep(
    theta: f64,
    channel: SweepChannel,
    steps: usize,
) -> Result<Vec<SweepRow>, AnalysisError> {
    if !(theta > 0.0 && theta <= std::f64::consts::PI) {
        return Err(AnalysisError::Domain(format!(
            "theta {theta} outside (0, π]"
        )));
    }
    if steps < 2 {
        return Err(AnalysisError::Domain(
            "a sweep needs at least two steps".into(),
        ));
    }
    let state = entangled_state(theta);
    (0..steps)
        .map(|k| {
            let param = k as f64 / (steps - 1) as f64;
            let (noisy, proxy) = match channel {
                SweepChannel::Depolarizing => (
                    state.apply_depolarizing(&[0], param)?,
                    step_depolarizing(1.0, param)?,
                ),
                SweepChannel::Thermal { t1, t2 } => {
                    let t = param * t2;
                    (
                        state.apply_thermal(0, t, t1, t2.min(2.0 * t1))?,
                        step_thermal(1.0, t, t1, t2)?,
                    )
                }
            };
            Ok(SweepRow {
                theta,
                param,
                negativity: negativity(&noisy, &[0])?,
                proxy_fidelity: proxy,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow], channel_column: Option<&str>) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["theta", "param", "negativity", "proxy_fidelity"];
    if channel_column.is_some() {
        header.insert(0, "channel");
    }
    wtr.write_record(&header).expect("in-memory write");
    for r in rows {
        let mut rec = vec![
            format!("{:.12}", r.theta),
            format!("{:.2}", r.param),
            format!("{:.12}", r.negativity),
            format!("{:.12}", r.proxy_fidelity),
        ];
        if let Some(ch) = channel_column {
            rec.insert(0, ch.to_string());
        }
        wtr.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(wtr.into_inner().expect("flush")).expect("utf8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};

    #[test]
    fn initial_points() {
        let rows = fig5_sweep(FRAC_PI_2, SweepChannel::Depolarizing, 101).unwrap();
        assert_eq!(rows.len(), 101);
        assert_relative_eq!(rows[0].negativity, 0.5, epsilon = 1e-10);
        assert_eq!(rows[0].proxy_fidelity, 1.0);
        let rows = fig5_sweep(FRAC_PI_8, SweepChannel::Depolarizing, 101).unwrap();
        assert_relative_eq!(rows[0].negativity, 0.19, epsilon = 0.005);
    }

    #[test]
    fn thermal_sweep_shapes() {
        for theta in [FRAC_PI_8, FRAC_PI_4, FRAC_PI_2] {
            let rows = fig5_sweep(theta, SweepChannel::thermal_default(), 101).unwrap();
            for w in rows.windows(2) {
                assert!(w[1].proxy_fidelity < w[0].proxy_fidelity);
                assert!(w[1].negativity <= w[0].negativity + 1e-12);
            }
        }
    }

    #[test]
    fn depolarizing_proxy_column_ignores_theta() {
        let a = fig5_sweep(FRAC_PI_8, SweepChannel::Depolarizing, 101).unwrap();
        let b = fig5_sweep(FRAC_PI_2, SweepChannel::Depolarizing, 101).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.proxy_fidelity, y.proxy_fidelity);
        }
    }

    #[test]
    fn bad_arguments() {
        assert!(fig5_sweep(0.0, SweepChannel::Depolarizing, 10).is_err());
        assert!(fig5_sweep(1.0, SweepChannel::Depolarizing, 1).is_err());
        assert!("amplitude".parse::<SweepChannel>().is_err());
    }
}
