//! Experiment drivers. Every figure analogue is computed from a seeded
//! synthetic device and written as CSV next to a JSON summary.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calibration::Calibration;
use crate::circuit::CompiledCircuit;
use crate::metrics::MetricId;
use crate::npc::{self, EvalOptions, NoiseChannel, QubitScope, QubitTrajectory};
use crate::oracle::{
    haar_average, logical_state_fidelity, simulate_ideal, simulate_noisy, success_probability,
    trace_inner, OracleConfig,
};
use crate::parallel::{self, ExecMode};

use super::device::{random_layouts, route, synthetic_calibration, DEVICE_QUBITS};
use super::generators::{bv_secrets, gen_bv_circuit, gen_id_circuit, gen_random_circuit};
use super::ranking::{rank_layouts, RankingResult, Reference};
use super::stats::{aad_r2, spearman_rho};
use super::sweep::{fig5_sweep, SweepChannel, SweepRow};
use super::AnalysisError;

/// Threshold below which a negativity counts as zero.
pub const NEGATIVITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub oracle: OracleConfig,
    pub mode: ExecMode,
    pub random_circuits: usize,
    pub bv_circuits: usize,
    pub ranking_circuits: usize,
    pub layouts: usize,
    pub ranking_repetitions: usize,
    pub ranking_qubits: usize,
    pub ranking_depth: usize,
    pub id_max_layers: usize,
    pub qubit_sequences: usize,
    pub haar_samples: usize,
    pub sweep_steps: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            oracle: OracleConfig::default(),
            mode: ExecMode::Parallel,
            random_circuits: 60,
            bv_circuits: 30,
            ranking_circuits: 6,
            layouts: 10,
            ranking_repetitions: 10,
            ranking_qubits: 4,
            ranking_depth: 5,
            id_max_layers: 20,
            qubit_sequences: 40,
            haar_samples: 2000,
            sweep_steps: 101,
        }
    }
}

impl ExperimentConfig {
    pub fn calibration(&self) -> Calibration {
        synthetic_calibration(self.seed)
    }
}

/// SplitMix64 finalizer, used to derive independent sub-seeds.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STREAM_RANDOM: u64 = 1;
const STREAM_BV: u64 = 2;
const STREAM_RANKING: u64 = 3;
const STREAM_QUBIT: u64 = 4;
const STREAM_ID: u64 = 5;

// ---------------------------------------------------------------------------
// Accuracy rows
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub kind: String,
    pub id: String,
    pub qubits: usize,
    pub depth: usize,
    pub swaps: usize,
    pub proxy: f64,
    pub oracle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyStats {
    pub count: usize,
    pub aad: f64,
    pub r2: Option<f64>,
}

pub fn accuracy_stats(rows: &[AccuracyRow]) -> Result<AccuracyStats, AnalysisError> {
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.proxy, r.oracle)).collect();
    let acc = aad_r2(&pairs)?;
    Ok(AccuracyStats {
        count: rows.len(),
        aad: acc.aad,
        r2: acc.r2,
    })
}

pub fn accuracy_csv(rows: &[AccuracyRow]) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "kind", "id", "qubits", "depth", "swaps", "proxy", "oracle", "abs_diff",
    ])
    .expect("in-memory write");
    for r in rows {
        wtr.write_record([
            r.kind.clone(),
            r.id.clone(),
            r.qubits.to_string(),
            r.depth.to_string(),
            r.swaps.to_string(),
            format!("{:.12}", r.proxy),
            format!("{:.12}", r.oracle),
            format!("{:.12}", (r.proxy - r.oracle).abs()),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(wtr.into_inner().expect("flush")).expect("utf8")
}

fn swap_count(c: &CompiledCircuit) -> usize {
    c.ops
        .iter()
        .filter(|op| op.is_swap_marker())
        .filter_map(|op| op.segment())
        .collect::<std::collections::BTreeSet<_>>()
        .len()
}

/// Proxy fidelity over all logical qubits against the oracle's
/// pre-measurement fidelity of the logical register.
pub fn state_fidelity_pair(
    circuit: &CompiledCircuit,
    cal: &Calibration,
    cfg: &OracleConfig,
) -> Result<(f64, f64), AnalysisError> {
    let options = EvalOptions {
        scope: QubitScope::All,
        template: cfg.template.clone(),
    };
    let proxy = npc::evaluate(circuit, cal, &options)?.circuit;
    let noisy = simulate_noisy(circuit, cal, cfg)?;
    let ideal = simulate_ideal(circuit, cfg)?;
    Ok((proxy, logical_state_fidelity(&noisy, &ideal)?))
}

/// Random circuits of 4–8 qubits and depth 1–10, each on a random layout.
pub fn random_accuracy(
    cfg: &ExperimentConfig,
    cal: &Calibration,
) -> Result<Vec<AccuracyRow>, AnalysisError> {
    let specs: Vec<(usize, usize, usize)> = (0..cfg.random_circuits)
        .map(|i| (i, 4 + i % 5, 1 + (i / 5) % 10))
        .collect();
    parallel::try_map(cfg.mode, &specs, |&(i, n, depth)| {
        let seed = derive_seed(cfg.seed, STREAM_RANDOM, i as u64);
        let logical = gen_random_circuit(n, depth, seed)?;
        let layout = random_layouts(n, DEVICE_QUBITS, 1, seed).remove(0);
        let routed = route(&logical, cal, &layout)?;
        let (proxy, oracle) = state_fidelity_pair(&routed, cal, &cfg.oracle)?;
        Ok(AccuracyRow {
            kind: "random".into(),
            id: format!("random{i:03}"),
            qubits: n,
            depth,
            swaps: swap_count(&routed),
            proxy,
            oracle,
        })
    })
}

/// BV circuits of 4–8 qubits: proxy over measured qubits against the
/// oracle's probability of reading the secret.
pub fn bv_accuracy(
    cfg: &ExperimentConfig,
    cal: &Calibration,
) -> Result<Vec<AccuracyRow>, AnalysisError> {
    let secrets: Vec<(usize, String)> =
        bv_secrets(cfg.bv_circuits, derive_seed(cfg.seed, STREAM_BV, 0))
            .into_iter()
            .enumerate()
            .collect();
    parallel::try_map(cfg.mode, &secrets, |(i, secret)| {
        let logical = gen_bv_circuit(secret)?;
        let n = logical.num_logical;
        let layout = random_layouts(
            n,
            DEVICE_QUBITS,
            1,
            derive_seed(cfg.seed, STREAM_BV, 1 + *i as u64),
        )
        .remove(0);
        let routed = route(&logical, cal, &layout)?;
        let options = EvalOptions {
            scope: QubitScope::Measured,
            template: cfg.oracle.template.clone(),
        };
        let proxy = npc::evaluate(&routed, cal, &options)?.circuit;
        let noisy = simulate_noisy(&routed, cal, &cfg.oracle)?;
        let target = usize::from_str_radix(secret, 2).expect("bitstring");
        let dist = noisy
            .distribution
            .ok_or_else(|| AnalysisError::Domain("BV circuit measures nothing".into()))?;
        Ok(AccuracyRow {
            kind: "bv".into(),
            id: format!("bv{i:03}_{secret}"),
            qubits: n,
            depth: crate::circuit::depth(&routed),
            swaps: swap_count(&routed),
            proxy,
            oracle: success_probability(&dist, &[target])?,
        })
    })
}

/// Two-qubit identity circuits with 1..=`id_max_layers` layers.
pub fn id_decay(
    cfg: &ExperimentConfig,
    cal: &Calibration,
) -> Result<Vec<AccuracyRow>, AnalysisError> {
    let layers: Vec<usize> = (1..=cfg.id_max_layers).collect();
    parallel::try_map(cfg.mode, &layers, |&l| {
        let logical = gen_id_circuit(2, l, derive_seed(cfg.seed, STREAM_ID, l as u64))?;
        let routed = route(&logical, cal, &[0, 1])?;
        let (proxy, oracle) = state_fidelity_pair(&routed, cal, &cfg.oracle)?;
        Ok(AccuracyRow {
            kind: "id".into(),
            id: format!("id{l:02}"),
            qubits: 2,
            depth: l,
            swaps: 0,
            proxy,
            oracle,
        })
    })
}

/// Random single-qubit channel sequences drawn from the calibration, with
/// the proxy compared to the Haar-averaged `Tr(ρ C(ρ))`.
pub fn qubit_level(
    cfg: &ExperimentConfig,
    cal: &Calibration,
) -> Result<Vec<AccuracyRow>, AnalysisError> {
    let gates: Vec<_> = cal.gates();
    let ids: Vec<usize> = (0..cfg.qubit_sequences).collect();
    parallel::try_map(cfg.mode, &ids, |&i| {
        let seed = derive_seed(cfg.seed, STREAM_QUBIT, i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = rng.random_range(0..cal.num_qubits());
        let touching: Vec<_> = gates.iter().filter(|g| g.qubits.contains(&q)).collect();
        let len = rng.random_range(1..=60);
        let mut traj = QubitTrajectory::new(0);
        let mut channels = Vec::with_capacity(2 * len);
        for _ in 0..len {
            let g = touching[rng.random_range(0..touching.len())];
            let noise = cal.lookup_gate(&g.name, &g.qubits)?;
            let qc = *cal.qubit(q).expect("calibrated qubit");
            channels.push(NoiseChannel::Depolarizing { p: noise.p });
            channels.push(NoiseChannel::Thermal {
                t: noise.duration,
                t1: qc.t1,
                t2: qc.t2,
            });
        }
        for ch in &channels {
            traj.events.push(npc::NoiseEvent {
                channel: ch.clone(),
                source: npc::EventSource::Op(0),
            });
            traj.residences.push(q);
        }
        let (proxy, _) = npc::qubit_proxy_fidelity(&traj)?;
        let actual = haar_average(1, cfg.haar_samples, seed, ExecMode::Sequential, |rho| {
            let mut out = rho.clone();
            for ch in &channels {
                out = match ch {
                    NoiseChannel::Depolarizing { p } => out.apply_depolarizing(&[0], *p),
                    NoiseChannel::Thermal { t, t1, t2 } => {
                        out.apply_thermal(0, *t, *t1, t2.min(2.0 * t1))
                    }
                    _ => Ok(out),
                }
                .expect("valid channel");
            }
            trace_inner(rho, &out).expect("same dimension")
        });
        Ok(AccuracyRow {
            kind: "qubit".into(),
            id: format!("seq{i:03}_q{q}"),
            qubits: 1,
            depth: len,
            swaps: 0,
            proxy,
            oracle: actual,
        })
    })
}

// ---------------------------------------------------------------------------
// Fig. 5 sweeps
// ---------------------------------------------------------------------------

pub const SWEEP_THETAS: [f64; 3] = [FRAC_PI_8, FRAC_PI_4, FRAC_PI_2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCheck {
    pub channel: String,
    pub theta: f64,
    pub initial_negativity: f64,
    pub negativity_non_increasing: bool,
    pub proxy_strictly_decreasing: bool,
    /// Spearman ρ on the points with nonzero negativity.
    pub rho_entangled: Option<f64>,
}

pub fn check_sweep(channel: &str, rows: &[SweepRow]) -> SweepCheck {
    let entangled: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.negativity > NEGATIVITY_FLOOR)
        .collect();
    let neg: Vec<f64> = entangled.iter().map(|r| r.negativity).collect();
    let proxy: Vec<f64> = entangled.iter().map(|r| r.proxy_fidelity).collect();
    SweepCheck {
        channel: channel.to_string(),
        theta: rows.first().map_or(f64::NAN, |r| r.theta),
        initial_negativity: rows.first().map_or(f64::NAN, |r| r.negativity),
        negativity_non_increasing: rows
            .windows(2)
            .all(|w| w[1].negativity <= w[0].negativity + 1e-12),
        proxy_strictly_decreasing: rows
            .windows(2)
            .all(|w| w[1].proxy_fidelity < w[0].proxy_fidelity),
        rho_entangled: spearman_rho(&neg, &proxy).ok(),
    }
}

pub fn fig5_all(steps: usize) -> Result<Vec<(SweepChannel, Vec<SweepRow>)>, AnalysisError> {
    let mut out = Vec::new();
    for channel in [SweepChannel::Depolarizing, SweepChannel::thermal_default()] {
        for theta in SWEEP_THETAS {
            out.push((channel, fig5_sweep(theta, channel, steps)?));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Ranking consistency
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionOutcome {
    pub repetition: usize,
    /// Mean ρ against the oracle ranking; undefined coefficients count as 0.
    pub mean_rho: BTreeMap<MetricId, f64>,
    pub proxy_wins: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingSummary {
    pub repetitions: Vec<RepetitionOutcome>,
    pub wins: usize,
    pub mean_rho: BTreeMap<MetricId, f64>,
    #[serde(skip)]
    pub rankings: Vec<(usize, usize, RankingResult)>,
}

const RANKED: [MetricId; 4] = [
    MetricId::ProxyFidelity,
    MetricId::Esp,
    MetricId::Depth,
    MetricId::GateCount,
];

/// `ranking_circuits` random circuits × `layouts` routed implementations,
/// repeated `ranking_repetitions` times with fresh seeds.
pub fn ranking_experiment(
    cfg: &ExperimentConfig,
    cal: &Calibration,
) -> Result<RankingSummary, AnalysisError> {
    let jobs: Vec<(usize, usize)> = (0..cfg.ranking_repetitions)
        .flat_map(|r| (0..cfg.ranking_circuits).map(move |c| (r, c)))
        .collect();
    let options = EvalOptions {
        scope: QubitScope::All,
        template: cfg.oracle.template.clone(),
    };
    let results = parallel::try_map(cfg.mode, &jobs, |&(r, c)| {
        let seed = derive_seed(cfg.seed, STREAM_RANKING, (r * 1000 + c) as u64);
        let logical = gen_random_circuit(cfg.ranking_qubits, cfg.ranking_depth, seed)?;
        let impls = random_layouts(cfg.ranking_qubits, DEVICE_QUBITS, cfg.layouts, seed)
            .iter()
            .map(|l| route(&logical, cal, l))
            .collect::<Result<Vec<_>, _>>()?;
        let ids: Vec<String> = (0..impls.len())
            .map(|k| format!("r{r}_c{c}_l{k}"))
            .collect();
        let ranking = rank_layouts(
            &impls,
            Some(&ids),
            cal,
            &Reference::Oracle(cfg.oracle.clone()),
            &options,
            ExecMode::Sequential,
        )?;
        Ok::<_, AnalysisError>((r, c, ranking))
    })?;

    let mut repetitions = Vec::with_capacity(cfg.ranking_repetitions);
    for r in 0..cfg.ranking_repetitions {
        let group: Vec<&RankingResult> = results
            .iter()
            .filter(|(rr, _, _)| *rr == r)
            .map(|(_, _, x)| x)
            .collect();
        let mean_rho: BTreeMap<MetricId, f64> = RANKED
            .iter()
            .map(|&m| {
                (
                    m,
                    group.iter().map(|x| x.rho_or_zero(m)).sum::<f64>() / group.len().max(1) as f64,
                )
            })
            .collect();
        let proxy = mean_rho[&MetricId::ProxyFidelity];
        let proxy_wins = proxy + 1e-12 >= mean_rho[&MetricId::Esp]
            && proxy + 1e-12 >= mean_rho[&MetricId::Depth];
        repetitions.push(RepetitionOutcome {
            repetition: r,
            mean_rho,
            proxy_wins,
        });
    }
    let wins = repetitions.iter().filter(|r| r.proxy_wins).count();
    let mean_rho = RANKED
        .iter()
        .map(|&m| {
            let total: f64 = repetitions.iter().map(|r| r.mean_rho[&m]).sum();
            (m, total / repetitions.len().max(1) as f64)
        })
        .collect();
    Ok(RankingSummary {
        repetitions,
        wins,
        mean_rho,
        rankings: results,
    })
}

pub fn ranking_csv(summary: &RankingSummary) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["repetition", "circuit", "metric", "rho"])
        .expect("in-memory write");
    for (r, c, ranking) in &summary.rankings {
        for (m, rho) in &ranking.rho_vs_reference {
            wtr.write_record([
                r.to_string(),
                c.to_string(),
                m.as_str().to_string(),
                rho.map_or_else(|| "undefined".to_string(), |v| format!("{v:.12}")),
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(wtr.into_inner().expect("flush")).expect("utf8")
}

// ---------------------------------------------------------------------------
// Full run
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig5,
    Fig6a,
    Fig6b,
    Fig7,
    Fig8,
}

impl Figure {
    pub const ALL: [Figure; 5] = [
        Figure::Fig5,
        Figure::Fig6a,
        Figure::Fig6b,
        Figure::Fig7,
        Figure::Fig8,
    ];

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "fig5" => Self::Fig5,
            "fig6a" => Self::Fig6a,
            "fig6b" => Self::Fig6b,
            "fig7" => Self::Fig7,
            "fig8" => Self::Fig8,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub seed: u64,
    pub calibration: String,
    pub fig5: Option<Vec<SweepCheck>>,
    pub qubit_level: Option<AccuracyStats>,
    pub id_circuits: Option<AccuracyStats>,
    pub random_circuits: Option<AccuracyStats>,
    pub bv_circuits: Option<AccuracyStats>,
    pub ranking: Option<RankingSummary>,
}

/// Runs the selected figures and writes `fig*.csv` plus `summary.json`
/// into `out_dir`.
pub fn run_experiments(
    cfg: &ExperimentConfig,
    figures: &[Figure],
    out_dir: &Path,
) -> Result<Summary, AnalysisError> {
    fs::create_dir_all(out_dir)?;
    let cal = cfg.calibration();
    let mut summary = Summary {
        seed: cfg.seed,
        calibration: cal.snapshot_id.clone(),
        ..Summary::default()
    };
    if figures.contains(&Figure::Fig5) {
        let sweeps = fig5_all(cfg.sweep_steps)?;
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["channel", "theta", "param", "negativity", "proxy_fidelity"])
            .expect("in-memory write");
        let mut checks = Vec::new();
        for (channel, rows) in &sweeps {
            for r in rows {
                wtr.write_record([
                    channel.name().to_string(),
                    format!("{:.12}", r.theta),
                    format!("{:.2}", r.param),
                    format!("{:.12}", r.negativity),
                    format!("{:.12}", r.proxy_fidelity),
                ])
                .expect("in-memory write");
            }
            checks.push(check_sweep(channel.name(), rows));
        }
        fs::write(out_dir.join("fig5.csv"), wtr.into_inner().expect("flush"))?;
        summary.fig5 = Some(checks);
    }
    if figures.contains(&Figure::Fig6a) {
        let rows = qubit_level(cfg, &cal)?;
        fs::write(out_dir.join("fig6a.csv"), accuracy_csv(&rows))?;
        summary.qubit_level = Some(accuracy_stats(&rows)?);
    }
    if figures.contains(&Figure::Fig6b) {
        let rows = id_decay(cfg, &cal)?;
        fs::write(out_dir.join("fig6b.csv"), accuracy_csv(&rows))?;
        summary.id_circuits = Some(accuracy_stats(&rows)?);
    }
    if figures.contains(&Figure::Fig7) {
        let random = random_accuracy(cfg, &cal)?;
        let bv = bv_accuracy(cfg, &cal)?;
        summary.random_circuits = Some(accuracy_stats(&random)?);
        summary.bv_circuits = Some(accuracy_stats(&bv)?);
        let all: Vec<AccuracyRow> = random.into_iter().chain(bv).collect();
        fs::write(out_dir.join("fig7.csv"), accuracy_csv(&all))?;
    }
    if figures.contains(&Figure::Fig8) {
        let ranking = ranking_experiment(cfg, &cal)?;
        fs::write(out_dir.join("fig8.csv"), ranking_csv(&ranking))?;
        summary.ranking = Some(ranking);
    }
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(out_dir.join("summary.json"), json)?;
    Ok(summary)
}
