//! Statistics, benchmark generators and experiment drivers comparing the
//! proxy against the oracle at desk scale.

pub mod device;
pub mod experiments;
pub mod generators;
pub mod ranking;
pub mod stats;
pub mod sweep;

use thiserror::Error;

use crate::calibration::CalibrationError;
use crate::circuit::CircuitError;
use crate::npc::NpcError;
use crate::oracle::OracleError;

pub use device::{
    device_edges, noiseless_calibration, random_layouts, route, synthetic_calibration,
    DEVICE_QUBITS,
};
pub use generators::{
    bv_secrets, gen_bv_circuit, gen_ghz_circuit, gen_id_circuit, gen_random_circuit,
};
pub use ranking::{rank_layouts, RankingResult, Reference};
pub use stats::{
    aad_r2, average_ranks, linear_fit, ordinal_ranks_desc, spearman_rho, AccuracyResult, StatsError,
};
pub use sweep::{fig5_sweep, sweep_csv, SweepChannel, SweepRow};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Npc(#[from] NpcError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
