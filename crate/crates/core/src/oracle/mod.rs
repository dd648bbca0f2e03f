//! Dense density-matrix reference simulator.
//!
//! Used only as ground truth for small circuits (default cap of 8 active
//! qubits). Each op is applied as its ideal unitary, then depolarizing noise
//! on its qubits, then per-qubit thermal relaxation, using the same channel
//! parameters the NPC records.

mod density;
mod distribution;
pub mod gates;
mod random;
mod sim;

use thiserror::Error;

use crate::calibration::CalibrationError;
use crate::circuit::CircuitError;

pub use density::{
    depolarizing_kraus, fidelity_with_pure, negativity, qubit_state_fidelity, state_fidelity,
    thermal_kraus, trace_inner, BlochVector, DensityMatrix,
};
pub use distribution::{hellinger, parse_bitstring, success_probability, Distribution};
pub use random::{haar_average, random_density_matrix, random_pure_state, sample_rng};
pub use sim::{
    logical_state_fidelity, per_bit_fidelity, per_qubit_state_fidelity, simulate_ideal,
    simulate_noisy, IdealRun, NoisyRun, OracleConfig, DEFAULT_CAP,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("no unitary for gate {0}")]
    UnknownUnitary(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("circuit touches {qubits} qubits, above the oracle cap of {cap}")]
    TooLarge { qubits: usize, cap: usize },
    #[error("no calibration for gate {name} on qubits {qubits:?}")]
    MissingGateCal { name: String, qubits: Vec<usize> },
    #[error("no readout calibration for physical qubit {0}")]
    MissingReadoutCal(usize),
    #[error(transparent)]
    InvalidCircuit(#[from] CircuitError),
}

impl From<CalibrationError> for OracleError {
    fn from(err: CalibrationError) -> Self {
        match err {
            CalibrationError::MissingGateCal { name, qubits } => {
                Self::MissingGateCal { name, qubits }
            }
            other => Self::Domain(other.to_string()),
        }
    }
}
