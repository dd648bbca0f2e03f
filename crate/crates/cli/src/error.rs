use std::process::ExitCode;

use thiserror::Error;

use npcfid::analysis::AnalysisError;
use npcfid::calibration::CalibrationError;
use npcfid::npc::NpcError;
use npcfid::oracle::OracleError;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable input, parse or schema failure, bad arguments.
    #[error("{0}")]
    Input(String),
    /// The circuit cannot be parameterized by the calibration.
    #[error("validation failed:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("circuit needs {qubits} simulated qubits, oracle cap is {cap}")]
    TooLarge { qubits: usize, cap: usize },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Input(_) => 1,
            Self::Validation(_) => 2,
            Self::Internal(_) => 3,
            Self::TooLarge { .. } => 4,
        })
    }

    pub fn input(context: &str, err: impl std::fmt::Display) -> Self {
        Self::Input(format!("{context}: {err}"))
    }
}

impl From<CalibrationError> for CliError {
    fn from(err: CalibrationError) -> Self {
        match err {
            CalibrationError::MissingGateCal { .. } => Self::Validation(vec![err.to_string()]),
            CalibrationError::Domain(_) => Self::Internal(err.to_string()),
            _ => Self::Input(err.to_string()),
        }
    }
}

impl From<NpcError> for CliError {
    fn from(err: NpcError) -> Self {
        match err {
            NpcError::MissingGateCal { .. } | NpcError::MissingReadoutCal(_) => {
                Self::Validation(vec![err.to_string()])
            }
            NpcError::InvalidCircuit(_) => Self::Input(err.to_string()),
            NpcError::Domain(_) => Self::Internal(err.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(err: OracleError) -> Self {
        match err {
            OracleError::TooLarge { qubits, cap } => Self::TooLarge { qubits, cap },
            OracleError::MissingGateCal { .. } | OracleError::MissingReadoutCal(_) => {
                Self::Validation(vec![err.to_string()])
            }
            OracleError::UnknownUnitary(_) => Self::Validation(vec![err.to_string()]),
            OracleError::InvalidCircuit(_) => Self::Input(err.to_string()),
            _ => Self::Internal(err.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(err: AnalysisError) -> Self {
        match err {
            AnalysisError::Npc(e) => e.into(),
            AnalysisError::Oracle(e) => e.into(),
            AnalysisError::Calibration(e) => e.into(),
            AnalysisError::Circuit(e) => Self::Input(e.to_string()),
            AnalysisError::Domain(msg) => Self::Input(msg),
            AnalysisError::Io(e) => Self::Internal(e.to_string()),
            AnalysisError::Stats(e) => Self::Internal(e.to_string()),
        }
    }
}
