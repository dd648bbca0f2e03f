//! Noise Proxy Circuits: a calibration-driven fidelity estimator for
//! compiled quantum circuits, with a density-matrix reference simulator,
//! baseline metrics and the analysis tooling used to compare them.

pub mod analysis;
pub mod calibration;
pub mod circuit;
pub mod metrics;
pub mod npc;
pub mod oracle;
pub mod parallel;
