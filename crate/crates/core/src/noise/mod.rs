//! Depolarizing noise emulated by Pauli trajectories on the state-vector
//! backend, shot-sampled estimators, and mitigation by the trivial-point
//! calibration run.

mod mitigation;
mod trajectory;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::BackendError;

pub use mitigation::{contaminate, effective_volume, estimate_f, mitigate, DEFAULT_UNDERFLOW_FLOOR};
pub use trajectory::{run_noisy, shot_estimates, NoisyRun, TrajectoryOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("probability {name} = {value} is outside [0, 1)")]
    Probability { name: &'static str, value: f64 },
    #[error("series cover different step grids ({0} vs {1} steps)")]
    GridMismatch(usize, usize),
    #[error("expected a {expected:?} series, got {found:?}")]
    WrongChannel { expected: Channel, found: Channel },
    #[error("effective volume needs 0 < f < 1 and 0 < p < 1 (f = {f}, p = {p})")]
    Domain { f: f64, p: f64 },
    #[error("mitigation needs every qubit of the measured set to start in the same state")]
    MixedInitialSigns,
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// Per-gate depolarizing probabilities and readout flip probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    pub p_two_qubit: f64,
    pub p_single_qubit: f64,
    pub p_readout: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { p_two_qubit: 4e-3, p_single_qubit: 4e-4, p_readout: 1.7e-2 }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self { p_two_qubit: 0.0, p_single_qubit: 0.0, p_readout: 0.0 }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        for (name, value) in [
            ("p_two_qubit", self.p_two_qubit),
            ("p_single_qubit", self.p_single_qubit),
            ("p_readout", self.p_readout),
        ] {
            if !(0.0..1.0).contains(&value) {
                return Err(NoiseError::Probability { name, value });
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.p_two_qubit == 0.0 && self.p_single_qubit == 0.0 && self.p_readout == 0.0
    }

    /// Gate noise only: no Pauli insertions happen when both are zero.
    pub fn has_gate_noise(&self) -> bool {
        self.p_two_qubit > 0.0 || self.p_single_qubit > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Raw,
    Calibration,
    Mitigated,
}

/// Per-step estimates of the averaged magnetisation.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedSeries {
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// Steps whose value is not reliable (calibration underflow).
    pub flags: Vec<bool>,
    pub n_shots: usize,
    pub channel: Channel,
}

impl EstimatedSeries {
    pub fn new(values: Vec<f64>, stderrs: Vec<f64>, n_shots: usize, channel: Channel) -> Self {
        assert_eq!(values.len(), stderrs.len());
        let flags = vec![false; values.len()];
        Self { values, stderrs, flags, n_shots, channel }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_channel(mut self, channel: Channel) -> Self {
        self.channel = channel;
        self
    }
}
