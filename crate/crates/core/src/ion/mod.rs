//! Trapped-ion realization: pulse planning from effective drive rates,
//! event-level emulation of the collective projection measurement, and the
//! readout-error correction.

mod detection;
mod emulate;
mod pulses;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use detection::{correct_population, corrected_p4, Correction, DetectionModel, FdmTable, TransferFidelity};
pub use emulate::{
    expected_record, measure_target, records_tsv, sampled_spectrum, target_stream, SampledSpectrum, ShotRecord,
    TargetEstimate,
};
pub use pulses::{plan_pulses, Pulse, PulseKind, PulseSchedule};

/// Correction results outside this range are flagged and clamped.
pub const OUT_OF_MODEL_RANGE: (f64, f64) = (-0.05, 1.05);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeviceConfig {
    /// Dimensionless displacement per us.
    pub rate_displacement: f64,
    /// Squeezing parameter per us.
    pub rate_squeeze: f64,
    /// rad per us.
    pub rate_rotation: f64,
    /// MHz
    pub trap_freq_x: f64,
    /// MHz
    pub trap_freq_y: f64,
    pub lamb_dicke_x: f64,
    pub lamb_dicke_y: f64,
    /// Probability that a bright ion is read as bright over the full readout.
    pub eta_up: f64,
    /// Probability that a dark ion is read as dark over the full readout.
    pub eta_down: f64,
    pub shots: u64,
    pub rng_seed: u64,
    /// Only Fock indices with ideal probability above this are measured.
    pub target_threshold: f64,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        DeviceConfig {
            rate_displacement: 0.066,
            rate_squeeze: 0.006,
            rate_rotation: 0.006,
            trap_freq_x: 2.4,
            trap_freq_y: 1.9,
            lamb_dicke_x: 0.117,
            lamb_dicke_y: 0.132,
            eta_up: 0.972,
            eta_down: 0.993,
            shots: 2000,
            rng_seed: 0,
            target_threshold: 1e-6,
        }
    }
}

impl DeviceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rate_displacement", self.rate_displacement),
            ("rate_squeeze", self.rate_squeeze),
            ("rate_rotation", self.rate_rotation),
            ("trap_freq_x", self.trap_freq_x),
            ("trap_freq_y", self.trap_freq_y),
            ("lamb_dicke_x", self.lamb_dicke_x),
            ("lamb_dicke_y", self.lamb_dicke_y),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        check_fidelity("eta_up", self.eta_up)?;
        check_fidelity("eta_down", self.eta_down)?;
        if self.shots == 0 {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        if !(self.target_threshold.is_finite() && self.target_threshold >= 0.0) {
            return Err(Error::Config(format!(
                "target_threshold must be non-negative, got {}",
                self.target_threshold
            )));
        }
        Ok(())
    }

    /// Trap frequency of a mode (0 = X, 1 = Y), MHz.
    pub fn trap_freq(&self, mode: usize) -> Option<f64> {
        match mode {
            0 => Some(self.trap_freq_x),
            1 => Some(self.trap_freq_y),
            _ => None,
        }
    }
}

pub(crate) fn check_fidelity(name: &str, v: f64) -> Result<()> {
    if v > 0.5 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in (0.5, 1], got {v}")))
    }
}

/// Axis label used in Raman frequency labels and table headers.
pub(crate) fn mode_name(mode: usize) -> String {
    match mode {
        0 => "X".into(),
        1 => "Y".into(),
        k => format!("{}", k + 1),
    }
}
