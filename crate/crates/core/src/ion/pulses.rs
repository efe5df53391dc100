use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{mode_name, DeviceConfig};
use crate::doktorov::{DoktorovSequence, Stage, SQUEEZE_GUARD};
use crate::error::{Error, Result};
use crate::fock::GaussianOp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    Displace,
    Squeeze,
    Rotate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub stage: Stage,
    pub kind: PulseKind,
    /// Raman beat-note label: `wX`, `2wY`, `wX-wY`.
    pub label: String,
    /// Raman beat-note frequency, MHz.
    pub beat_mhz: f64,
    pub modes: Vec<usize>,
    /// Signed operator parameter (`|delta|`, `zeta` or `theta`).
    pub parameter: f64,
    /// us
    pub duration: f64,
    /// rad, in [0, 2 pi)
    pub phase: f64,
    pub warning: Option<String>,
}

impl Pulse {
    pub fn is_zero(&self) -> bool {
        self.duration == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub pulses: Vec<Pulse>,
}

impl PulseSchedule {
    /// Same schedule with zero-duration pulses removed.
    pub fn without_zero(&self) -> Self {
        PulseSchedule {
            pulses: self.pulses.iter().filter(|p| !p.is_zero()).cloned().collect(),
        }
    }

    pub fn total_duration(&self) -> f64 {
        self.pulses.iter().map(|p| p.duration).sum()
    }

    pub fn warnings(&self) -> impl Iterator<Item = &str> {
        self.pulses.iter().filter_map(|p| p.warning.as_deref())
    }

    /// Columns `stage, kind, label, beat_mhz, modes, parameter, duration_us, phase_rad, warning`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("stage\tkind\tlabel\tbeat_mhz\tmodes\tparameter\tduration_us\tphase_rad\twarning\n");
        for p in &self.pulses {
            let modes: Vec<String> = p.modes.iter().map(|&m| mode_name(m)).collect();
            let kind = match p.kind {
                PulseKind::Displace => "displace",
                PulseKind::Squeeze => "squeeze",
                PulseKind::Rotate => "rotate",
            };
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                p.stage,
                kind,
                p.label,
                p.beat_mhz,
                modes.join(","),
                p.parameter,
                p.duration,
                p.phase,
                p.warning.as_deref().unwrap_or("")
            );
        }
        out
    }
}

/// Splits a signed amplitude into magnitude and phase, folding a negative
/// sign into an extra `pi`.
fn magnitude_phase(value: f64, phase: f64) -> (f64, f64) {
    let phase = if value < 0.0 { phase + PI } else { phase };
    (value.abs(), phase.rem_euclid(TAU))
}

/// One pulse per operator, in application order.
pub fn plan_pulses(seq: &DoktorovSequence, cfg: &DeviceConfig) -> Result<PulseSchedule> {
    cfg.validate()?;
    let freq = |mode: usize| {
        cfg.trap_freq(mode)
            .ok_or_else(|| Error::UnsupportedDimension { nmodes: mode + 1 })
    };
    let mut pulses = Vec::with_capacity(seq.staged.len());
    for staged in &seq.staged {
        let pulse = match staged.op {
            GaussianOp::Displace { mode, delta } => {
                let (amp, phase) = delta.to_polar();
                Pulse {
                    stage: staged.stage,
                    kind: PulseKind::Displace,
                    label: format!("w{}", mode_name(mode)),
                    beat_mhz: freq(mode)?,
                    modes: vec![mode],
                    parameter: amp,
                    duration: amp / cfg.rate_displacement,
                    phase: if amp == 0.0 { 0.0 } else { phase.rem_euclid(TAU) },
                    warning: None,
                }
            }
            GaussianOp::Squeeze { mode, zeta, phase } => {
                let (amp, phase) = magnitude_phase(zeta, phase);
                Pulse {
                    stage: staged.stage,
                    kind: PulseKind::Squeeze,
                    label: format!("2w{}", mode_name(mode)),
                    beat_mhz: 2.0 * freq(mode)?,
                    modes: vec![mode],
                    parameter: zeta,
                    duration: amp / cfg.rate_squeeze,
                    phase,
                    warning: (amp > SQUEEZE_GUARD)
                        .then(|| format!("|zeta| = {amp:.3} exceeds device range {SQUEEZE_GUARD}")),
                }
            }
            GaussianOp::Rotate {
                mode_i,
                mode_j,
                theta,
                phase,
            } => {
                let (amp, phase) = magnitude_phase(theta, phase);
                Pulse {
                    stage: staged.stage,
                    kind: PulseKind::Rotate,
                    label: format!("w{}-w{}", mode_name(mode_i), mode_name(mode_j)),
                    beat_mhz: freq(mode_i)? - freq(mode_j)?,
                    modes: vec![mode_i, mode_j],
                    parameter: theta,
                    duration: amp / cfg.rate_rotation,
                    phase,
                    warning: None,
                }
            }
        };
        pulses.push(pulse);
    }
    Ok(PulseSchedule { pulses })
}
