//! Event-level emulation of the collective projection measurement.
//!
//! A shot transfers the target population to the dark state with
//! probability `p F_D.M`; otherwise the ion stays bright. Three fluorescence
//! windows follow, and the shot is classified by the first window that reads
//! bright (`B**`, `DB*`, `DDB`) or as `DDD`. Per-window read fidelities are
//! chosen so that a dark ion yields `DDD` with probability `eta_down` and a
//! bright ion with probability `1 - eta_up`, which makes the correction
//! formula an exact inverse.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{corrected_p4, mode_name, DetectionModel, DeviceConfig};
use crate::error::{Error, Result};
use crate::fock::{FockIndex, TruncatedState};
use crate::spectrum::{transition_frequency, Stick, StickSpectrum, DEFAULT_MERGE_TOL};

/// Frequencies of the event classes `{B**, DB*, DDB, DDD}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    pub counts: [u64; 4],
    pub shots: u64,
}

impl ShotRecord {
    pub fn from_counts(counts: [u64; 4]) -> Result<Self> {
        let shots: u64 = counts.iter().sum();
        if shots == 0 {
            return Err(Error::InvalidParameter("shot record needs at least one shot".into()));
        }
        let n = shots as f64;
        Ok(ShotRecord {
            p1: counts[0] as f64 / n,
            p2: counts[1] as f64 / n,
            p3: counts[2] as f64 / n,
            p4: counts[3] as f64 / n,
            counts,
            shots,
        })
    }
}

fn window_fidelities(model: &DetectionModel) -> (f64, f64) {
    let dark = model.eta_down.cbrt();
    let bright = 1.0 - (1.0 - model.eta_up).cbrt();
    (dark, bright)
}

fn hit(rng: &mut ChaCha8Rng, p: f64) -> bool {
    if p >= 1.0 {
        true
    } else if p <= 0.0 {
        false
    } else {
        rng.gen::<f64>() < p
    }
}

/// RNG stream for a target, independent of cutoffs and iteration order.
pub fn target_stream(target: &FockIndex) -> u64 {
    // FNV-1a over the occupation numbers
    target
        .occupations()
        .iter()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, &m| {
            (h ^ (m as u64).wrapping_add(1)).wrapping_mul(0x0100_0000_01b3)
        })
}

fn simulate(p: f64, f_dm: f64, model: &DetectionModel, shots: u64, rng: &mut ChaCha8Rng) -> Result<ShotRecord> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let q = (p * f_dm).clamp(0.0, 1.0);
    let (dark_w, bright_w) = window_fidelities(model);
    let mut counts = [0u64; 4];
    for _ in 0..shots {
        let dark = hit(rng, q);
        let mut class = 3;
        for window in 0..3 {
            let reads_bright = if dark { !hit(rng, dark_w) } else { hit(rng, bright_w) };
            if reads_bright {
                class = window;
                break;
            }
        }
        counts[class] += 1;
    }
    ShotRecord::from_counts(counts)
}

/// Emulates `shots` repetitions of the projection measurement on `target`.
pub fn measure_target(
    state: &TruncatedState,
    target: &FockIndex,
    model: &DetectionModel,
    shots: u64,
    seed: u64,
) -> Result<ShotRecord> {
    let p = state.probability(target)?;
    let f = model.f_dm(target)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(target_stream(target));
    simulate(p, f, model, shots, &mut rng)
}

/// Class probabilities `[P1, P2, P3, P4]` of the forward model.
pub fn expected_record(p: f64, f_dm: f64, model: &DetectionModel) -> [f64; 4] {
    let q = p * f_dm;
    let (dark_w, bright_w) = window_fidelities(model);
    let miss = 1.0 - dark_w;
    let dark = [miss, dark_w * miss, dark_w * dark_w * miss, model.eta_down];
    let stay = 1.0 - bright_w;
    let bright = [bright_w, stay * bright_w, stay * stay * bright_w, 1.0 - model.eta_up];
    std::array::from_fn(|k| q * dark[k] + (1.0 - q) * bright[k])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEstimate {
    pub index: FockIndex,
    /// cm^-1
    pub frequency: f64,
    pub ideal: f64,
    pub record: ShotRecord,
    pub p4_corrected: f64,
    /// Binomial standard error of `p4_corrected` from the measured `P4`.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSpectrum {
    pub targets: Vec<TargetEstimate>,
    /// Sticks from the uncorrected `P4`.
    pub raw: StickSpectrum,
    /// Sticks from the corrected estimates, clamped to [0, 1].
    pub corrected: StickSpectrum,
}

/// Measures every Fock index whose ideal probability exceeds
/// `cfg.target_threshold`, each on its own RNG stream.
pub fn sampled_spectrum(
    state: &TruncatedState,
    omega_final: &[f64],
    offset: f64,
    model: &DetectionModel,
    cfg: &DeviceConfig,
) -> Result<SampledSpectrum> {
    cfg.validate()?;
    if omega_final.len() != state.nmodes() {
        return Err(Error::InvalidDimension(format!(
            "state has {} modes but {} final frequencies were given",
            state.nmodes(),
            omega_final.len()
        )));
    }
    let n = cfg.shots as f64;
    let contrast = model.contrast();
    let mut targets = Vec::new();
    for (index, ideal) in state.probabilities() {
        if ideal <= cfg.target_threshold {
            continue;
        }
        let f = model.f_dm(&index)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        rng.set_stream(target_stream(&index));
        let record = simulate(ideal, f, model, cfg.shots, &mut rng)?;
        let p4_corrected = corrected_p4(&record, model, &index)?;
        let stderr = (record.p4 * (1.0 - record.p4) / n).sqrt() / (contrast * f);
        targets.push(TargetEstimate {
            frequency: transition_frequency(&index, omega_final, offset),
            index,
            ideal,
            record,
            p4_corrected,
            stderr,
        });
    }
    let sticks = |value: &dyn Fn(&TargetEstimate) -> f64| -> Result<StickSpectrum> {
        let lines = targets
            .iter()
            .map(|t| Stick {
                frequency: t.frequency,
                intensity: value(t),
                assignments: vec![t.index.clone()],
            })
            .collect();
        StickSpectrum::from_lines(lines, offset, DEFAULT_MERGE_TOL)
    };
    let raw = sticks(&|t| t.record.p4)?;
    let corrected = sticks(&|t| t.p4_corrected.clamp(0.0, 1.0))?;
    Ok(SampledSpectrum {
        targets,
        raw,
        corrected,
    })
}

/// Columns `nX, nY, P1, P2, P3, P4, P4_corrected, stderr`.
pub fn records_tsv(targets: &[TargetEstimate]) -> String {
    let nmodes = targets.first().map_or(2, |t| t.index.nmodes());
    let mut out = String::new();
    for k in 0..nmodes {
        let _ = write!(out, "n{}\t", mode_name(k));
    }
    out.push_str("P1\tP2\tP3\tP4\tP4_corrected\tstderr\n");
    for t in targets {
        for m in t.index.occupations() {
            let _ = write!(out, "{m}\t");
        }
        let r = &t.record;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.p1, r.p2, r.p3, r.p4, t.p4_corrected, t.stderr
        );
    }
    out
}
