//! Stick spectra from Fock probabilities, Gaussian broadening, and
//! stick-by-stick comparison.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockIndex, TruncatedState};

pub const DEFAULT_MERGE_TOL: f64 = 1e-6;
/// Sticks weaker than this are left out of the output.
pub const DROP_BELOW: f64 = 1e-12;
/// Half-range of a broadened grid beyond the outermost sticks, in widths.
pub const GRID_COVERAGE: f64 = 5.0;

const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stick {
    /// cm^-1
    pub frequency: f64,
    pub intensity: f64,
    pub assignments: Vec<FockIndex>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StickSpectrum {
    /// Ascending in frequency.
    pub sticks: Vec<Stick>,
    /// cm^-1
    pub offset: f64,
    /// Total intensity of sticks removed for falling below [`DROP_BELOW`].
    pub dropped_intensity: f64,
}

impl StickSpectrum {
    /// Builds a spectrum from individual lines, merging those closer than
    /// `merge_tol` (chained) at their intensity-weighted mean frequency.
    pub fn from_lines(lines: Vec<Stick>, offset: f64, merge_tol: f64) -> Result<Self> {
        if !(merge_tol.is_finite() && merge_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "merge tolerance must be non-negative, got {merge_tol}"
            )));
        }
        if let Some(s) = lines.iter().find(|s| !(s.frequency.is_finite() && s.intensity.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "non-finite stick at {} with intensity {}",
                s.frequency, s.intensity
            )));
        }
        let mut lines = lines;
        lines.sort_by(|a, b| {
            a.frequency
                .total_cmp(&b.frequency)
                .then_with(|| a.assignments.cmp(&b.assignments))
        });

        let mut groups: Vec<Vec<Stick>> = Vec::new();
        for line in lines {
            match groups.last_mut() {
                Some(g) if line.frequency - g.last().unwrap().frequency <= merge_tol => g.push(line),
                _ => groups.push(vec![line]),
            }
        }

        let mut sticks = Vec::with_capacity(groups.len());
        let mut dropped = 0.0;
        for group in groups {
            let stick = merge_group(group);
            if stick.intensity < DROP_BELOW {
                dropped += stick.intensity;
            } else {
                sticks.push(stick);
            }
        }
        Ok(StickSpectrum {
            sticks,
            offset,
            dropped_intensity: dropped,
        })
    }

    /// Re-applies merging at `merge_tol`.
    pub fn merged(&self, merge_tol: f64) -> Result<Self> {
        let mut out = Self::from_lines(self.sticks.clone(), self.offset, merge_tol)?;
        out.dropped_intensity += self.dropped_intensity;
        Ok(out)
    }

    /// Incoherent sum of two spectra.
    pub fn combined(&self, other: &Self, merge_tol: f64) -> Result<Self> {
        let lines = self.sticks.iter().chain(&other.sticks).cloned().collect();
        let mut out = Self::from_lines(lines, self.offset, merge_tol)?;
        out.dropped_intensity += self.dropped_intensity + other.dropped_intensity;
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.sticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sticks.is_empty()
    }

    /// Sum of the listed stick intensities.
    pub fn total_intensity(&self) -> f64 {
        self.sticks.iter().map(|s| s.intensity).sum()
    }

    pub fn max_intensity(&self) -> f64 {
        self.sticks.iter().map(|s| s.intensity).fold(0.0, f64::max)
    }

    /// The stick nearest to `frequency` within `tol`.
    pub fn find(&self, frequency: f64, tol: f64) -> Option<&Stick> {
        self.sticks
            .iter()
            .filter(|s| (s.frequency - frequency).abs() <= tol)
            .min_by(|a, b| (a.frequency - frequency).abs().total_cmp(&(b.frequency - frequency).abs()))
    }

    /// Tab-separated table with columns
    /// `frequency_cm1, intensity, intensity_max_norm, assignment`.
    pub fn to_tsv(&self) -> String {
        let max = self.max_intensity();
        let mut out = String::from("frequency_cm1\tintensity\tintensity_max_norm\tassignment\n");
        for s in &self.sticks {
            let norm = if max > 0.0 { s.intensity / max } else { 0.0 };
            let labels: Vec<String> = s.assignments.iter().map(|a| a.to_string()).collect();
            let _ = writeln!(out, "{}\t{}\t{}\t{}", s.frequency, s.intensity, norm, labels.join(";"));
        }
        out
    }
}

fn merge_group(mut group: Vec<Stick>) -> Stick {
    if group.len() == 1 {
        return group.pop().unwrap();
    }
    let intensity: f64 = group.iter().map(|s| s.intensity).sum();
    let frequency = if intensity > 0.0 {
        group.iter().map(|s| s.frequency * s.intensity).sum::<f64>() / intensity
    } else {
        group.iter().map(|s| s.frequency).sum::<f64>() / group.len() as f64
    };
    let assignments = group.into_iter().flat_map(|s| s.assignments).collect();
    Stick {
        frequency,
        intensity,
        assignments,
    }
}

/// One stick per Fock index with non-zero probability, at
/// `offset + sum_k m_k omega'_k`.
pub fn stick_spectrum(
    state: &TruncatedState,
    omega_final: &[f64],
    offset: f64,
    merge_tol: f64,
) -> Result<StickSpectrum> {
    if omega_final.len() != state.nmodes() {
        return Err(Error::InvalidDimension(format!(
            "state has {} modes but {} final frequencies were given",
            state.nmodes(),
            omega_final.len()
        )));
    }
    let lines = state
        .probabilities()
        .filter(|&(_, p)| p > 0.0)
        .map(|(idx, p)| Stick {
            frequency: transition_frequency(&idx, omega_final, offset),
            intensity: p,
            assignments: vec![idx],
        })
        .collect();
    StickSpectrum::from_lines(lines, offset, merge_tol)
}

pub fn transition_frequency(idx: &FockIndex, omega_final: &[f64], offset: f64) -> f64 {
    offset
        + idx
            .occupations()
            .iter()
            .zip(omega_final)
            .map(|(&m, &w)| m as f64 * w)
            .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthKind {
    #[default]
    Fwhm,
    Stddev,
}

impl WidthKind {
    pub fn sigma(self, width: f64) -> f64 {
        match self {
            WidthKind::Fwhm => width / FWHM_PER_SIGMA,
            WidthKind::Stddev => width,
        }
    }
}

impl std::str::FromStr for WidthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fwhm" => Ok(WidthKind::Fwhm),
            "stddev" | "sigma" => Ok(WidthKind::Stddev),
            other => Err(Error::Config(format!("unknown width kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BroadenedCurve {
    /// cm^-1, uniformly spaced.
    pub grid: Vec<f64>,
    /// Intensity density per cm^-1.
    pub values: Vec<f64>,
    pub width: f64,
    pub width_kind: WidthKind,
}

impl BroadenedCurve {
    /// Rectangle-rule integral over the grid.
    pub fn integral(&self) -> f64 {
        if self.grid.len() < 2 {
            return 0.0;
        }
        let step = self.grid[1] - self.grid[0];
        self.values.iter().sum::<f64>() * step
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("frequency_cm1\tintensity\n");
        for (x, y) in self.grid.iter().zip(&self.values) {
            let _ = writeln!(out, "{x}\t{y}");
        }
        out
    }
}

fn check_width(width: f64) -> Result<()> {
    if width.is_finite() && width > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("width must be positive, got {width}")))
    }
}

/// Sum of area-normalized Gaussians on a grid of multiples of `grid_step`
/// spanning the sticks plus [`GRID_COVERAGE`] widths on each side.
pub fn broaden(sticks: &StickSpectrum, width: f64, width_kind: WidthKind, grid_step: f64) -> Result<BroadenedCurve> {
    check_width(width)?;
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    let (lo, hi) = if sticks.is_empty() {
        (sticks.offset, sticks.offset)
    } else {
        (sticks.sticks[0].frequency, sticks.sticks[sticks.len() - 1].frequency)
    };
    let margin = GRID_COVERAGE * width.max(width_kind.sigma(width));
    let first = ((lo - margin) / grid_step).floor() as i64;
    let last = ((hi + margin) / grid_step).ceil() as i64;
    let grid: Vec<f64> = (first..=last).map(|k| k as f64 * grid_step).collect();
    broaden_on_grid(sticks, width, width_kind, &grid)
}

/// Evaluates the broadened spectrum on caller-supplied points.
pub fn broaden_on_grid(
    sticks: &StickSpectrum,
    width: f64,
    width_kind: WidthKind,
    grid: &[f64],
) -> Result<BroadenedCurve> {
    check_width(width)?;
    let sigma = width_kind.sigma(width);
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let values = grid
        .iter()
        .map(|&x| {
            sticks
                .sticks
                .iter()
                .map(|s| {
                    let z = (x - s.frequency) / sigma;
                    s.intensity * norm * (-0.5 * z * z).exp()
                })
                .sum()
        })
        .collect();
    Ok(BroadenedCurve {
        grid: grid.to_vec(),
        values,
        width,
        width_kind,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StickMatch {
    pub frequency_a: f64,
    pub frequency_b: f64,
    pub intensity_a: f64,
    pub intensity_b: f64,
    /// `|intensity_a - intensity_b|`
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// Ordered by `frequency_a`.
    pub matched: Vec<StickMatch>,
    /// Largest deviation over matched sticks and unmatched stick intensities.
    pub max_deviation: f64,
    pub unmatched_mass_a: f64,
    pub unmatched_mass_b: f64,
}

/// Greedy nearest-frequency matching of sticks within `freq_tol`.
pub fn compare_spectra(a: &StickSpectrum, b: &StickSpectrum, freq_tol: f64) -> ComparisonReport {
    let mut pairs = Vec::new();
    for (i, sa) in a.sticks.iter().enumerate() {
        for (j, sb) in b.sticks.iter().enumerate() {
            let d = (sa.frequency - sb.frequency).abs();
            if d <= freq_tol {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut matched = Vec::new();
    for (_, i, j) in pairs {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        let (sa, sb) = (&a.sticks[i], &b.sticks[j]);
        matched.push(StickMatch {
            frequency_a: sa.frequency,
            frequency_b: sb.frequency,
            intensity_a: sa.intensity,
            intensity_b: sb.intensity,
            deviation: (sa.intensity - sb.intensity).abs(),
        });
    }
    matched.sort_by(|x, y| x.frequency_a.total_cmp(&y.frequency_a));

    let unmatched = |sticks: &[Stick], used: &[bool]| -> (f64, f64) {
        sticks
            .iter()
            .zip(used)
            .filter(|(_, &u)| !u)
            .fold((0.0, 0.0), |(sum, max), (s, _)| (sum + s.intensity, f64::max(max, s.intensity)))
    };
    let (mass_a, max_a) = unmatched(&a.sticks, &used_a);
    let (mass_b, max_b) = unmatched(&b.sticks, &used_b);
    let max_deviation = matched
        .iter()
        .map(|m| m.deviation)
        .fold(max_a.max(max_b), f64::max);
    ComparisonReport {
        matched,
        max_deviation,
        unmatched_mass_a: mass_a,
        unmatched_mass_b: mass_b,
    }
}
