use nalgebra::DMatrix;
use num_complex::Complex64;

use super::operators::{displacement_matrix, rotation_block, squeeze_matrix};
use super::{FockIndex, GaussianOp};
use crate::error::{Error, Result};

/// Slack allowed above unit norm from floating-point round-off.
pub const NORM_EPS: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Complex amplitudes over the product basis `prod_k {0, .., cutoff_k - 1}`,
/// stored row-major with the last mode varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedState {
    cutoffs: Vec<usize>,
    amplitudes: Vec<Complex64>,
    norm_sq: f64,
}

/// `|0, .., 0>` with the given per-mode cutoffs.
pub fn new_vacuum(nmodes: usize, cutoffs: &[usize]) -> Result<TruncatedState> {
    if cutoffs.len() != nmodes {
        return Err(Error::InvalidDimension(format!(
            "{nmodes} modes but {} cutoffs",
            cutoffs.len()
        )));
    }
    TruncatedState::vacuum(cutoffs)
}

impl TruncatedState {
    pub fn vacuum(cutoffs: &[usize]) -> Result<Self> {
        Self::basis(cutoffs, &FockIndex(vec![0; cutoffs.len()]))
    }

    /// The Fock state `|idx>`.
    pub fn basis(cutoffs: &[usize], idx: &FockIndex) -> Result<Self> {
        check_cutoffs(cutoffs)?;
        let mut amplitudes = vec![ZERO; cutoffs.iter().product()];
        let flat = flat_index(cutoffs, idx)?;
        amplitudes[flat] = Complex64::new(1.0, 0.0);
        Ok(Self {
            cutoffs: cutoffs.to_vec(),
            amplitudes,
            norm_sq: 1.0,
        })
    }

    pub fn from_amplitudes(cutoffs: &[usize], amplitudes: Vec<Complex64>) -> Result<Self> {
        check_cutoffs(cutoffs)?;
        let expected: usize = cutoffs.iter().product();
        if amplitudes.len() != expected {
            return Err(Error::InvalidDimension(format!(
                "{} amplitudes for cutoffs {cutoffs:?} (expected {expected})",
                amplitudes.len()
            )));
        }
        if !amplitudes.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite amplitude".into()));
        }
        let norm_sq = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>();
        if norm_sq > 1.0 + NORM_EPS {
            return Err(Error::InvalidParameter(format!(
                "state norm^2 {norm_sq} exceeds 1"
            )));
        }
        Ok(Self {
            cutoffs: cutoffs.to_vec(),
            amplitudes,
            norm_sq,
        })
    }

    pub fn nmodes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn amplitude(&self, idx: &FockIndex) -> Result<Complex64> {
        Ok(self.amplitudes[flat_index(&self.cutoffs, idx)?])
    }

    /// `|<idx|psi>|^2`.
    pub fn probability(&self, idx: &FockIndex) -> Result<f64> {
        self.amplitude(idx).map(|a| a.norm_sqr())
    }

    /// Probability mass lost to truncation, `1 - norm^2` clamped at zero.
    pub fn leakage(&self) -> f64 {
        (1.0 - self.norm_sq).max(0.0)
    }

    /// Iterates `(index, probability)` over the whole basis in storage order.
    pub fn probabilities(&self) -> impl Iterator<Item = (FockIndex, f64)> + '_ {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(flat, a)| (unflatten(&self.cutoffs, flat), a.norm_sqr()))
    }

    /// Marginal occupation distribution of one mode.
    pub fn marginal(&self, mode: usize) -> Result<Vec<f64>> {
        self.check_mode(mode)?;
        let mut out = vec![0.0; self.cutoffs[mode]];
        let (_, dim, inner) = self.split(mode);
        for (flat, a) in self.amplitudes.iter().enumerate() {
            out[(flat / inner) % dim] += a.norm_sqr();
        }
        Ok(out)
    }

    /// Distribution of the total phonon number `sum_k m_k`.
    pub fn total_number_distribution(&self) -> Vec<f64> {
        let max_total: usize = self.cutoffs.iter().map(|c| c - 1).sum();
        let mut out = vec![0.0; max_total + 1];
        for (idx, p) in self.probabilities() {
            out[idx.total()] += p;
        }
        out
    }

    pub fn apply(&self, op: &GaussianOp) -> Result<Self> {
        op.validate(self.nmodes())?;
        if op.is_identity() {
            return Ok(self.clone());
        }
        match *op {
            GaussianOp::Displace { mode, delta } => {
                let m = displacement_matrix(delta, self.cutoffs[mode])?;
                Ok(self.apply_mode_matrix(mode, &m))
            }
            GaussianOp::Squeeze { mode, zeta, phase } => {
                let m = squeeze_matrix(zeta, phase, self.cutoffs[mode])?;
                Ok(self.apply_mode_matrix(mode, &m))
            }
            GaussianOp::Rotate {
                mode_i,
                mode_j,
                theta,
                phase,
            } => self.apply_rotation_blocks(mode_i, mode_j, theta, phase),
        }
    }

    pub fn apply_all<'a>(&self, ops: impl IntoIterator<Item = &'a GaussianOp>) -> Result<Self> {
        let mut state = self.clone();
        for op in ops {
            state = state.apply(op)?;
        }
        Ok(state)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.nmodes() {
            return Err(Error::ModeOutOfRange {
                mode,
                nmodes: self.nmodes(),
            });
        }
        Ok(())
    }

    /// (outer count, mode dimension, inner stride) for a mode.
    fn split(&self, mode: usize) -> (usize, usize, usize) {
        let inner: usize = self.cutoffs[mode + 1..].iter().product();
        let outer: usize = self.cutoffs[..mode].iter().product();
        (outer, self.cutoffs[mode], inner)
    }

    fn stride(&self, mode: usize) -> usize {
        self.cutoffs[mode + 1..].iter().product()
    }

    fn with_amplitudes(&self, amplitudes: Vec<Complex64>) -> Self {
        let norm_sq = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        Self {
            cutoffs: self.cutoffs.clone(),
            amplitudes,
            norm_sq,
        }
    }

    fn apply_mode_matrix(&self, mode: usize, m: &DMatrix<Complex64>) -> Self {
        let (outer, dim, inner) = self.split(mode);
        let mut out = vec![ZERO; self.amplitudes.len()];
        let mut fiber = vec![ZERO; dim];
        for o in 0..outer {
            for i in 0..inner {
                let base = o * dim * inner + i;
                for (n, slot) in fiber.iter_mut().enumerate() {
                    *slot = self.amplitudes[base + n * inner];
                }
                if fiber.iter().all(|a| *a == ZERO) {
                    continue;
                }
                for row in 0..dim {
                    let mut acc = ZERO;
                    for (n, a) in fiber.iter().enumerate() {
                        acc += m[(row, n)] * a;
                    }
                    out[base + row * inner] = acc;
                }
            }
        }
        self.with_amplitudes(out)
    }

    fn apply_rotation_blocks(&self, mode_i: usize, mode_j: usize, theta: f64, phase: f64) -> Result<Self> {
        let (ci, cj) = (self.cutoffs[mode_i], self.cutoffs[mode_j]);
        let (si, sj) = (self.stride(mode_i), self.stride(mode_j));
        // flat offsets of every configuration of the spectator modes
        let spectators: Vec<usize> = (0..self.amplitudes.len())
            .filter(|flat| (flat / si) % ci == 0 && (flat / sj) % cj == 0)
            .collect();
        let mut out = vec![ZERO; self.amplitudes.len()];
        let mut block_in = Vec::new();
        for total in 0..(ci + cj - 1) {
            // occupations of mode i that keep both modes inside their cutoffs
            let lo = total.saturating_sub(cj - 1);
            let hi = total.min(ci - 1);
            let block = rotation_block(theta, phase, total)?;
            for &base in &spectators {
                block_in.clear();
                block_in.extend((lo..=hi).map(|i| self.amplitudes[base + i * si + (total - i) * sj]));
                if block_in.iter().all(|a| *a == ZERO) {
                    continue;
                }
                for row in lo..=hi {
                    let mut acc = ZERO;
                    for (k, a) in block_in.iter().enumerate() {
                        acc += block[(row, lo + k)] * a;
                    }
                    out[base + row * si + (total - row) * sj] = acc;
                }
            }
        }
        Ok(self.with_amplitudes(out))
    }
}

fn check_cutoffs(cutoffs: &[usize]) -> Result<()> {
    if cutoffs.is_empty() {
        return Err(Error::InvalidDimension("at least one mode is required".into()));
    }
    if let Some(c) = cutoffs.iter().find(|&&c| c < 2) {
        return Err(Error::InvalidDimension(format!(
            "every cutoff must be at least 2, got {c}"
        )));
    }
    Ok(())
}

fn flat_index(cutoffs: &[usize], idx: &FockIndex) -> Result<usize> {
    if !idx.fits(cutoffs) {
        return Err(Error::IndexOutOfRange {
            index: idx.clone(),
            cutoffs: cutoffs.to_vec(),
        });
    }
    Ok(idx
        .0
        .iter()
        .zip(cutoffs)
        .fold(0, |acc, (&m, &c)| acc * c + m))
}

fn unflatten(cutoffs: &[usize], mut flat: usize) -> FockIndex {
    let mut occ = vec![0; cutoffs.len()];
    for (k, &c) in cutoffs.iter().enumerate().rev() {
        occ[k] = flat % c;
        flat /= c;
    }
    FockIndex(occ)
}

pub fn apply_displacement(state: &TruncatedState, mode: usize, delta: Complex64) -> Result<TruncatedState> {
    state.apply(&GaussianOp::Displace { mode, delta })
}

pub fn apply_squeeze(state: &TruncatedState, mode: usize, zeta: f64, phase: f64) -> Result<TruncatedState> {
    state.apply(&GaussianOp::Squeeze { mode, zeta, phase })
}

pub fn apply_rotation(
    state: &TruncatedState,
    mode_i: usize,
    mode_j: usize,
    theta: f64,
    phase: f64,
) -> Result<TruncatedState> {
    state.apply(&GaussianOp::Rotate {
        mode_i,
        mode_j,
        theta,
        phase,
    })
}

/// Applies `ops` first to last (the first element is the rightmost factor of
/// the operator product).
pub fn apply_sequence(state: &TruncatedState, ops: &[GaussianOp]) -> Result<TruncatedState> {
    state.apply_all(ops)
}

pub fn probability(state: &TruncatedState, idx: &FockIndex) -> Result<f64> {
    state.probability(idx)
}

pub fn leakage(state: &TruncatedState) -> f64 {
    state.leakage()
}
