//! Multimode states in a truncated Fock basis and the elementary Gaussian
//! operators (displacement, single-mode squeezing, two-mode rotation).
//!
//! Operators are applied as the exact matrix elements `<m|U|n>` for `m, n`
//! below the cutoff. Single-mode matrices come from the dense exponential of
//! the generator in a padded basis, enlarged until the retained block stops
//! changing; the rotation conserves total phonon number, so each
//! fixed-number block is exponentiated exactly. Population pushed above the
//! cutoff is lost rather than renormalized and is reported by
//! [`TruncatedState::leakage`].

mod cutoff;
mod ops;
mod operators;
mod state;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use cutoff::{run_sequence, CutoffPolicy, AUTO_CUTOFF_CAP, AUTO_CUTOFF_START, AUTO_LEAKAGE_TARGET};
pub use ops::GaussianOp;
pub use operators::{displacement_matrix, rotation_block, squeeze_matrix};
pub use state::{
    apply_displacement, apply_rotation, apply_sequence, apply_squeeze, leakage, new_vacuum,
    probability, TruncatedState, NORM_EPS,
};

/// Occupation numbers of a multimode Fock state `|m_1, ..., m_M>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FockIndex(pub Vec<usize>);

impl FockIndex {
    pub fn new(occupations: impl Into<Vec<usize>>) -> Self {
        Self(occupations.into())
    }

    pub fn nmodes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn occupations(&self) -> &[usize] {
        &self.0
    }

    pub fn fits(&self, cutoffs: &[usize]) -> bool {
        self.0.len() == cutoffs.len() && self.0.iter().zip(cutoffs).all(|(m, c)| m < c)
    }
}

impl From<Vec<usize>> for FockIndex {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl<const N: usize> From<[usize; N]> for FockIndex {
    fn from(v: [usize; N]) -> Self {
        Self(v.to_vec())
    }
}

impl fmt::Display for FockIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, ")")
    }
}
