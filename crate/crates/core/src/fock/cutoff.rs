use serde::{Deserialize, Serialize};

use super::{GaussianOp, TruncatedState};
use crate::error::{Error, Result};

pub const AUTO_CUTOFF_START: usize = 4;
pub const AUTO_CUTOFF_CAP: usize = 64;
pub const AUTO_LEAKAGE_TARGET: f64 = 1e-6;

/// How the per-mode basis size is chosen for a run starting from vacuum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffPolicy {
    Fixed(Vec<usize>),
    /// Double a uniform cutoff from `start` until the leakage after the full
    /// sequence drops below `target`, failing once `cap` is exceeded.
    Auto { start: usize, cap: usize, target: f64 },
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        CutoffPolicy::Auto {
            start: AUTO_CUTOFF_START,
            cap: AUTO_CUTOFF_CAP,
            target: AUTO_LEAKAGE_TARGET,
        }
    }
}

/// Applies `ops` to the `nmodes`-mode vacuum under the given cutoff policy.
pub fn run_sequence(nmodes: usize, ops: &[GaussianOp], policy: &CutoffPolicy) -> Result<TruncatedState> {
    match policy {
        CutoffPolicy::Fixed(cutoffs) => {
            if cutoffs.len() != nmodes {
                return Err(Error::InvalidDimension(format!(
                    "{nmodes} modes but {} cutoffs",
                    cutoffs.len()
                )));
            }
            TruncatedState::vacuum(cutoffs)?.apply_all(ops)
        }
        &CutoffPolicy::Auto { start, cap, target } => {
            if start < 2 || cap < start || !(target > 0.0) {
                return Err(Error::Config(format!(
                    "bad auto cutoff settings: start {start}, cap {cap}, target {target}"
                )));
            }
            let mut cutoff = start;
            loop {
                let state = TruncatedState::vacuum(&vec![cutoff; nmodes])?.apply_all(ops)?;
                if state.leakage() < target {
                    return Ok(state);
                }
                if cutoff >= cap {
                    return Err(Error::CutoffCapExceeded {
                        cutoff,
                        leakage: state.leakage(),
                        target,
                    });
                }
                cutoff = (cutoff * 2).min(cap);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_doubles_until_converged() {
        let ops = [GaussianOp::displace(0, 1.5)];
        let s = run_sequence(1, &ops, &CutoffPolicy::default()).unwrap();
        assert!(s.leakage() < AUTO_LEAKAGE_TARGET);
        assert!(s.cutoffs()[0] == 16 || s.cutoffs()[0] == 32);
    }

    #[test]
    fn auto_reports_cap() {
        let ops = [GaussianOp::displace(0, 6.0)];
        let policy = CutoffPolicy::Auto {
            start: 4,
            cap: 16,
            target: 1e-6,
        };
        match run_sequence(1, &ops, &policy) {
            Err(Error::CutoffCapExceeded { cutoff, leakage, .. }) => {
                assert_eq!(cutoff, 16);
                assert!(leakage > 1e-6);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fixed_geometry_must_match() {
        assert!(run_sequence(2, &[], &CutoffPolicy::Fixed(vec![4])).is_err());
        let s = run_sequence(2, &[], &CutoffPolicy::Fixed(vec![4, 5])).unwrap();
        assert_eq!(s.cutoffs(), &[4, 5]);
    }
}
