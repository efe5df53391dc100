use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One elementary Gaussian unitary.
///
/// * `Displace`: `exp(delta a^+ - delta^* a)` on `mode`.
/// * `Squeeze`: `exp((z^* a a - z a^+ a^+) / 2)` with `z = zeta e^{i phase}`.
/// * `Rotate`: `exp(theta (e^{i phase} a_i^+ a_j - e^{-i phase} a_i a_j^+))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GaussianOp {
    Displace {
        mode: usize,
        delta: Complex64,
    },
    Squeeze {
        mode: usize,
        zeta: f64,
        #[serde(default)]
        phase: f64,
    },
    Rotate {
        mode_i: usize,
        mode_j: usize,
        theta: f64,
        #[serde(default)]
        phase: f64,
    },
}

impl GaussianOp {
    pub fn displace(mode: usize, delta: f64) -> Self {
        GaussianOp::Displace {
            mode,
            delta: Complex64::new(delta, 0.0),
        }
    }

    pub fn squeeze(mode: usize, zeta: f64) -> Self {
        GaussianOp::Squeeze {
            mode,
            zeta,
            phase: 0.0,
        }
    }

    pub fn rotate(mode_i: usize, mode_j: usize, theta: f64) -> Self {
        GaussianOp::Rotate {
            mode_i,
            mode_j,
            theta,
            phase: 0.0,
        }
    }

    /// Modes the operator acts on.
    pub fn modes(&self) -> Vec<usize> {
        match *self {
            GaussianOp::Displace { mode, .. } | GaussianOp::Squeeze { mode, .. } => vec![mode],
            GaussianOp::Rotate { mode_i, mode_j, .. } => vec![mode_i, mode_j],
        }
    }

    /// True when the operator is exactly the identity.
    pub fn is_identity(&self) -> bool {
        match *self {
            GaussianOp::Displace { delta, .. } => delta == Complex64::new(0.0, 0.0),
            GaussianOp::Squeeze { zeta, .. } => zeta == 0.0,
            GaussianOp::Rotate { theta, .. } => theta == 0.0,
        }
    }

    /// The inverse operator.
    pub fn inverse(&self) -> Self {
        match self.clone() {
            GaussianOp::Displace { mode, delta } => GaussianOp::Displace { mode, delta: -delta },
            GaussianOp::Squeeze { mode, zeta, phase } => GaussianOp::Squeeze {
                mode,
                zeta: -zeta,
                phase,
            },
            GaussianOp::Rotate {
                mode_i,
                mode_j,
                theta,
                phase,
            } => GaussianOp::Rotate {
                mode_i,
                mode_j,
                theta: -theta,
                phase,
            },
        }
    }

    pub fn validate(&self, nmodes: usize) -> Result<()> {
        for mode in self.modes() {
            if mode >= nmodes {
                return Err(Error::ModeOutOfRange { mode, nmodes });
            }
        }
        let finite = match *self {
            GaussianOp::Displace { delta, .. } => delta.re.is_finite() && delta.im.is_finite(),
            GaussianOp::Squeeze { zeta, phase, .. } => zeta.is_finite() && phase.is_finite(),
            GaussianOp::Rotate { theta, phase, .. } => theta.is_finite() && phase.is_finite(),
        };
        if !finite {
            return Err(Error::InvalidParameter(format!(
                "non-finite operator parameter in {self:?}"
            )));
        }
        if let GaussianOp::Rotate { mode_i, mode_j, .. } = *self {
            if mode_i == mode_j {
                return Err(Error::InvalidParameter(format!(
                    "rotation needs two distinct modes, got {mode_i} twice"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(GaussianOp::displace(1, 0.5).validate(2).is_ok());
        assert!(matches!(
            GaussianOp::displace(2, 0.5).validate(2),
            Err(Error::ModeOutOfRange { mode: 2, nmodes: 2 })
        ));
        assert!(matches!(
            GaussianOp::rotate(1, 1, 0.2).validate(2),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            GaussianOp::squeeze(0, f64::NAN).validate(1),
            Err(Error::InvalidParameter(_))
        ));
        let bad = GaussianOp::Displace {
            mode: 0,
            delta: Complex64::new(0.0, f64::INFINITY),
        };
        assert!(bad.validate(1).is_err());
    }

    #[test]
    fn serde_tagged_form() {
        let op = GaussianOp::rotate(0, 1, 0.25);
        let json = serde_json::to_string(&op).unwrap();
        assert!(json.contains("\"kind\":\"rotate\""));
        let back: GaussianOp = serde_json::from_str(&json).unwrap();
        assert_eq!(back, op);
    }
}
