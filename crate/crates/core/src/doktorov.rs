//! Molecular parameters and their Doktorov factorization
//! `U_Dok = D(delta) S^+(zeta') R(U) S(zeta)` into elementary operators.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::GaussianOp;

/// Rescaling constant applied inside both squeezing stages.
pub const DEFAULT_SCALE: f64 = 25.0;

/// Squeezing magnitude above which the ion device is out of range.
pub const SQUEEZE_GUARD: f64 = 4.0;

/// Tolerance on `U^T U = I` and `det U = 1`. Published Duschinsky matrices
/// are quoted to three decimals, which already breaks orthogonality at 4e-4.
pub const ORTHOGONALITY_TOL: f64 = 1e-3;

/// Agreement required between the entries of a 2x2 rotation
/// (`U00 = U11`, `U01 = -U10`).
pub const ROTATION_ENTRY_TOL: f64 = 1e-4;

const HARTREE_IN_CM1: f64 = 219_474.631_363_2;
const SPEED_OF_LIGHT_CM_S: f64 = 2.997_924_58e10;
const HBAR_J_S: f64 = 1.054_571_817e-34;
const AMU_KG: f64 = 1.660_539_066_60e-27;
const ANGSTROM_M: f64 = 1e-10;

/// Units of a mass-weighted displacement `d`; frequencies are always cm^-1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitSystem {
    /// `d` in `m_e^(1/2) bohr`, hbar = 1.
    Atomic,
    /// `d` in `amu^(1/2) angstrom`, SI hbar.
    AmuAngstrom,
}

impl UnitSystem {
    /// `sqrt(omega / (2 hbar))` for one frequency, in inverse units of `d`.
    fn factor(self, omega_cm1: f64) -> f64 {
        match self {
            UnitSystem::Atomic => (omega_cm1 / HARTREE_IN_CM1 / 2.0).sqrt(),
            UnitSystem::AmuAngstrom => {
                let omega = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM_S * omega_cm1;
                (omega / (2.0 * HBAR_J_S)).sqrt() * AMU_KG.sqrt() * ANGSTROM_M
            }
        }
    }
}

impl FromStr for UnitSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "atomic" => Ok(UnitSystem::Atomic),
            "amu_angstrom" => Ok(UnitSystem::AmuAngstrom),
            other => Err(Error::Config(format!(
                "unknown unit system `{other}` (expected `atomic` or `amu_angstrom`)"
            ))),
        }
    }
}

impl fmt::Display for UnitSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnitSystem::Atomic => "atomic",
            UnitSystem::AmuAngstrom => "amu_angstrom",
        })
    }
}

/// The molecular displacement, either already dimensionless or mass-weighted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Displacement {
    Dimensionless(Vec<f64>),
    MassWeighted { d: Vec<f64>, units: UnitSystem },
}

/// Harmonic description of an electronic transition: `Q' = U Q + d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MolecularParams {
    /// Initial-state frequencies, cm^-1.
    pub omega_initial: Vec<f64>,
    /// Final-state frequencies, cm^-1.
    pub omega_final: Vec<f64>,
    /// Row-major Duschinsky matrix.
    pub duschinsky: Vec<Vec<f64>>,
    pub displacement: Displacement,
    /// Offset frequency, cm^-1.
    pub omega_00: f64,
}

impl MolecularParams {
    pub fn nmodes(&self) -> usize {
        self.omega_initial.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nmodes();
        if n == 0 {
            return Err(Error::InvalidDimension("no vibrational modes".into()));
        }
        if self.omega_final.len() != n {
            return Err(Error::InvalidDimension(format!(
                "omega_initial has {n} modes but omega_final has {}",
                self.omega_final.len()
            )));
        }
        for (name, freqs) in [("omega_initial", &self.omega_initial), ("omega_final", &self.omega_final)] {
            if let Some(w) = freqs.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {w}"
                )));
            }
        }
        if !self.omega_00.is_finite() {
            return Err(Error::InvalidParameter("omega_00 must be finite".into()));
        }
        let disp_len = match &self.displacement {
            Displacement::Dimensionless(v) => v.len(),
            Displacement::MassWeighted { d, .. } => d.len(),
        };
        if disp_len != n {
            return Err(Error::InvalidDimension(format!(
                "displacement has {disp_len} entries for {n} modes"
            )));
        }
        check_orthogonal(&self.duschinsky, n)
    }

    /// Dimensionless displacement per mode.
    pub fn delta(&self) -> Result<Vec<f64>> {
        match &self.displacement {
            Displacement::Dimensionless(delta) => Ok(delta.clone()),
            Displacement::MassWeighted { d, units } => delta_from_d(d, &self.omega_final, *units),
        }
    }
}

fn check_orthogonal(u: &[Vec<f64>], n: usize) -> Result<()> {
    if u.len() != n || u.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidDimension(format!(
            "Duschinsky matrix must be {n}x{n}"
        )));
    }
    if u.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("Duschinsky matrix has non-finite entries".into()));
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = (0..n).map(|k| u[k][i] * u[k][j]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - want).abs());
        }
    }
    if worst > ORTHOGONALITY_TOL {
        return Err(Error::InvalidParameter(format!(
            "Duschinsky matrix is not orthogonal: max |U^T U - I| = {worst:.2e}"
        )));
    }
    Ok(())
}

/// `zeta_k = ln(sqrt(omega_k) / scale)`.
pub fn squeezing_params(freqs: &[f64], scale: f64) -> Result<Vec<f64>> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
    }
    freqs
        .iter()
        .map(|&w| {
            if w.is_finite() && w > 0.0 {
                Ok((w.sqrt() / scale).ln())
            } else {
                Err(Error::InvalidParameter(format!("frequency must be positive, got {w}")))
            }
        })
        .collect()
}

/// Angle of a 2x2 rotation `[[cos t, sin t], [-sin t, cos t]]`.
pub fn rotation_angle_from_u(u: [[f64; 2]; 2]) -> Result<f64> {
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    if det < 0.0 {
        return Err(Error::UnsupportedReflection { det });
    }
    if (det - 1.0).abs() > ORTHOGONALITY_TOL {
        return Err(Error::NotARotation(format!("det = {det:.6}")));
    }
    let diag = (u[0][0] - u[1][1]).abs();
    let off = (u[0][1] + u[1][0]).abs();
    if diag > ROTATION_ENTRY_TOL || off > ROTATION_ENTRY_TOL {
        return Err(Error::NotARotation(format!(
            "|U00 - U11| = {diag:.2e}, |U01 + U10| = {off:.2e}"
        )));
    }
    Ok(u[0][1].atan2(u[0][0]))
}

/// `delta_k = sqrt(omega'_k / (2 hbar)) d_k`.
pub fn delta_from_d(d: &[f64], omega_final: &[f64], units: UnitSystem) -> Result<Vec<f64>> {
    if d.len() != omega_final.len() {
        return Err(Error::InvalidDimension(format!(
            "{} displacements for {} frequencies",
            d.len(),
            omega_final.len()
        )));
    }
    Ok(d.iter().zip(omega_final).map(|(&dk, &w)| units.factor(w) * dk).collect())
}

/// Inverse of [`delta_from_d`].
pub fn d_from_delta(delta: &[f64], omega_final: &[f64], units: UnitSystem) -> Result<Vec<f64>> {
    if delta.len() != omega_final.len() {
        return Err(Error::InvalidDimension(format!(
            "{} displacements for {} frequencies",
            delta.len(),
            omega_final.len()
        )));
    }
    Ok(delta.iter().zip(omega_final).map(|(&x, &w)| x / units.factor(w)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Squeeze,
    Rotate,
    InverseSqueeze,
    Displace,
}

impl Stage {
    /// 1-based position in application order.
    pub fn number(self) -> usize {
        match self {
            Stage::Squeeze => 1,
            Stage::Rotate => 2,
            Stage::InverseSqueeze => 3,
            Stage::Displace => 4,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Squeeze => "squeeze",
            Stage::Rotate => "rotate",
            Stage::InverseSqueeze => "inverse_squeeze",
            Stage::Displace => "displace",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagedOp {
    pub stage: Stage,
    pub op: GaussianOp,
}

/// The four Doktorov stages in application order: `S(zeta)`, `R(theta)`,
/// `S(-zeta')`, `D(delta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoktorovSequence {
    pub scale: f64,
    pub zeta: Vec<f64>,
    pub theta: f64,
    pub zeta_prime: Vec<f64>,
    pub delta: Vec<f64>,
    pub staged: Vec<StagedOp>,
}

impl DoktorovSequence {
    pub fn nmodes(&self) -> usize {
        self.zeta.len()
    }

    /// Operators in application order.
    pub fn ops(&self) -> Vec<GaussianOp> {
        self.staged.iter().map(|s| s.op.clone()).collect()
    }

    /// Squeezing parameters beyond the device range.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, values) in [("zeta", &self.zeta), ("zeta'", &self.zeta_prime)] {
            for (k, z) in values.iter().enumerate() {
                if z.abs() > SQUEEZE_GUARD {
                    out.push(format!(
                        "|{name}[{k}]| = {:.3} exceeds the device limit {SQUEEZE_GUARD}",
                        z.abs()
                    ));
                }
            }
        }
        out
    }
}

/// Builds the Doktorov operator list for a two-mode molecule.
pub fn build_sequence(params: &MolecularParams, scale: f64) -> Result<DoktorovSequence> {
    params.validate()?;
    let n = params.nmodes();
    if n != 2 {
        return Err(Error::UnsupportedDimension { nmodes: n });
    }
    let zeta = squeezing_params(&params.omega_initial, scale)?;
    let zeta_prime = squeezing_params(&params.omega_final, scale)?;
    let u = &params.duschinsky;
    let theta = rotation_angle_from_u([[u[0][0], u[0][1]], [u[1][0], u[1][1]]])?;
    let delta = params.delta()?;

    let mut staged = Vec::with_capacity(3 * n + 1);
    for (k, &z) in zeta.iter().enumerate() {
        staged.push(StagedOp {
            stage: Stage::Squeeze,
            op: GaussianOp::squeeze(k, z),
        });
    }
    staged.push(StagedOp {
        stage: Stage::Rotate,
        op: GaussianOp::rotate(0, 1, theta),
    });
    for (k, &z) in zeta_prime.iter().enumerate() {
        staged.push(StagedOp {
            stage: Stage::InverseSqueeze,
            op: GaussianOp::squeeze(k, -z),
        });
    }
    for (k, &d) in delta.iter().enumerate() {
        staged.push(StagedOp {
            stage: Stage::Displace,
            op: GaussianOp::displace(k, d),
        });
    }
    Ok(DoktorovSequence {
        scale,
        zeta,
        theta,
        zeta_prime,
        delta,
        staged,
    })
}
