//! TOML parameter files.
//!
//! ```toml
//! name = "SO2 -> SO2+"
//! omega_initial = [1178.4, 518.9]
//! omega_final = [1112.7, 415.0]
//! duschinsky = [[0.982, 0.188], [-0.188, 0.982]]
//! delta = [-0.026, 1.716]     # or: d = [...] plus unit_system = "atomic"
//! omega_00 = 0.0              # optional
//! scale = 25.0                # optional
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::doktorov::{Displacement, MolecularParams};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    name: Option<String>,
    omega_initial: Vec<f64>,
    omega_final: Vec<f64>,
    duschinsky: Vec<Vec<f64>>,
    delta: Option<Vec<f64>>,
    d: Option<Vec<f64>>,
    unit_system: Option<String>,
    omega_00: Option<f64>,
    scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamFile {
    pub name: Option<String>,
    pub params: MolecularParams,
    /// Rescaling constant requested by the file, if any.
    pub scale: Option<f64>,
}

impl ParamFile {
    /// Parses and validates; `source` names the file in error messages.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let parse_err = |message: String| Error::Parse {
            path: source.to_string(),
            message,
        };
        let raw: RawFile = toml::from_str(text).map_err(|e| parse_err(e.to_string().trim_end().to_string()))?;

        let displacement = match (raw.delta, raw.d) {
            (Some(delta), None) => {
                if raw.unit_system.is_some() {
                    return Err(parse_err("`unit_system` only applies to `d`, not `delta`".into()));
                }
                Displacement::Dimensionless(delta)
            }
            (None, Some(d)) => {
                let units = raw
                    .unit_system
                    .ok_or_else(|| parse_err("`d` requires `unit_system`".into()))?
                    .parse()?;
                Displacement::MassWeighted { d, units }
            }
            (Some(_), Some(_)) => return Err(parse_err("give exactly one of `delta` and `d`, not both".into())),
            (None, None) => return Err(parse_err("missing field `delta` (or `d` with `unit_system`)".into())),
        };

        let params = MolecularParams {
            omega_initial: raw.omega_initial,
            omega_final: raw.omega_final,
            duschinsky: raw.duschinsky,
            displacement,
            omega_00: raw.omega_00.unwrap_or(0.0),
        };
        params.validate()?;
        if let Some(s) = raw.scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(parse_err(format!("`scale` must be positive, got {s}")));
            }
        }
        Ok(ParamFile {
            name: raw.name,
            params,
            scale: raw.scale,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }
}
