use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_fidelity, DeviceConfig, OUT_OF_MODEL_RANGE};
use crate::error::{Error, Result};
use crate::fock::FockIndex;

/// Per-target transfer-and-measure fidelity `F_D.M`, 1.0 where not listed.
///
/// Zero entries load fine and fail when that target is corrected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<FdmEntry>", into = "Vec<FdmEntry>")]
pub struct FdmTable {
    pub entries: BTreeMap<FockIndex, f64>,
}

#[derive(Serialize, Deserialize)]
struct FdmEntry {
    index: FockIndex,
    f_dm: f64,
}

impl From<Vec<FdmEntry>> for FdmTable {
    fn from(v: Vec<FdmEntry>) -> Self {
        FdmTable {
            entries: v.into_iter().map(|e| (e.index, e.f_dm)).collect(),
        }
    }
}

impl From<FdmTable> for Vec<FdmEntry> {
    fn from(t: FdmTable) -> Self {
        t.entries.into_iter().map(|(index, f_dm)| FdmEntry { index, f_dm }).collect()
    }
}

impl FdmTable {
    /// Parses whitespace-separated rows `nX nY F`. Blank lines, `#`
    /// comments and a leading `nX nY ...` header are skipped.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: source.to_string(),
            message: format!("line {line}: {message}"),
        };
        let mut entries = BTreeMap::new();
        let mut seen_data = false;
        for (k, raw) in text.lines().enumerate() {
            let lineno = k + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if !seen_data && fields[0].eq_ignore_ascii_case("nx") {
                continue;
            }
            seen_data = true;
            if fields.len() < 2 {
                return Err(err(lineno, format!("expected occupations and a fidelity, got `{line}`")));
            }
            let (occ, fid) = fields.split_at(fields.len() - 1);
            let occupations = occ
                .iter()
                .map(|s| s.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| err(lineno, format!("bad occupation number: {e}")))?;
            let f: f64 = fid[0]
                .parse()
                .map_err(|e| err(lineno, format!("bad fidelity `{}`: {e}", fid[0])))?;
            if !(0.0..=1.0).contains(&f) {
                return Err(err(lineno, format!("fidelity {f} outside [0, 1]")));
            }
            let idx = FockIndex::new(occupations);
            if entries.insert(idx.clone(), f).is_some() {
                return Err(err(lineno, format!("duplicate entry for {idx}")));
            }
        }
        Ok(FdmTable { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferFidelity {
    Table(FdmTable),
    /// `F = f_pi^(n_1 + ... + n_M + 2)`.
    Synthetic { f_pi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionModel {
    pub eta_up: f64,
    pub eta_down: f64,
    pub transfer: TransferFidelity,
}

impl DetectionModel {
    pub fn new(eta_up: f64, eta_down: f64, transfer: TransferFidelity) -> Result<Self> {
        check_fidelity("eta_up", eta_up)?;
        check_fidelity("eta_down", eta_down)?;
        if let TransferFidelity::Synthetic { f_pi } = transfer {
            if !(f_pi > 0.0 && f_pi <= 1.0) {
                return Err(Error::Config(format!("f_pi must lie in (0, 1], got {f_pi}")));
            }
        }
        Ok(DetectionModel {
            eta_up,
            eta_down,
            transfer,
        })
    }

    /// Ideal readout and transfer.
    pub fn perfect() -> Self {
        DetectionModel {
            eta_up: 1.0,
            eta_down: 1.0,
            transfer: TransferFidelity::Table(FdmTable::default()),
        }
    }

    /// Readout fidelities from the device, `F_D.M = 1`.
    pub fn from_config(cfg: &DeviceConfig) -> Result<Self> {
        Self::new(cfg.eta_up, cfg.eta_down, TransferFidelity::Table(FdmTable::default()))
    }

    pub fn with_transfer(mut self, transfer: TransferFidelity) -> Result<Self> {
        self.transfer = transfer;
        Self::new(self.eta_up, self.eta_down, self.transfer)
    }

    /// `eta_up + eta_down - 1`.
    pub fn contrast(&self) -> f64 {
        self.eta_up + self.eta_down - 1.0
    }

    /// `F_D.M` for `target`, failing if it is zero.
    pub fn f_dm(&self, target: &FockIndex) -> Result<f64> {
        let f = match &self.transfer {
            TransferFidelity::Table(t) => t.entries.get(target).copied().unwrap_or(1.0),
            TransferFidelity::Synthetic { f_pi } => f_pi.powi(target.total() as i32 + 2),
        };
        if f > 0.0 {
            Ok(f)
        } else {
            Err(Error::ZeroTransferFidelity { target: target.clone() })
        }
    }

    /// Linear inverse of `P_M = P_R eta_up + (1 - P_R)(1 - eta_down)`.
    pub fn corr(&self, p_measured: f64) -> f64 {
        (p_measured - (1.0 - self.eta_down)) / self.contrast()
    }

    /// Expected `P1 + P2 + P3` for true population `p`.
    pub fn expected_bright(&self, p: f64, f_dm: f64) -> f64 {
        let q = p * f_dm;
        (1.0 - q) * self.eta_up + q * (1.0 - self.eta_down)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub value: f64,
    /// The unclamped inverse.
    pub raw: f64,
    pub out_of_model: bool,
}

/// Readout-corrected population; results outside the plausible range are
/// clamped to [0, 1] and flagged.
pub fn correct_population(p_measured: f64, model: &DetectionModel) -> Correction {
    let raw = model.corr(p_measured);
    let (lo, hi) = OUT_OF_MODEL_RANGE;
    let out_of_model = !(lo..=hi).contains(&raw);
    Correction {
        value: if out_of_model { raw.clamp(0.0, 1.0) } else { raw },
        raw,
        out_of_model,
    }
}

/// `P4' = (1 - Corr(P1 + P2 + P3)) / F_D.M`, without clamping.
pub fn corrected_p4(record: &super::ShotRecord, model: &DetectionModel, target: &FockIndex) -> Result<f64> {
    let f = model.f_dm(target)?;
    Ok((1.0 - model.corr(record.p1 + record.p2 + record.p3)) / f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ion::ShotRecord;

    fn defaults() -> DetectionModel {
        DetectionModel::from_config(&DeviceConfig::default()).unwrap()
    }

    fn record(bright: f64) -> ShotRecord {
        ShotRecord {
            p1: bright,
            p2: 0.0,
            p3: 0.0,
            p4: 1.0 - bright,
            counts: [0; 4],
            shots: 1,
        }
    }

    #[test]
    fn correction_examples() {
        let m = defaults();
        assert!(correct_population(0.007, &m).value.abs() < 1e-12);
        assert!((correct_population(0.972, &m).value - 1.0).abs() < 1e-12);
        assert!((correct_population(0.4895, &m).value - 0.5).abs() < 1e-12);
        let c = correct_population(1.2, &m);
        assert!(c.out_of_model);
        assert_eq!(c.value, 1.0);
        assert!(!correct_population(0.0, &m).out_of_model);
    }

    #[test]
    fn corrected_p4_examples() {
        let t = FockIndex::new(vec![0, 1]);
        let perfect = DetectionModel::perfect();
        assert!((corrected_p4(&record(0.7), &perfect, &t).unwrap() - 0.3).abs() < 1e-12);

        let m = defaults();
        assert!((corrected_p4(&record(0.4895), &m, &t).unwrap() - 0.5).abs() < 1e-12);

        let mut table = FdmTable::default();
        table.entries.insert(t.clone(), 0.8);
        let m = m.with_transfer(TransferFidelity::Table(table)).unwrap();
        assert!((corrected_p4(&record(0.4895), &m, &t).unwrap() - 0.625).abs() < 1e-12);
    }

    #[test]
    fn zero_fidelity_names_target() {
        let t = FockIndex::new(vec![2, 1]);
        let table = FdmTable::parse("nX nY F\n2 1 0.0\n", "mem").unwrap();
        let m = defaults().with_transfer(TransferFidelity::Table(table)).unwrap();
        let e = corrected_p4(&record(0.5), &m, &t).unwrap_err();
        assert!(matches!(e, Error::ZeroTransferFidelity { .. }));
        assert!(e.to_string().contains("(2,1)"));
        assert!(m.f_dm(&FockIndex::new(vec![0, 0])).unwrap() == 1.0);
    }

    #[test]
    fn table_parsing() {
        let t = FdmTable::parse("# synthetic\nnX nY F_DM\n0 0 0.99\n1 0 0.95  # comment\n\n0 1 0.9\n", "t").unwrap();
        assert_eq!(t.entries.len(), 3);
        assert_eq!(t.entries[&FockIndex::new(vec![1, 0])], 0.95);

        for bad in ["0 0 1.5", "a 0 0.9", "0 0 0.9\n0 0 0.8", "0.9"] {
            match FdmTable::parse(bad, "bad.tsv") {
                Err(Error::Parse { path, message }) => {
                    assert_eq!(path, "bad.tsv");
                    assert!(message.starts_with("line "), "{message}");
                }
                other => panic!("{bad}: {other:?}"),
            }
        }
    }

    #[test]
    fn table_serializes_as_list() {
        let t = FdmTable::parse("0 1 0.9\n1 0 0.8\n", "t").unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"[{"index":[0,1],"f_dm":0.9},{"index":[1,0],"f_dm":0.8}]"#);
        assert_eq!(serde_json::from_str::<FdmTable>(&json).unwrap(), t);
    }

    #[test]
    fn synthetic_fidelity() {
        let m = defaults().with_transfer(TransferFidelity::Synthetic { f_pi: 0.99 }).unwrap();
        let f = m.f_dm(&FockIndex::new(vec![1, 2])).unwrap();
        assert!((f - 0.99f64.powi(5)).abs() < 1e-15);
        assert!(defaults().with_transfer(TransferFidelity::Synthetic { f_pi: 0.0 }).is_err());
    }

    #[test]
    fn correction_is_decreasing_in_bright_fraction() {
        let m = defaults();
        let t = FockIndex::new(vec![0, 0]);
        let mut prev = f64::INFINITY;
        for k in 0..=100 {
            let v = corrected_p4(&record(k as f64 / 100.0), &m, &t).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }
}
