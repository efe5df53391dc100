use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use vibsim_core::doktorov::{DoktorovSequence, MolecularParams};
use vibsim_core::fock::CutoffPolicy;
use vibsim_core::ion::{DetectionModel, DeviceConfig};
use vibsim_core::spectrum::WidthKind;
use vibsim_core::{Error, Result};

/// Everything needed to rerun a command. No timestamps or host details, so
/// identical inputs give identical bytes.
#[derive(Debug, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub input: String,
    pub name: Option<String>,
    pub params: MolecularParams,
    pub scale: f64,
    pub sequence: DoktorovSequence,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff_policy: Option<CutoffPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leakage: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub broadening: Option<Broadening>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub device: Option<DeviceConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionModel>,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct Broadening {
    pub width: f64,
    pub width_kind: WidthKind,
    pub grid_step: f64,
    pub merge_tol: f64,
}

pub struct OutDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(OutDir {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    /// Writes through a temporary file in the same directory, then renames.
    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        let mut tmp = tempfile::Builder::new()
            .prefix(&format!(".{name}."))
            .tempfile_in(&self.dir)?;
        tmp.write_all(contents)?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.dir.join(name)).map_err(|e| Error::Io(e.error))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Writes `meta` (with the list of files written so far) as `name`.
    pub fn finish(mut self, name: &str, mut meta: Metadata, extra: impl Serialize) -> Result<PathBuf> {
        meta.files = self.written.clone();
        meta.files.push(name.to_string());
        #[derive(Serialize)]
        struct Doc<'a, T> {
            metadata: &'a Metadata,
            #[serde(flatten)]
            extra: T,
        }
        let mut json = serde_json::to_vec_pretty(&Doc { metadata: &meta, extra })
            .map_err(|e| Error::Io(e.into()))?;
        json.push(b'\n');
        self.write(name, &json)?;
        Ok(self.dir.clone())
    }
}
