//! File formats: matrix JSON, Choi JSON, CSV helpers, and run manifests.
//!
//! Matrices serialize as `{"rows": r, "cols": c, "entries": [[re, im], ...]}`
//! in row-major order. A Choi file is the same object extended with a
//! `{"dimA": .., "dimB": ..}` header. All floating-point text is written
//! with Rust's shortest round-trip formatting, so file output is lossless
//! and bit-stable across reruns.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::ChoiCandidate;
use crate::error::Error;
use crate::linalg::{BipartiteDims, Complex64, ComplexMatrix, DensityMatrix, Tolerances};

/// Matrix wire format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `[re, im]` pairs.
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows,
            cols: m.cols,
            entries: m.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, Error> {
        if self.entries.len() != self.rows * self.cols {
            return Err(Error::dim(
                "MatrixJson::to_matrix",
                self.rows * self.cols,
                self.entries.len(),
            ));
        }
        let data: Vec<Complex64> = self
            .entries
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        let m = ComplexMatrix::new(self.rows, self.cols, data);
        m.check_finite("MatrixJson::to_matrix")?;
        Ok(m)
    }
}

/// Choi wire format: matrix JSON plus the bipartite dimension header.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChoiJson {
    #[serde(rename = "dimA")]
    pub dim_a: usize,
    #[serde(rename = "dimB")]
    pub dim_b: usize,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl ChoiJson {
    pub fn from_candidate(cand: &ChoiCandidate) -> Self {
        let m = MatrixJson::from_matrix(cand.matrix());
        Self {
            dim_a: cand.dims().dim_a,
            dim_b: cand.dims().dim_b,
            rows: m.rows,
            cols: m.cols,
            entries: m.entries,
        }
    }

    pub fn to_candidate(&self) -> Result<ChoiCandidate, Error> {
        let m = MatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.clone(),
        }
        .to_matrix()?;
        if self.dim_a == 0 || self.dim_b == 0 {
            return Err(Error::InvalidParameter(
                "dimA and dimB must be at least 1".into(),
            ));
        }
        ChoiCandidate::new(BipartiteDims::new(self.dim_a, self.dim_b), m)
    }
}

pub fn save_matrix(path: &Path, m: &ComplexMatrix) -> std::io::Result<()> {
    let json = serde_json::to_string_pretty(&MatrixJson::from_matrix(m))
        .expect("matrix serialization cannot fail");
    fs::write(path, json)
}

pub fn load_matrix(path: &Path) -> Result<ComplexMatrix, LoadError> {
    let text = fs::read_to_string(path).map_err(LoadError::Io)?;
    let json: MatrixJson = serde_json::from_str(&text).map_err(LoadError::Parse)?;
    json.to_matrix().map_err(LoadError::Invalid)
}

pub fn save_choi(path: &Path, cand: &ChoiCandidate) -> std::io::Result<()> {
    let json = serde_json::to_string_pretty(&ChoiJson::from_candidate(cand))
        .expect("choi serialization cannot fail");
    fs::write(path, json)
}

pub fn load_choi(path: &Path) -> Result<ChoiCandidate, LoadError> {
    let text = fs::read_to_string(path).map_err(LoadError::Io)?;
    let json: ChoiJson = serde_json::from_str(&text).map_err(LoadError::Parse)?;
    json.to_candidate().map_err(LoadError::Invalid)
}

pub fn load_density(path: &Path, tol: &Tolerances) -> Result<DensityMatrix, LoadError> {
    let m = load_matrix(path)?;
    DensityMatrix::new(m, tol).map_err(LoadError::Invalid)
}

/// File-loading failure, split so the CLI can map it to exit codes
/// (I/O and parse problems versus invalid-but-well-formed content).
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("i/o error: {0}")]
    Io(std::io::Error),
    #[error("parse error: {0}")]
    Parse(serde_json::Error),
    #[error("invalid content: {0}")]
    Invalid(Error),
}

/// Formats a float with shortest round-trip text (lossless for f64).
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Digest and path of one produced file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

/// Record of a CLI run: resolved parameters and digests of every output, so
/// a run can be reproduced and checked bit-exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    pub tool_version: String,
    pub duration_ms: u64,
    pub outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: serde_json::Value, master_seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            parameters,
            master_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            duration_ms: 0,
            outputs: Vec::new(),
        }
    }

    pub fn record_output(&mut self, path: &Path) -> std::io::Result<()> {
        let digest = sha256_file(path)?;
        self.outputs.push(OutputDigest {
            path: path.to_string_lossy().into_owned(),
            sha256: digest,
        });
        Ok(())
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serialization");
        fs::write(path, json)
    }
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let bytes = fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

/// Joins an output directory with a file name, creating the directory.
pub fn prepare_out_dir(dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
