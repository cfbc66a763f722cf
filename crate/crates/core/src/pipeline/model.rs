//! The trained fileprint model and its canonical JSON document.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter};

use super::corpus::ClassLabel;
use super::PipelineConfig;
use crate::error::{Error, Result};
use crate::histogram::BINS;
use crate::mlp::MlpNetwork;
use crate::pca::PcaModel;

pub const FORMAT_VERSION: u32 = 1;

/// Per-feature affine conditioning applied to PCA outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn apply(&self, z: &mut [f64]) {
        for ((v, m), s) in z.iter_mut().zip(&self.mean).zip(&self.std) {
            *v = (*v - m) / s;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileprintModel {
    pub format_version: u32,
    pub labels: Vec<ClassLabel>,
    pub pca: PcaModel,
    pub standardizer: Standardizer,
    /// Layers 1–3 of the trained auto-associative network.
    pub aann_encoder: MlpNetwork,
    pub classifier: MlpNetwork,
    pub config: PipelineConfig,
}

fn corrupt(path: &str, message: impl Into<String>) -> Error {
    Error::CorruptModel {
        path: path.to_string(),
        message: message.into(),
    }
}

impl FileprintModel {
    /// Checks every cross-field shape invariant.
    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                expected: FORMAT_VERSION,
                found: self.format_version.into(),
            });
        }
        self.config
            .validate()
            .map_err(|e| corrupt("config", e.to_string()))?;
        let n1 = self.config.n1;
        let n2 = self.config.n2;
        if self.labels.len() < 2 {
            return Err(corrupt("labels", "at least 2 labels required"));
        }
        let mut sorted = self.labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.labels.len() {
            return Err(corrupt("labels", "duplicate label"));
        }
        if self.pca.mean.len() != BINS || self.pca.basis.cols() != BINS {
            return Err(corrupt("pca", format!("dimension must be {BINS}")));
        }
        if self.pca.eigenvalues.len() != BINS {
            return Err(corrupt("pca.eigenvalues", format!("expected {BINS} values")));
        }
        if self.pca.k() != n1 {
            return Err(corrupt("pca.basis", format!("expected {n1} rows, found {}", self.pca.k())));
        }
        if self.standardizer.mean.len() != n1 || self.standardizer.std.len() != n1 {
            return Err(corrupt("standardizer", format!("expected {n1} features")));
        }
        if let Some(i) = self
            .standardizer
            .std
            .iter()
            .position(|s| !(*s > 0.0 && s.is_finite()))
        {
            return Err(corrupt(&format!("standardizer.std[{i}]"), "must be positive"));
        }
        if self.aann_encoder.input_size() != n1 || self.aann_encoder.output_size() != n2 {
            return Err(corrupt(
                "aann_encoder.layers",
                format!("expected {n1} inputs and {n2} outputs"),
            ));
        }
        if self.classifier.input_size() != n2 || self.classifier.output_size() != self.labels.len()
        {
            return Err(corrupt(
                "classifier.layers",
                format!("expected {n2} inputs and {} outputs", self.labels.len()),
            ));
        }
        Ok(())
    }

    pub fn n_features(&self) -> usize {
        self.aann_encoder.output_size()
    }

    /// Canonical JSON: fixed key order, every real as 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        self.save(&mut out).expect("writing to memory cannot fail");
        String::from_utf8(out).expect("JSON is UTF-8")
    }

    pub fn save<W: Write>(&self, mut sink: W) -> io::Result<()> {
        let mut ser = serde_json::Serializer::with_formatter(&mut sink, FixedDigits);
        self.serialize(&mut ser).map_err(io::Error::other)?;
        sink.write_all(b"\n")
    }

    pub fn save_to_path(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| corrupt("$", e.to_string()))?;
        match value.get("format_version") {
            None => return Err(corrupt("format_version", "missing")),
            Some(v) => match v.as_u64() {
                Some(n) if n == u64::from(FORMAT_VERSION) => {}
                Some(n) => {
                    return Err(Error::VersionMismatch {
                        expected: FORMAT_VERSION,
                        found: n,
                    })
                }
                None => return Err(corrupt("format_version", "not an unsigned integer")),
            },
        }
        let model: FileprintModel = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            corrupt(&path, e.into_inner().to_string())
        })?;
        model.validate()?;
        Ok(model)
    }

    pub fn load<R: Read>(mut source: R) -> Result<Self> {
        let mut text = String::new();
        source
            .read_to_string(&mut text)
            .map_err(|e| corrupt("$", e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn load_from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Compact JSON with reals written as `d.dddddddddddddddde±x`.
struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        CompactFormatter.write_f64(writer, f64::from(value))
    }
}
