use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Split;
use crate::fsutil::{sha256_file, sha256_hex, write_atomic};
use crate::geometry::{OrthogonalityReport, SpatialTransform, TransformConfig};
use crate::labels::Class;
use crate::pipeline::config::{Anchor, TransformMode};
use crate::swarm::PolynomialTransform;

pub const MANIFEST_VERSION: u32 = 1;

/// Segment counts by class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ClassCounts {
    pub N: usize,
    pub V: usize,
    pub S: usize,
    pub F: usize,
}

impl ClassCounts {
    pub fn add(&mut self, c: Class) {
        *self.get_mut(c) += 1;
    }

    pub fn get(&self, c: Class) -> usize {
        match c {
            Class::N => self.N,
            Class::V => self.V,
            Class::S => self.S,
            Class::F => self.F,
        }
    }

    fn get_mut(&mut self, c: Class) -> &mut usize {
        match c {
            Class::N => &mut self.N,
            Class::V => &mut self.V,
            Class::S => &mut self.S,
            Class::F => &mut self.F,
        }
    }

    pub fn merge(&mut self, o: &ClassCounts) {
        for c in Class::ALL {
            *self.get_mut(c) += o.get(c);
        }
    }

    pub fn total(&self) -> usize {
        self.N + self.V + self.S + self.F
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestRecord {
    pub name: String,
    pub split: Split,
    pub sampling_rate: f64,
    pub channel: String,
    pub beats: usize,
    pub cycles: usize,
    pub segments: ClassCounts,
    pub discarded_segments: usize,
    pub discarded_q_beats: usize,
    pub unknown_annotation_codes: usize,
    pub feature_failures: usize,
    pub features_file: String,
    pub features_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestManifest {
    pub version: u32,
    /// Hash of every setting that shapes the feature cache.
    pub settings_sha256: String,
    pub records: Vec<IngestRecord>,
    pub totals: ClassCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactHash {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainManifest {
    pub version: u32,
    pub ingest_manifest_sha256: String,
    pub ds1: Vec<String>,
    pub k: usize,
    pub pca_dim: usize,
    pub segments: ClassCounts,
    pub artifacts: Vec<ArtifactHash>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformManifest {
    pub version: u32,
    pub train_manifest_sha256: String,
    pub mode: TransformMode,
    pub artifacts: Vec<ArtifactHash>,
}

/// Serialized transform for the deviation stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum TransformArtifact {
    None,
    Deterministic {
        anchor: Anchor,
        config: TransformConfig,
        /// Map built at the training normal centroid.
        transform: Box<SpatialTransform<f64>>,
    },
    Mopso {
        transform: PolynomialTransform<f64>,
        o1: f64,
        o2: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectivePair {
    pub o1: f64,
    pub o2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformDiagnostics {
    pub mode: TransformMode,
    pub before: ObjectivePair,
    pub after: ObjectivePair,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub orthogonality: Option<OrthogonalityReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub front_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub linear_front_size: Option<usize>,
}

pub fn to_json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

/// Writes JSON atomically and returns its hash.
pub fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<String> {
    let b = to_json_bytes(v)?;
    write_atomic(path, &b)?;
    Ok(sha256_hex(&b))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    let b = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_slice(&b)?)
}

/// Reads an artifact after checking it against its recorded hash.
pub fn read_verified<T: DeserializeOwned>(dir: &Path, hashes: &[ArtifactHash], file: &str) -> Result<T> {
    let path = dir.join(file);
    let expected = hashes
        .iter()
        .find(|h| h.file == file)
        .ok_or_else(|| Error::StaleCache(format!("{file} is not listed in the manifest of {}", dir.display())))?;
    if !path.exists() {
        return Err(Error::MissingArtifact(path));
    }
    if sha256_file(&path)? != expected.sha256 {
        return Err(Error::StaleCache(format!("{} changed after it was written", path.display())));
    }
    read_json(&path)
}
