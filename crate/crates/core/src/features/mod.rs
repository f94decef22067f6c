//! The 22 raw segment features, their CSV layout, and PCA reduction.

pub mod extract;
pub mod pca;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::Class;

pub use extract::{extract_features, FeatureContext};
pub use pca::{fit_pca, fit_pca_tagged, PcaModel};

pub const NUM_RAW_FEATURES: usize = 22;

pub type RawFeatureVector = [f64; NUM_RAW_FEATURES];

/// Canonical column names, in vector order.
pub const FEATURE_NAMES: [&str; NUM_RAW_FEATURES] = [
    "qrs_mean",
    "qrs_std",
    "qt_mean",
    "qt_std",
    "pr_mean",
    "pr_std",
    "peak_ratio_mean",
    "peak_ratio_std",
    "power_7_5hz_mean",
    "power_7_5hz_std",
    "power_10hz_mean",
    "power_10hz_std",
    "power_12_5hz_mean",
    "power_12_5hz_std",
    "power_15hz_mean",
    "power_15hz_std",
    "rr_mean",
    "r_amplitude_drift",
    "energy",
    "max_peak",
    "min_peak",
    "peak_energy_ratio",
];

/// Which side of the inter-patient split a row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// One labelled segment before reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSample {
    pub patient_id: String,
    pub segment_index: usize,
    pub timestamp_s: f64,
    pub label: Class,
    pub features: RawFeatureVector,
}

/// One labelled segment in the reduced space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSample {
    pub x: Vec<f64>,
    pub true_label: Class,
    pub patient_id: String,
    pub time_index: usize,
    pub timestamp_s: f64,
}

impl FeatureSample {
    pub fn from_raw(raw: &RawSample, model: &PcaModel) -> Self {
        FeatureSample {
            x: model.apply(&raw.features),
            true_label: raw.label,
            patient_id: raw.patient_id.clone(),
            time_index: raw.segment_index,
            timestamp_s: raw.timestamp_s,
        }
    }
}

const META: [&str; 4] = ["patient", "segment_index", "timestamp_s", "label"];

/// Writes rows with a header of metadata columns followed by the 22 feature names.
pub fn write_feature_csv<W: Write>(out: W, rows: &[RawSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(META.iter().chain(FEATURE_NAMES.iter()))?;
    for r in rows {
        let mut rec = vec![
            r.patient_id.clone(),
            r.segment_index.to_string(),
            format!("{:?}", r.timestamp_s),
            r.label.as_char().to_string(),
        ];
        // `{:?}` prints the shortest string that round-trips exactly
        rec.extend(r.features.iter().map(|v| format!("{v:?}")));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<features>", e))
}

pub fn read_feature_csv<R: Read>(input: R) -> Result<Vec<RawSample>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    let expected: Vec<&str> = META.iter().chain(FEATURE_NAMES.iter()).copied().collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(Error::InvalidRecord("feature CSV header does not match the canonical columns".into()));
    }
    let bad = |what: &str, line: usize| Error::InvalidRecord(format!("feature CSV row {line}: bad {what}"));
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let mut features = [0.0; NUM_RAW_FEATURES];
        for (j, f) in features.iter_mut().enumerate() {
            *f = rec[4 + j].parse().map_err(|_| bad(FEATURE_NAMES[j], line))?;
        }
        out.push(RawSample {
            patient_id: rec[0].to_string(),
            segment_index: rec[1].parse().map_err(|_| bad("segment_index", line))?,
            timestamp_s: rec[2].parse().map_err(|_| bad("timestamp_s", line))?,
            label: rec[3]
                .chars()
                .next()
                .and_then(Class::from_char)
                .ok_or_else(|| bad("label", line))?,
            features,
        });
    }
    Ok(out)
}
