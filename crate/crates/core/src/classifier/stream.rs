use serde::{Deserialize, Serialize};

use crate::classifier::alarm::{AlarmLabel, AlarmValue, Stage};
use crate::classifier::deviation::{compute_deviation_metrics, confirm_normal, AbnormalClusters, DeviationAnalyzer, DeviationSpace};
use crate::classifier::knn::GlobalModel;
use crate::classifier::personal::PersonalNormalCluster;
use crate::error::{Error, Result};
use crate::labels::Class;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PersonalConfig {
    /// Diameter multiplier of the normal check.
    pub alpha: f64,
    /// Initialization period from record start, seconds.
    pub init_s: f64,
    pub window_s: f64,
}

impl Default for PersonalConfig {
    fn default() -> Self {
        PersonalConfig { alpha: 1.25, init_s: 300.0, window_s: 300.0 }
    }
}

impl PersonalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.window_s > 0.0) || !(self.init_s >= 0.0) {
            return Err(Error::Config("personal windows must be positive".into()));
        }
        Ok(())
    }
}

/// One reduced feature vector in a patient's stream.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSample<T> {
    pub x: Vec<T>,
    pub time_index: usize,
    pub timestamp_s: f64,
    pub truth: Option<Class>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StreamOutput {
    /// Labels for samples after the initialization period.
    pub alarms: Vec<AlarmLabel>,
    pub init_samples: usize,
    pub init_normals: usize,
    /// Global-stage labels of the initialization samples.
    pub init_global: Vec<Class>,
    pub transform_fallbacks: usize,
}

/// Runs both stages over one patient's time-ordered samples.
pub fn process_stream<T: Scalar>(
    patient_id: &str,
    samples: &[StreamSample<T>],
    model: &GlobalModel<T>,
    abnormal: &AbnormalClusters<T>,
    space: &DeviationSpace<T>,
    cfg: &PersonalConfig,
) -> Result<StreamOutput> {
    cfg.validate()?;
    if samples.windows(2).any(|w| w[1].timestamp_s < w[0].timestamp_s) {
        return Err(Error::InvalidParameter(format!("{patient_id}: samples are not time-ordered")));
    }
    let xs: Vec<Vec<T>> = samples.iter().map(|s| s.x.clone()).collect();
    let global = model.classify_batch(&xs);

    let split = samples.partition_point(|s| s.timestamp_s < cfg.init_s);
    let mut cluster = PersonalNormalCluster::new(patient_id, cfg.window_s);
    for (s, g) in samples[..split].iter().zip(&global) {
        if *g == Class::N {
            cluster.push(s.timestamp_s, s.x.clone())?;
        }
    }
    let mut out = StreamOutput {
        init_samples: split,
        init_normals: global[..split].iter().filter(|&&g| g == Class::N).count(),
        init_global: global[..split].to_vec(),
        ..Default::default()
    };
    if out.init_normals < 2 {
        return Err(Error::NotInitialized(format!(
            "{patient_id}: {} normal sample(s) in the first {} s, need 2",
            out.init_normals, cfg.init_s
        )));
    }

    let mut analyzer = DeviationAnalyzer::new(space, abnormal)?;
    for (s, &g) in samples[split..].iter().zip(&global[split..]) {
        let (stage, value) = if g != Class::N {
            (Stage::Global, AlarmValue::red(g))
        } else {
            let m = compute_deviation_metrics(&cluster, abnormal, &s.x)?;
            if confirm_normal(&m, cfg.alpha) {
                cluster.push(s.timestamp_s, s.x.clone())?;
                (Stage::Personal, AlarmValue::N)
            } else {
                (Stage::Personal, AlarmValue::yellow(analyzer.analyze(&cluster, &s.x)?))
            }
        };
        out.alarms.push(AlarmLabel {
            patient_id: patient_id.to_string(),
            time_index: s.time_index,
            timestamp_s: s.timestamp_s,
            stage,
            value,
            global: g,
            truth: s.truth,
        });
    }
    out.transform_fallbacks = analyzer.fallbacks;
    Ok(out)
}
