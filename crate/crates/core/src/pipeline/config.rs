use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifier::PersonalConfig;
use crate::error::{Error, Result};
use crate::geometry::{MapKind, SearchConfig, TargetBasis, TransformConfig};
use crate::labels::AamiClass;
use crate::signal::{DelineationConfig, DenoiseConfig, SegmentationConfig};
use crate::swarm::{BasisSet, MopsoConfig};
use crate::wfdb::AamiMap;

pub const DS1: [&str; 22] = [
    "101", "106", "108", "109", "112", "114", "115", "116", "118", "119", "122", "124", "201", "203", "205", "207",
    "208", "209", "215", "220", "223", "230",
];
pub const DS2: [&str; 22] = [
    "100", "103", "105", "111", "113", "117", "121", "123", "200", "202", "210", "212", "213", "214", "219", "221",
    "222", "228", "231", "232", "233", "234",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformMode {
    None,
    DeterministicLinear,
    #[default]
    DeterministicLogit,
    Mopso,
}

impl TransformMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TransformMode::None => "none",
            TransformMode::DeterministicLinear => "deterministic-linear",
            TransformMode::DeterministicLogit => "deterministic-logit",
            TransformMode::Mopso => "mopso",
        }
    }
}

impl fmt::Display for TransformMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TransformMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(TransformMode::None),
            "deterministic-linear" => Ok(TransformMode::DeterministicLinear),
            "deterministic-logit" => Ok(TransformMode::DeterministicLogit),
            "mopso" => Ok(TransformMode::Mopso),
            _ => Err(Error::Config(format!(
                "unknown transform mode `{s}` (none, deterministic-linear, deterministic-logit, mopso)"
            ))),
        }
    }
}

/// Where the deterministic map is centred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anchor {
    /// Rebuilt at each patient's current normal centroid.
    #[default]
    Personal,
    /// Built once at the training normal centroid.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecordLists {
    pub ds1: Vec<String>,
    pub ds2: Vec<String>,
}

impl Default for RecordLists {
    fn default() -> Self {
        RecordLists {
            ds1: DS1.iter().map(|s| s.to_string()).collect(),
            ds2: DS2.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformSection {
    pub mode: TransformMode,
    pub anchor: Anchor,
    pub alpha_g: f64,
    pub basis: TargetBasis,
    pub search: SearchConfig,
}

impl Default for TransformSection {
    fn default() -> Self {
        TransformSection {
            mode: TransformMode::default(),
            anchor: Anchor::default(),
            alpha_g: 1.0,
            basis: TargetBasis::default(),
            search: SearchConfig::default(),
        }
    }
}

impl TransformSection {
    /// Deterministic map settings; `None` for the other modes.
    pub fn deterministic(&self) -> Option<TransformConfig> {
        let kind = match self.mode {
            TransformMode::DeterministicLinear => MapKind::PiecewiseLinear,
            TransformMode::DeterministicLogit => MapKind::Logit { alpha_g: self.alpha_g },
            _ => return None,
        };
        Some(TransformConfig { kind, basis: self.basis, search: self.search })
    }
}

/// Swarm settings; the seed comes from the top-level `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MopsoSection {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub archive_capacity: usize,
    pub max_velocity: f64,
    pub max_cluster_points: usize,
    pub basis: BasisName,
    /// Weight of o1 when picking the front member; unset picks the knee.
    pub beta: Option<f64>,
    /// Start the configured basis from the linear front embedded into it.
    pub warm_start: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisName {
    Linear,
    #[default]
    Polynomial2,
}

impl MopsoSection {
    pub fn basis_set(&self, dim: usize) -> BasisSet {
        match self.basis {
            BasisName::Linear => BasisSet::Linear { dim },
            BasisName::Polynomial2 => BasisSet::Polynomial2 { dim },
        }
    }

    pub fn params(&self, seed: u64) -> MopsoConfig {
        MopsoConfig {
            swarm_size: self.swarm_size,
            iterations: self.iterations,
            inertia: self.inertia,
            cognitive: self.cognitive,
            social: self.social,
            archive_capacity: self.archive_capacity,
            max_velocity: self.max_velocity,
            max_cluster_points: self.max_cluster_points,
            seed,
        }
    }
}

impl Default for MopsoSection {
    fn default() -> Self {
        let p = MopsoConfig::default();
        MopsoSection {
            swarm_size: p.swarm_size,
            iterations: p.iterations,
            inertia: p.inertia,
            cognitive: p.cognitive,
            social: p.social,
            archive_capacity: p.archive_capacity,
            max_velocity: p.max_velocity,
            max_cluster_points: p.max_cluster_points,
            basis: BasisName::default(),
            beta: None,
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    /// Look-ahead of the windowed prediction table, in segments.
    pub window: usize,
    pub alpha_sweep: Vec<f64>,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        EvaluationSection { window: 10, alpha_sweep: vec![1.0, 1.25, 1.5, 2.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Preferred signal channel.
    pub channel: String,
    /// Sampling rate assumed for CSV-format records.
    pub csv_sampling_rate: f64,
    pub pca_dim: usize,
    pub k: usize,
    pub records: RecordLists,
    pub denoise: DenoiseConfig,
    pub delineation: DelineationConfig,
    pub segmentation: SegmentationConfig,
    pub personal: PersonalConfig,
    pub transform: TransformSection,
    pub mopso: MopsoSection,
    pub evaluation: EvaluationSection,
    /// Beat symbol overrides, e.g. `"/" = "Q"`.
    pub aami: BTreeMap<String, String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            data_dir: PathBuf::from("data/mitdb"),
            out_dir: PathBuf::from("out"),
            seed: 0,
            channel: "MLII".into(),
            csv_sampling_rate: 360.0,
            pca_dim: 8,
            k: 10,
            records: RecordLists::default(),
            denoise: DenoiseConfig::default(),
            delineation: DelineationConfig::default(),
            segmentation: SegmentationConfig::default(),
            personal: PersonalConfig::default(),
            transform: TransformSection::default(),
            mopso: MopsoSection::default(),
            evaluation: EvaluationSection::default(),
            aami: BTreeMap::new(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for r in self.records.ds1.iter().chain(&self.records.ds2) {
            if !seen.insert(r) {
                return Err(Error::Config(format!("record `{r}` listed twice (DS1 and DS2 must be disjoint)")));
            }
        }
        self.segmentation.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.personal.validate()?;
        self.mopso.params(self.seed).validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.pca_dim < 2 {
            return Err(Error::Config("pca_dim must be at least 2".into()));
        }
        if !(self.csv_sampling_rate > 0.0) {
            return Err(Error::Config("csv_sampling_rate must be positive".into()));
        }
        if self.evaluation.alpha_sweep.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::Config("alpha_sweep values must be positive".into()));
        }
        self.aami_map()?;
        Ok(())
    }

    pub fn aami_map(&self) -> Result<AamiMap> {
        let mut over = vec![];
        for (sym, class) in &self.aami {
            let mut chars = sym.chars();
            let (Some(s), None) = (chars.next(), chars.next()) else {
                return Err(Error::Config(format!("[aami] key `{sym}` must be a single beat symbol")));
            };
            let c = class
                .chars()
                .next()
                .filter(|_| class.len() == 1)
                .and_then(AamiClass::from_char)
                .ok_or_else(|| Error::Config(format!("[aami] `{sym}` = `{class}`: class must be one of N, V, S, F, Q")))?;
            over.push((s, c));
        }
        Ok(AamiMap::default().with_overrides(over))
    }

    pub fn ingest_dir(&self) -> PathBuf {
        self.out_dir.join("ingest")
    }
    pub fn train_dir(&self) -> PathBuf {
        self.out_dir.join("train")
    }
    pub fn transform_dir(&self) -> PathBuf {
        self.out_dir.join("transform")
    }
    pub fn classify_dir(&self) -> PathBuf {
        self.out_dir.join("classify")
    }
    pub fn evaluate_dir(&self) -> PathBuf {
        self.out_dir.join("evaluate")
    }
}
