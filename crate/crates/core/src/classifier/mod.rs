//! Global kNN stage, personal normal cluster and deviation analysis.

pub mod alarm;
pub mod deviation;
pub mod knn;
pub mod personal;
pub mod stream;

pub use alarm::{write_alarms_csv, write_alarms_jsonl, AlarmLabel, AlarmValue, Stage};
pub use deviation::{
    compute_deviation_metrics, confirm_normal, deviation_analysis, deviation_label, AbnormalClusters, DeviationAnalyzer,
    DeviationMetrics, DeviationSpace,
};
pub use knn::{classify_global, GlobalModel};
pub use personal::PersonalNormalCluster;
pub use stream::{process_stream, PersonalConfig, StreamOutput, StreamSample};
